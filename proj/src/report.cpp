#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"
#include "longeval/orchestrator.hpp"
#include "longeval/rank_stats.hpp"
#include "longeval/records.hpp"

namespace longeval {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string percent1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

std::string fixed(double value, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

Manifest::Entry entry_of(const fs::path& run_dir, const fs::path& path,
                         const std::string& sha) {
  return Manifest::Entry{fs::relative(path, run_dir).string(), sha};
}

}  // namespace

void Runner::stage_report() {
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  json summary;
  std::string text;
  text += "longeval run report\n";
  text += "===================\n";
  text += "run_id: " + config_.run_id + "\n";
  text += "seed:   " + std::to_string(config_.seed) + "\n\n";
  summary["run_id"] = config_.run_id;
  summary["seed"] = config_.seed;

  std::unordered_map<std::string, std::string> regime_by_system;
  for (const SystemConfig& s : config_.systems) {
    regime_by_system[s.system_id] = regime_name(s.regime);
  }

  // ---- absolute accuracy table (Bernoulli CI per system and book) ----------
  if (manifest_->has_stage("rate-absolute")) {
    const fs::path verdicts_path = manifest_->resolve_artifact(
        "rate-absolute", "absolute_verdicts", "report");
    inputs["absolute_verdicts"] =
        Manifest::Entry{fs::relative(verdicts_path, run_dir_).string(),
                        digest::sha256_file_hex(verdicts_path.string())};
    const fs::path items_path =
        manifest_->resolve_artifact("gen-questions", "qa_items", "report");
    std::unordered_map<std::string, std::string> book_of_question;
    for (const json& row : read_jsonl(items_path.string())) {
      book_of_question[row.at("question_id").get<std::string>()] =
          row.at("book_id").get<std::string>();
    }

    struct Cell {
      std::size_t entailed = 0;
      std::size_t total = 0;
    };
    std::map<std::pair<std::string, std::string>, Cell> cells;
    for (const json& row : read_jsonl(verdicts_path.string())) {
      if (row.value("status", "ok") != "ok" || row["entailed"].is_null()) {
        continue;
      }
      const std::string question_id = row["question_id"].get<std::string>();
      const std::string book_id = book_of_question.count(question_id)
                                      ? book_of_question[question_id]
                                      : "?";
      Cell& cell = cells[{book_id, row["system_id"].get<std::string>()}];
      ++cell.total;
      if (row["entailed"].get<bool>()) ++cell.entailed;
    }

    text += "Absolute factual accuracy (entailment rater, 95% CI)\n";
    text += pad("book", 18) + pad("system", 18) + pad("context", 14) +
            "accuracy\n";
    json accuracy_rows = json::array();
    for (const auto& [key, cell] : cells) {
      const auto& [book_id, system_id] = key;
      const AccuracyCi ci = accuracy_with_ci(cell.entailed, cell.total);
      const std::string regime = regime_by_system.count(system_id)
                                     ? regime_by_system[system_id]
                                     : "?";
      text += pad(book_id, 18) + pad(system_id, 18) + pad(regime, 14) +
              percent1(ci.p_hat) + " ± " + percent1(ci.half_width) +
              "  (n=" + std::to_string(cell.total) + ")\n";
      accuracy_rows.push_back(json{{"book_id", book_id},
                                   {"system_id", system_id},
                                   {"context", regime},
                                   {"accuracy", ci.p_hat},
                                   {"ci_half_width", ci.half_width},
                                   {"n", cell.total}});
    }
    summary["accuracy"] = std::move(accuracy_rows);
    text += "\n";
  }

  // ---- ranking --------------------------------------------------------------
  if (config_.systems.size() < 2) {
    text += "Ranking\n";
    text +=
        "Only one system is configured; pairwise ranking needs at least "
        "two.\n\n";
    summary["ranking"] = nullptr;
  } else if (manifest_->has_stage("rank")) {
    const fs::path ranking_path =
        manifest_->resolve_artifact("rank", "ranking", "report");
    inputs["ranking"] =
        Manifest::Entry{fs::relative(ranking_path, run_dir_).string(),
                        digest::sha256_file_hex(ranking_path.string())};
    const json ranking = json::parse(read_text_file(ranking_path.string()));
    // Mirrored verbatim so downstream consumers see identical numbers.
    summary["ranking"] = ranking;

    text += "Pairwise ranking (Bradley-Terry strengths, bootstrap CI on beta)\n";
    text += pad("system", 18) + pad("e^beta", 12) + pad("beta", 12) +
            "95% CI (beta)\n";
    std::vector<json> systems = ranking["systems"].get<std::vector<json>>();
    std::sort(systems.begin(), systems.end(), [](const json& a, const json& b) {
      return a["beta"].get<double>() > b["beta"].get<double>();
    });
    for (const json& s : systems) {
      text += pad(s["system_id"].get<std::string>(), 18) +
              pad(fixed(s["exp_beta"].get<double>(), 4), 12) +
              pad(fixed(s["beta"].get<double>(), 4), 12) + "[" +
              fixed(s["ci_low"].get<double>(), 4) + ", " +
              fixed(s["ci_high"].get<double>(), 4) + "]\n";
    }

    text += "\nHead-to-head win probabilities (row beats column)\n";
    text += pad("", 18);
    for (const json& s : systems) {
      text += pad(s["system_id"].get<std::string>(), 18);
    }
    text += "\n";
    json matrix = json::array();
    for (const json& row_sys : systems) {
      text += pad(row_sys["system_id"].get<std::string>(), 18);
      json matrix_row = json::array();
      for (const json& col_sys : systems) {
        if (row_sys["system_id"] == col_sys["system_id"]) {
          text += pad("-", 18);
          matrix_row.push_back(nullptr);
        } else {
          const double p = win_probability(row_sys["exp_beta"].get<double>(),
                                           col_sys["exp_beta"].get<double>());
          text += pad(fixed(p, 4), 18);
          matrix_row.push_back(p);
        }
      }
      text += "\n";
      matrix.push_back(std::move(matrix_row));
    }
    json order = json::array();
    for (const json& s : systems) order.push_back(s["system_id"]);
    summary["win_probability"] = {{"systems", order}, {"matrix", matrix}};
    text += "\n";
  }

  // ---- agreement -------------------------------------------------------------
  if (manifest_->has_stage("agreement")) {
    const fs::path agreement_path =
        manifest_->resolve_artifact("agreement", "agreement", "report");
    inputs["agreement"] =
        Manifest::Entry{fs::relative(agreement_path, run_dir_).string(),
                        digest::sha256_file_hex(agreement_path.string())};
    const json agreement_json =
        json::parse(read_text_file(agreement_path.string()));
    summary["agreement"] = agreement_json;
    text += "Inter-rater agreement (" +
            agreement_json["rater1"].get<std::string>() + " vs " +
            agreement_json["rater2"].get<std::string>() + ")\n";
    text += "agreement rate: " +
            percent1(agreement_json["agreement_rate"].get<double>()) + "% (" +
            std::to_string(agreement_json["total"].get<std::size_t>()) +
            " shared trials)\n";
    text += "cohen kappa:    " +
            fixed(agreement_json["kappa"].get<double>(), 3) + "\n\n";
  }

  const fs::path txt_path = run_dir_ / "report.txt";
  write_text_file(txt_path.string(), text);
  const fs::path json_path = run_dir_ / "report.json";
  write_text_file(json_path.string(), summary.dump(2) + "\n");
  artifacts["report_txt"] =
      entry_of(run_dir_, txt_path, digest::sha256_file_hex(txt_path.string()));
  artifacts["report_json"] = entry_of(
      run_dir_, json_path, digest::sha256_file_hex(json_path.string()));
  manifest_->record_stage("report", inputs, artifacts);
}

}  // namespace longeval
