#include "longeval/records.hpp"

#include <fstream>
#include <sstream>

#include "longeval/errors.hpp"

namespace longeval {

using json = nlohmann::json;

json to_json(const Book& book) {
  return json{{"book_id", book.book_id},
              {"title", book.title},
              {"author", book.author},
              {"body", book.body},
              {"token_count", book.token_count}};
}

Book book_from_json(const json& j) {
  Book book;
  book.book_id = j.at("book_id").get<std::string>();
  book.title = j.value("title", "");
  book.author = j.value("author", "");
  book.body = j.at("body").get<std::string>();
  book.token_count = j.at("token_count").get<std::size_t>();
  return book;
}

json to_json(const EntityChain& chain, const std::string& book_id) {
  json mentions = json::array();
  for (const Mention& m : chain.mentions) {
    mentions.push_back(
        json{{"surface", m.surface}, {"start", m.start}, {"end", m.end}});
  }
  return json{{"book_id", book_id},
              {"entity_id", chain.entity_id},
              {"mentions", std::move(mentions)},
              {"frequency", chain.frequency}};
}

std::pair<std::string, EntityChain> chain_from_json(const json& j) {
  EntityChain chain;
  chain.entity_id = j.at("entity_id").get<std::int64_t>();
  for (const json& m : j.at("mentions")) {
    chain.mentions.push_back(Mention{m.at("surface").get<std::string>(),
                                     m.at("start").get<std::size_t>(),
                                     m.at("end").get<std::size_t>()});
  }
  chain.frequency = j.at("frequency").get<std::size_t>();
  return {j.at("book_id").get<std::string>(), std::move(chain)};
}

json to_json(const QAItem& item) {
  json j{{"question_id", item.question_id},
         {"book_id", item.book_id},
         {"entity_id", item.entity_id},
         {"question", item.question},
         {"reference_answer", item.reference_answer},
         {"provenance",
          {{"model_id", item.provenance.model_id},
           {"prompt_digest", item.provenance.prompt_digest}}}};
  if (!item.gt_answers.empty()) j["gt_answers"] = item.gt_answers;
  return j;
}

QAItem qa_item_from_json(const json& j) {
  QAItem item;
  item.question_id = j.at("question_id").get<std::string>();
  item.book_id = j.at("book_id").get<std::string>();
  item.entity_id = j.value("entity_id", std::int64_t{0});
  item.question = j.at("question").get<std::string>();
  item.reference_answer = j.value("reference_answer", "");
  if (j.contains("gt_answers")) {
    item.gt_answers = j.at("gt_answers").get<std::vector<std::string>>();
  }
  if (j.contains("provenance")) {
    item.provenance.model_id = j["provenance"].value("model_id", "");
    item.provenance.prompt_digest = j["provenance"].value("prompt_digest", "");
  }
  return item;
}

json to_json(const AnswerRecord& record) {
  return json{{"question_id", record.question_id},
              {"system_id", record.system_id},
              {"answer_text", record.answer_text},
              {"prompt_digest", record.prompt_digest},
              {"context_token_count", record.context_token_count},
              {"status", record.status}};
}

AnswerRecord answer_record_from_json(const json& j) {
  AnswerRecord record;
  record.question_id = j.at("question_id").get<std::string>();
  record.system_id = j.at("system_id").get<std::string>();
  record.answer_text = j.at("answer_text").get<std::string>();
  record.prompt_digest = j.value("prompt_digest", "");
  record.context_token_count = j.value("context_token_count", std::size_t{0});
  record.status = j.value("status", "ok");
  return record;
}

json to_json(const AbsoluteVerdictRecord& record) {
  json j{{"question_id", record.question_id},
         {"system_id", record.system_id},
         {"rater_id", record.rater_id},
         {"evidence", record.evidence},
         {"status", record.status}};
  j["entailed"] = record.entailed ? json(*record.entailed) : json(nullptr);
  return j;
}

AbsoluteVerdictRecord absolute_verdict_from_json(const json& j) {
  AbsoluteVerdictRecord record;
  record.question_id = j.at("question_id").get<std::string>();
  record.system_id = j.at("system_id").get<std::string>();
  record.rater_id = j.value("rater_id", "");
  if (j.contains("entailed") && !j["entailed"].is_null()) {
    record.entailed = j["entailed"].get<bool>();
  }
  if (j.contains("evidence")) {
    record.evidence = j.at("evidence").get<std::vector<std::string>>();
  }
  record.status = j.value("status", "ok");
  return record;
}

json to_json(const PairwiseJudgment& judgment) {
  json j{{"question_id", judgment.question_id},
         {"system_a", judgment.system_a},
         {"system_b", judgment.system_b},
         {"swapped", judgment.swapped},
         {"raw_verdict", raw_verdict_name(judgment.raw_verdict)},
         {"evidence", judgment.evidence},
         {"rater_id", judgment.rater_id},
         {"excluded", judgment.excluded()}};
  j["resolved_winner"] = judgment.resolved_winner
                             ? json(*judgment.resolved_winner)
                             : json(nullptr);
  return j;
}

PairwiseJudgment judgment_from_json(const json& j) {
  PairwiseJudgment judgment;
  judgment.question_id = j.at("question_id").get<std::string>();
  judgment.system_a = j.at("system_a").get<std::string>();
  judgment.system_b = j.at("system_b").get<std::string>();
  judgment.swapped = j.at("swapped").get<bool>();
  judgment.raw_verdict =
      raw_verdict_from_name(j.at("raw_verdict").get<std::string>());
  if (j.contains("resolved_winner") && !j["resolved_winner"].is_null()) {
    judgment.resolved_winner = j["resolved_winner"].get<std::string>();
  }
  if (j.contains("evidence")) {
    judgment.evidence = j.at("evidence").get<std::vector<std::string>>();
  }
  judgment.rater_id = j.value("rater_id", "");
  return judgment;
}

json to_json(const RankingResult& result) {
  json systems = json::array();
  for (const SystemStrength& s : result.systems) {
    systems.push_back(json{{"system_id", s.system_id},
                           {"beta", s.beta},
                           {"exp_beta", s.gamma},
                           {"ci_low", s.ci_low},
                           {"ci_high", s.ci_high},
                           {"n_effective", s.n_effective}});
  }
  return json{{"systems", std::move(systems)},
              {"epsilon_used", result.epsilon_used},
              {"iterations", result.iterations},
              {"converged", result.converged}};
}

void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  for (const json& row : rows) out << row.dump() << '\n';
  if (!out) throw Error("failed writing file: " + path);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": bad record: " + e.what());
    }
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace longeval
