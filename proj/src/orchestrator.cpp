#include "longeval/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <unordered_map>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"
#include "longeval/records.hpp"
#include "longeval/strings.hpp"

namespace longeval {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string iso_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Manifest::Entry file_entry(const fs::path& run_dir, const fs::path& path) {
  return Manifest::Entry{fs::relative(path, run_dir).string(),
                         digest::sha256_file_hex(path.string())};
}

Manifest::Entry external_entry(const std::string& path) {
  return Manifest::Entry{path, digest::sha256_file_hex(path)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

Manifest Manifest::load_or_create(const fs::path& run_dir,
                                  const std::string& run_id,
                                  std::uint64_t seed,
                                  const std::string& config_digest) {
  Manifest manifest;
  manifest.run_dir_ = run_dir;
  manifest.path_ = run_dir / "manifest.json";
  if (fs::exists(manifest.path_)) {
    manifest.data_ = json::parse(read_text_file(manifest.path_.string()));
    if (manifest.data_.value("config_digest", "") != config_digest) {
      throw ConfigError(
          "run directory was created with a different configuration; use a "
          "new --run-id");
    }
  } else {
    manifest.data_ = json{{"run_id", run_id},
                          {"seed", seed},
                          {"config_digest", config_digest},
                          {"stages", json::object()}};
  }
  return manifest;
}

void Manifest::record_stage(const std::string& stage,
                            const std::map<std::string, Entry>& inputs,
                            const std::map<std::string, Entry>& artifacts,
                            const json& meta) {
  json in = json::object(), out = json::object();
  for (const auto& [name, entry] : inputs) {
    in[name] = {{"path", entry.path}, {"sha256", entry.sha256}};
  }
  for (const auto& [name, entry] : artifacts) {
    out[name] = {{"path", entry.path}, {"sha256", entry.sha256}};
  }
  data_["stages"][stage] = {{"created_at", iso_utc_now()},
                            {"inputs", std::move(in)},
                            {"artifacts", std::move(out)}};
  if (!meta.empty()) data_["stages"][stage]["meta"] = meta;
  save();
}

bool Manifest::has_stage(const std::string& stage) const {
  return data_.contains("stages") && data_["stages"].contains(stage);
}

fs::path Manifest::resolve_artifact(const std::string& producer_stage,
                                    const std::string& name,
                                    const std::string& for_stage) const {
  if (!has_stage(producer_stage)) {
    throw ArtifactError(for_stage, "upstream stage '" + producer_stage +
                                       "' has not run");
  }
  const json& artifacts = data_["stages"][producer_stage]["artifacts"];
  if (!artifacts.contains(name)) {
    throw ArtifactError(for_stage, "stage '" + producer_stage +
                                       "' has no artifact '" + name + "'");
  }
  const fs::path path = run_dir_ / artifacts[name]["path"].get<std::string>();
  if (!fs::exists(path)) {
    throw ArtifactError(for_stage, "artifact file missing: " + path.string());
  }
  const std::string expected = artifacts[name]["sha256"].get<std::string>();
  const std::string actual = digest::sha256_file_hex(path.string());
  if (actual != expected) {
    throw ArtifactError(for_stage,
                        "artifact digest mismatch for " + path.string());
  }
  return path;
}

std::map<std::string, fs::path> Manifest::resolve_all(
    const std::string& producer_stage, const std::string& for_stage) const {
  if (!has_stage(producer_stage)) {
    throw ArtifactError(for_stage, "upstream stage '" + producer_stage +
                                       "' has not run");
  }
  std::map<std::string, fs::path> out;
  for (const auto& [name, entry] :
       data_["stages"][producer_stage]["artifacts"].items()) {
    out[name] = resolve_artifact(producer_stage, name, for_stage);
  }
  return out;
}

void Manifest::save() const {
  write_text_file(path_.string(), data_.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Backends

std::unique_ptr<MockBackend> make_mock_backend(const std::string& name,
                                               const std::string& script_path) {
  auto backend = std::make_unique<MockBackend>(name);
  if (script_path.empty()) return backend;
  json script;
  try {
    script = json::parse(read_text_file(script_path));
  } catch (const json::exception& e) {
    throw ConfigError("mock script " + script_path + ": " + e.what());
  }
  for (const json& rule : script.value("rules", json::array())) {
    const std::string response = rule.value("response", "");
    if (rule.contains("exact")) {
      backend->script_exact(rule["exact"].get<std::string>(), response);
    } else if (rule.contains("substring")) {
      backend->script_substring(rule["substring"].get<std::string>(),
                                response);
    } else {
      throw ConfigError("mock rule needs 'exact' or 'substring': " +
                        script_path);
    }
  }
  if (script.contains("default")) {
    backend->set_default_response(script["default"].get<std::string>());
  }
  return backend;
}

// ---------------------------------------------------------------------------
// Runner

Runner::Runner(LoadedConfig loaded, Overrides overrides)
    : config_(std::move(loaded.config)), config_digest_(loaded.digest) {
  if (overrides.seed) config_.seed = *overrides.seed;
  if (overrides.run_id) config_.run_id = *overrides.run_id;
  backend_overrides_ = std::move(overrides.backends);
  for (const auto& [from, to] : backend_overrides_) {
    config_.backend_spec(from);
    config_.backend_spec(to);
  }

  run_dir_ = fs::path(config_.artifacts_dir) / config_.run_id;
  fs::create_directories(run_dir_);
  // Overriding seed or run id changes what the artifacts mean, so those
  // overrides participate in the digest guarding the run directory.
  std::string digest_material = config_digest_;
  digest_material += "/seed=" + std::to_string(config_.seed);
  for (const auto& [from, to] : backend_overrides_) {
    digest_material += "/" + from + "->" + to;
  }
  config_digest_ = digest::sha256_hex(digest_material);
  manifest_ = std::make_unique<Manifest>(Manifest::load_or_create(
      run_dir_, config_.run_id, config_.seed, config_digest_));

  Gateway::Options options;
  options.cache_dir = config_.cache_dir;
  options.retry.max_attempts = config_.gateway.retry_max_attempts;
  options.retry.base_delay =
      std::chrono::milliseconds(config_.gateway.retry_base_delay_ms);
  options.rate_limit.requests_per_minute = config_.gateway.requests_per_minute;
  options.max_in_flight = config_.gateway.max_in_flight;
  gateway_ = std::make_unique<Gateway>(std::move(options));
}

Runner::~Runner() = default;

Backend& Runner::backend(const std::string& declared) {
  std::string name = declared;
  if (auto it = backend_overrides_.find(name); it != backend_overrides_.end()) {
    name = it->second;
  }
  if (auto it = backends_.find(name); it != backends_.end()) {
    return *it->second;
  }
  const BackendSpec& spec = config_.backend_spec(name);
  std::unique_ptr<Backend> built;
  if (spec.kind == "mock") {
    built = make_mock_backend(spec.name, spec.script_path);
  } else {
    built = std::make_unique<HttpBackend>(spec.http);
  }
  Backend& ref = *built;
  backends_.emplace(name, std::move(built));
  return ref;
}

const std::vector<std::string>& Runner::stage_names() {
  static const std::vector<std::string> kStages = {
      "ingest",        "parse-coref", "index",  "gen-questions",
      "answer",        "rate-absolute", "rate-sxs", "rank",
      "agreement",     "report"};
  return kStages;
}

void Runner::run_stage(const std::string& stage) {
  if (stage == "ingest") return stage_ingest();
  if (stage == "parse-coref") return stage_parse_coref();
  if (stage == "index") return stage_index();
  if (stage == "gen-questions") return stage_gen_questions();
  if (stage == "answer") return stage_answer();
  if (stage == "rate-absolute") return stage_rate_absolute();
  if (stage == "rate-sxs") return stage_rate_sxs();
  if (stage == "rank") return stage_rank();
  if (stage == "agreement") return stage_agreement();
  if (stage == "report") return stage_report();
  throw ConfigError("unknown stage: " + stage);
}

void Runner::run_all() {
  stage_ingest();
  stage_parse_coref();
  stage_index();
  stage_gen_questions();
  stage_answer();
  if (config_.absolute_rater) stage_rate_absolute();
  if (config_.sxs && config_.systems.size() >= 2) {
    stage_rate_sxs();
    stage_rank();
    if (config_.sxs->raters.size() >= 2) stage_agreement();
  }
  stage_report();
}

// ---------------------------------------------------------------------------
// Shared loaders

struct Runner::Loaded {
  static std::vector<Book> books(Runner& r, const std::string& for_stage) {
    const fs::path path =
        r.manifest_->resolve_artifact("ingest", "books", for_stage);
    std::vector<Book> books;
    for (const json& row : read_jsonl(path.string())) {
      books.push_back(book_from_json(row));
    }
    return books;
  }

  static std::map<std::string, std::vector<EntityChain>> chains(
      Runner& r, const std::string& for_stage) {
    const fs::path path =
        r.manifest_->resolve_artifact("parse-coref", "chains", for_stage);
    std::map<std::string, std::vector<EntityChain>> by_book;
    for (const json& row : read_jsonl(path.string())) {
      auto [book_id, chain] = chain_from_json(row);
      by_book[book_id].push_back(std::move(chain));
    }
    return by_book;
  }

  static std::vector<QAItem> qa_items(Runner& r, const std::string& for_stage) {
    const fs::path path =
        r.manifest_->resolve_artifact("gen-questions", "qa_items", for_stage);
    std::vector<QAItem> items;
    for (const json& row : read_jsonl(path.string())) {
      items.push_back(qa_item_from_json(row));
    }
    return items;
  }

  static std::vector<AnswerRecord> answers(Runner& r,
                                           const std::string& for_stage) {
    const fs::path path =
        r.manifest_->resolve_artifact("answer", "answers", for_stage);
    std::vector<AnswerRecord> records;
    for (const json& row : read_jsonl(path.string())) {
      records.push_back(answer_record_from_json(row));
    }
    return records;
  }

  static Bm25Index index(Runner& r, const std::string& book_id,
                         const std::string& for_stage) {
    const fs::path path = r.manifest_->resolve_artifact(
        "index", "index:" + book_id, for_stage);
    return Bm25Index::load(path.string());
  }
};

// ---------------------------------------------------------------------------
// Stages

void Runner::stage_ingest() {
  const auto tokenizer = make_tokenizer(config_.tokenizer);
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  std::vector<json> rows;
  for (const BookSpec& spec : config_.books) {
    inputs["book:" + spec.book_id] = external_entry(spec.path);
    Book book = ingest_book_file(spec.path, spec.book_id, spec.title,
                                 spec.author, *tokenizer);
    rows.push_back(to_json(book));
  }
  const fs::path out = run_dir_ / "books.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["books"] = file_entry(run_dir_, out);
  manifest_->record_stage("ingest", inputs, artifacts,
                          json{{"tokenizer", tokenizer->name()},
                               {"book_count", config_.books.size()}});
}

void Runner::stage_parse_coref() {
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  std::vector<json> rows;
  std::size_t chain_count = 0;
  for (const BookSpec& spec : config_.books) {
    if (spec.annotation_path.empty()) continue;
    inputs["annotation:" + spec.book_id] = external_entry(spec.annotation_path);
    const CorefParse parsed =
        parse_coref_annotation(read_text_file(spec.annotation_path));
    const auto ranked = rank_entities(parsed.chains);
    for (const EntityChain& chain : ranked) {
      rows.push_back(to_json(chain, spec.book_id));
      ++chain_count;
    }
  }
  const fs::path out = run_dir_ / "chains.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["chains"] = file_entry(run_dir_, out);
  manifest_->record_stage("parse-coref", inputs, artifacts,
                          json{{"chain_count", chain_count}});
}

void Runner::stage_index() {
  const auto tokenizer = make_tokenizer(config_.tokenizer);
  const auto books = Loaded::books(*this, "index");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["books"] =
      file_entry(run_dir_, manifest_->resolve_artifact("ingest", "books", "index"));
  for (const Book& book : books) {
    auto passages =
        segment_passages(book, config_.passage_target_tokens, *tokenizer);
    const Bm25Index index = Bm25Index::build(std::move(passages), config_.bm25);
    const fs::path out = run_dir_ / ("index_" + book.book_id + ".bin");
    index.save(out.string());
    artifacts["index:" + book.book_id] = file_entry(run_dir_, out);
  }
  manifest_->record_stage("index", inputs, artifacts,
                          json{{"k1", config_.bm25.k1}, {"b", config_.bm25.b}});
}

void Runner::stage_gen_questions() {
  if (!config_.question_gen) {
    throw ConfigError("config has no question_gen section");
  }
  const QuestionGenSpec& spec = *config_.question_gen;
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  std::vector<json> rows;
  json meta;

  if (!spec.source_path.empty()) {
    // External dataset (e.g. human-curated questions with gt_answers).
    inputs["source"] = external_entry(spec.source_path);
    for (const json& row : read_jsonl(spec.source_path)) {
      rows.push_back(to_json(qa_item_from_json(row)));
    }
    meta["source"] = "external";
  } else {
    const auto tokenizer = make_tokenizer(config_.tokenizer);
    const auto books = Loaded::books(*this, "gen-questions");
    auto chains = Loaded::chains(*this, "gen-questions");
    inputs["books"] = file_entry(
        run_dir_, manifest_->resolve_artifact("ingest", "books", "gen-questions"));
    inputs["chains"] = file_entry(
        run_dir_,
        manifest_->resolve_artifact("parse-coref", "chains", "gen-questions"));

    QuestionGenOptions options;
    options.questions_per_entity = spec.questions_per_entity;
    options.target_count = spec.target_count;
    options.max_output_tokens = spec.max_output_tokens;
    options.model_id = spec.model_id;
    options.full_book_context = spec.full_book_context;
    options.passage_target_tokens = config_.passage_target_tokens;
    options.seed = static_cast<std::int64_t>(config_.seed);

    bool partial = false;
    std::size_t duplicates = 0, mention_drops = 0;
    Backend& be = backend(spec.backend);
    for (const Book& book : books) {
      auto it = chains.find(book.book_id);
      if (it == chains.end()) continue;
      const QuestionGenResult result = generate_dataset(
          book, it->second, *gateway_, be, options, *tokenizer);
      partial = partial || result.partial;
      duplicates += result.duplicate_dropped;
      mention_drops += result.entity_mention_dropped;
      for (const QAItem& item : result.items) rows.push_back(to_json(item));
    }
    meta["partial"] = partial;
    meta["duplicate_dropped"] = duplicates;
    meta["entity_mention_dropped"] = mention_drops;
    meta["source"] = "generated";
  }

  const fs::path out = run_dir_ / "qa_items.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["qa_items"] = file_entry(run_dir_, out);
  meta["item_count"] = rows.size();
  manifest_->record_stage("gen-questions", inputs, artifacts, meta);
}

void Runner::stage_answer() {
  const auto books = Loaded::books(*this, "answer");
  const auto items = Loaded::qa_items(*this, "answer");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["books"] = file_entry(
      run_dir_, manifest_->resolve_artifact("ingest", "books", "answer"));
  inputs["qa_items"] = file_entry(
      run_dir_, manifest_->resolve_artifact("gen-questions", "qa_items", "answer"));

  const bool needs_index =
      std::any_of(config_.systems.begin(), config_.systems.end(),
                  [](const SystemConfig& s) {
                    return s.regime == ContextRegime::rag;
                  });

  std::set<std::string> known_books;
  for (const Book& b : books) known_books.insert(b.book_id);
  for (const QAItem& item : items) {
    if (!known_books.count(item.book_id)) {
      throw ArtifactError("answer", "qa item " + item.question_id +
                                        " references unknown book " +
                                        item.book_id);
    }
  }

  std::vector<AnswerRecord> all_records;
  for (const Book& book : books) {
    std::vector<QAItem> book_items;
    for (const QAItem& item : items) {
      if (item.book_id == book.book_id) book_items.push_back(item);
    }
    if (book_items.empty()) continue;

    std::optional<Bm25Index> index;
    if (needs_index) {
      const fs::path index_path = manifest_->resolve_artifact(
          "index", "index:" + book.book_id, "answer");
      inputs["index:" + book.book_id] = file_entry(run_dir_, index_path);
      index = Bm25Index::load(index_path.string());
    }

    std::vector<SystemConfig> systems = config_.systems;
    for (SystemConfig& s : systems) {
      s.doc_kind = config_.book_spec(book.book_id).doc_kind;
    }
    auto records = collect_answers(
        systems, book_items, book, index ? &*index : nullptr, *gateway_,
        [this](const std::string& name) -> Backend& { return backend(name); });
    all_records.insert(all_records.end(), records.begin(), records.end());
  }

  std::sort(all_records.begin(), all_records.end(),
            [](const AnswerRecord& a, const AnswerRecord& b) {
              if (a.question_id != b.question_id)
                return a.question_id < b.question_id;
              return a.system_id < b.system_id;
            });
  std::vector<json> rows;
  rows.reserve(all_records.size());
  std::size_t failures = 0;
  for (const AnswerRecord& record : all_records) {
    if (record.status != "ok") ++failures;
    rows.push_back(to_json(record));
  }
  const fs::path out = run_dir_ / "answers.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["answers"] = file_entry(run_dir_, out);
  manifest_->record_stage("answer", inputs, artifacts,
                          json{{"record_count", rows.size()},
                               {"failed", failures}});
}

void Runner::stage_rate_absolute() {
  if (!config_.absolute_rater) {
    throw ConfigError("config has no absolute_rater section");
  }
  const AbsoluteRaterSpec& spec = *config_.absolute_rater;
  const auto books = Loaded::books(*this, "rate-absolute");
  const auto items = Loaded::qa_items(*this, "rate-absolute");
  const auto answers = Loaded::answers(*this, "rate-absolute");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["books"] = file_entry(
      run_dir_, manifest_->resolve_artifact("ingest", "books", "rate-absolute"));
  inputs["qa_items"] = file_entry(
      run_dir_,
      manifest_->resolve_artifact("gen-questions", "qa_items", "rate-absolute"));
  inputs["answers"] = file_entry(
      run_dir_, manifest_->resolve_artifact("answer", "answers", "rate-absolute"));

  std::unordered_map<std::string, const Book*> book_by_id;
  for (const Book& b : books) book_by_id[b.book_id] = &b;
  std::unordered_map<std::string, const QAItem*> item_by_id;
  for (const QAItem& item : items) item_by_id[item.question_id] = &item;

  std::map<std::string, Bm25Index> indexes;
  if (spec.context == "rag") {
    for (const Book& b : books) {
      const fs::path path = manifest_->resolve_artifact(
          "index", "index:" + b.book_id, "rate-absolute");
      inputs["index:" + b.book_id] = file_entry(run_dir_, path);
      indexes.emplace(b.book_id, Bm25Index::load(path.string()));
    }
  }

  RaterRequestOptions options;
  options.rater_id = spec.rater_id;
  options.model_id = spec.model_id;
  options.max_output_tokens = spec.max_output_tokens;
  Backend& be = backend(spec.backend);

  std::vector<AbsoluteVerdictRecord> records;
  std::size_t excluded = 0;
  for (const AnswerRecord& answer : answers) {
    AbsoluteVerdictRecord record;
    record.question_id = answer.question_id;
    record.system_id = answer.system_id;
    record.rater_id = spec.rater_id;
    const QAItem* item = item_by_id.count(answer.question_id)
                             ? item_by_id[answer.question_id]
                             : nullptr;
    if (item == nullptr) {
      record.status = "skipped: unknown question";
      records.push_back(std::move(record));
      continue;
    }
    if (answer.status != "ok") {
      record.status = "skipped: answer status " + answer.status;
      records.push_back(std::move(record));
      continue;
    }
    try {
      if (spec.mode == "ground_truth") {
        if (item->gt_answers.size() != 2) {
          record.status = "skipped: needs exactly two gt answers";
          records.push_back(std::move(record));
          continue;
        }
        record.entailed = rate_ground_truth(
            item->question, {item->gt_answers[0], item->gt_answers[1]},
            answer.answer_text, *gateway_, be, options);
      } else {
        const Book* book = book_by_id.at(item->book_id);
        std::string context;
        if (spec.context == "rag") {
          const Bm25Index& index = indexes.at(item->book_id);
          // Rater retrieval query: the question plus the answer under test.
          context = retrieve(index, item->question + "\n" + answer.answer_text,
                             spec.rag_budget)
                        .text();
          if (context.empty()) context = "(no relevant passages retrieved)";
        } else {
          context = book->body;
        }
        const AbsoluteVerdict verdict =
            rate_absolute(context, item->question, answer.answer_text,
                          *gateway_, be, options);
        record.entailed = verdict.entailed;
        record.evidence = verdict.evidence;
      }
    } catch (const VerdictParseError& e) {
      record.status = std::string("excluded: ") + e.what();
      ++excluded;
    }
    records.push_back(std::move(record));
  }

  std::sort(records.begin(), records.end(),
            [](const AbsoluteVerdictRecord& a, const AbsoluteVerdictRecord& b) {
              if (a.question_id != b.question_id)
                return a.question_id < b.question_id;
              return a.system_id < b.system_id;
            });
  std::vector<json> rows;
  for (const auto& record : records) rows.push_back(to_json(record));
  const fs::path out = run_dir_ / "absolute_verdicts.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["absolute_verdicts"] = file_entry(run_dir_, out);
  manifest_->record_stage("rate-absolute", inputs, artifacts,
                          json{{"verdict_count", rows.size()},
                               {"excluded", excluded},
                               {"mode", spec.mode}});
}

void Runner::stage_rate_sxs() {
  if (!config_.sxs) throw ConfigError("config has no sxs section");
  if (config_.systems.size() < 2) {
    throw ConfigError("side-by-side rating needs at least two systems");
  }
  const SxsSpec& spec = *config_.sxs;
  const auto books = Loaded::books(*this, "rate-sxs");
  const auto items = Loaded::qa_items(*this, "rate-sxs");
  const auto answers = Loaded::answers(*this, "rate-sxs");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["books"] = file_entry(
      run_dir_, manifest_->resolve_artifact("ingest", "books", "rate-sxs"));
  inputs["qa_items"] = file_entry(
      run_dir_, manifest_->resolve_artifact("gen-questions", "qa_items", "rate-sxs"));
  inputs["answers"] = file_entry(
      run_dir_, manifest_->resolve_artifact("answer", "answers", "rate-sxs"));

  std::unordered_map<std::string, const Book*> book_by_id;
  for (const Book& b : books) book_by_id[b.book_id] = &b;
  std::unordered_map<std::string, const QAItem*> item_by_id;
  for (const QAItem& item : items) item_by_id[item.question_id] = &item;
  std::map<std::pair<std::string, std::string>, const AnswerRecord*>
      answer_by_key;
  for (const AnswerRecord& a : answers) {
    answer_by_key[{a.question_id, a.system_id}] = &a;
  }

  std::map<std::string, Bm25Index> indexes;
  if (spec.context == "rag") {
    for (const Book& b : books) {
      const fs::path path = manifest_->resolve_artifact(
          "index", "index:" + b.book_id, "rate-sxs");
      inputs["index:" + b.book_id] = file_entry(run_dir_, path);
      indexes.emplace(b.book_id, Bm25Index::load(path.string()));
    }
  }

  std::vector<std::string> system_ids;
  for (const SystemConfig& s : config_.systems) {
    system_ids.push_back(s.system_id);
  }
  std::vector<std::string> question_ids;
  for (const QAItem& item : items) question_ids.push_back(item.question_id);
  std::sort(question_ids.begin(), question_ids.end());

  const auto tasks =
      schedule_comparisons(system_ids, question_ids, spec.c, config_.seed);

  std::vector<json> rows;
  std::size_t excluded_none = 0, excluded_parse = 0;
  for (const SxsRaterSpec& rater : spec.raters) {
    RaterRequestOptions options;
    options.rater_id = rater.rater_id;
    options.model_id = rater.model_id;
    options.max_output_tokens = rater.max_output_tokens;
    Backend& be = backend(rater.backend);

    for (const ComparisonTask& task : tasks) {
      const QAItem* item = item_by_id.at(task.question_id);
      const AnswerRecord* answer_a =
          answer_by_key.at({task.question_id, task.system_a});
      const AnswerRecord* answer_b =
          answer_by_key.at({task.question_id, task.system_b});

      std::string context;
      if (spec.variant == PairwiseVariant::ground_truth) {
        context = item->gt_answers.empty() ? item->reference_answer
                                           : item->gt_answers.front();
      } else if (spec.context == "rag") {
        const Bm25Index& index = indexes.at(item->book_id);
        // Retrieval query: the question and both answers under comparison.
        context = retrieve(index,
                           item->question + "\n" + answer_a->answer_text +
                               "\n" + answer_b->answer_text,
                           spec.rag_budget)
                      .text();
      } else if (spec.context == "full") {
        context = book_by_id.at(item->book_id)->body;
      }  // "none": empty context section

      try {
        const PairwiseJudgment judgment = rate_pairwise(
            task, context, item->question, answer_a->answer_text,
            answer_b->answer_text, *gateway_, be, spec.variant, options);
        if (judgment.excluded()) ++excluded_none;
        json row = to_json(judgment);
        row["status"] = "ok";
        rows.push_back(std::move(row));
      } catch (const VerdictParseError& e) {
        ++excluded_parse;
        rows.push_back(json{{"question_id", task.question_id},
                            {"system_a", task.system_a},
                            {"system_b", task.system_b},
                            {"swapped", task.swap},
                            {"raw_verdict", nullptr},
                            {"resolved_winner", nullptr},
                            {"evidence", json::array()},
                            {"rater_id", rater.rater_id},
                            {"excluded", true},
                            {"status", std::string("excluded: ") + e.what()}});
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) {
    const auto key = [](const json& j) {
      return std::tuple(j["rater_id"].get<std::string>(),
                        j["system_a"].get<std::string>(),
                        j["system_b"].get<std::string>(),
                        j["question_id"].get<std::string>());
    };
    return key(a) < key(b);
  });
  const fs::path out = run_dir_ / "judgments.jsonl";
  write_jsonl(out.string(), rows);
  artifacts["judgments"] = file_entry(run_dir_, out);
  manifest_->record_stage(
      "rate-sxs", inputs, artifacts,
      json{{"task_count", tasks.size()},
           {"rater_count", spec.raters.size()},
           {"judgment_count", rows.size()},
           {"excluded_none", excluded_none},
           {"excluded_parse", excluded_parse},
           {"c", spec.c}});
}

void Runner::stage_rank() {
  if (!config_.sxs) throw ConfigError("config has no sxs section");
  const fs::path path =
      manifest_->resolve_artifact("rate-sxs", "judgments", "rank");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["judgments"] = file_entry(run_dir_, path);

  const std::string rater_id = config_.sxs->ranking_rater;
  std::vector<PairwiseJudgment> judgments;
  for (const json& row : read_jsonl(path.string())) {
    if (row.value("status", "ok") != "ok") continue;
    if (row["rater_id"].get<std::string>() != rater_id) continue;
    judgments.push_back(judgment_from_json(row));
  }
  if (judgments.empty()) {
    throw ArtifactError("rank", "no usable judgments from rater " + rater_id);
  }

  std::vector<std::string> system_ids;
  for (const SystemConfig& s : config_.systems) {
    system_ids.push_back(s.system_id);
  }

  BootstrapOptions options;
  options.replicates = config_.bootstrap.replicates;
  options.level = config_.bootstrap.level;
  options.seed = config_.seed;
  options.equal_policy = config_.sxs->equal_policy;
  const RankingResult result = bootstrap_ci(system_ids, judgments, options);

  json out_json = to_json(result);
  out_json["rater_id"] = rater_id;
  out_json["equal_policy"] =
      config_.sxs->equal_policy == EqualPolicy::half_win ? "half_win"
                                                         : "exclude";
  out_json["bootstrap"] = {{"replicates", options.replicates},
                           {"level", options.level},
                           {"seed", options.seed}};
  const fs::path out = run_dir_ / "ranking.json";
  write_text_file(out.string(), out_json.dump(2) + "\n");
  artifacts["ranking"] = file_entry(run_dir_, out);
  manifest_->record_stage("rank", inputs, artifacts,
                          json{{"judgments_used", judgments.size()}});
}

void Runner::stage_agreement() {
  if (!config_.sxs || config_.sxs->raters.size() < 2) {
    throw ConfigError("agreement needs two configured sxs raters");
  }
  const fs::path path =
      manifest_->resolve_artifact("rate-sxs", "judgments", "agreement");
  std::map<std::string, Manifest::Entry> inputs, artifacts;
  inputs["judgments"] = file_entry(run_dir_, path);

  const std::string rater1 = config_.sxs->raters[0].rater_id;
  const std::string rater2 = config_.sxs->raters[1].rater_id;

  // Canonical (de-randomized) outcome labels per task.
  const std::vector<std::string> labels = {"a_better", "b_better", "none",
                                           "equal"};
  auto label_of = [](const json& row) -> std::optional<std::size_t> {
    if (row.value("status", "ok") != "ok") return std::nullopt;
    const std::string raw = row["raw_verdict"].get<std::string>();
    if (raw == "None") return 2;
    if (raw == "Equal") return 3;
    const std::string winner = row["resolved_winner"].get<std::string>();
    return winner == row["system_a"].get<std::string>() ? 0 : 1;
  };
  auto task_key = [](const json& row) {
    return std::tuple(row["question_id"].get<std::string>(),
                      row["system_a"].get<std::string>(),
                      row["system_b"].get<std::string>());
  };

  std::map<std::tuple<std::string, std::string, std::string>,
           std::pair<std::optional<std::size_t>, std::optional<std::size_t>>>
      by_task;
  for (const json& row : read_jsonl(path.string())) {
    const std::string rater = row["rater_id"].get<std::string>();
    if (rater != rater1 && rater != rater2) continue;
    auto& slot = by_task[task_key(row)];
    (rater == rater1 ? slot.first : slot.second) = label_of(row);
  }

  std::vector<std::vector<std::size_t>> confusion(
      labels.size(), std::vector<std::size_t>(labels.size(), 0));
  for (const auto& [key, pair] : by_task) {
    if (pair.first && pair.second) ++confusion[*pair.first][*pair.second];
  }
  const AgreementReport report = agreement(confusion, labels);

  json out_json = {{"labels", report.labels},
                   {"confusion", report.confusion},
                   {"total", report.total},
                   {"agreement_rate", report.agreement_rate},
                   {"kappa", report.kappa},
                   {"rater1", rater1},
                   {"rater2", rater2}};
  const fs::path out = run_dir_ / "agreement.json";
  write_text_file(out.string(), out_json.dump(2) + "\n");
  artifacts["agreement"] = file_entry(run_dir_, out);
  manifest_->record_stage("agreement", inputs, artifacts);
}

// stage_report lives in report.cpp.

}  // namespace longeval
