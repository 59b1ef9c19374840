#include "longeval/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"

namespace longeval {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Wraps json access so schema violations surface as ConfigError.
template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing config field: " + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad config field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad config field '" + key + "': " + e.what());
  }
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).string();
}

PairwiseVariant variant_from_name(const std::string& name) {
  if (name == "book_context") return PairwiseVariant::book_context;
  if (name == "narrativeqa") return PairwiseVariant::narrativeqa;
  if (name == "ground_truth") return PairwiseVariant::ground_truth;
  throw ConfigError("unknown side-by-side variant: " + name);
}

EqualPolicy equal_policy_from_name(const std::string& name) {
  if (name == "half_win") return EqualPolicy::half_win;
  if (name == "exclude") return EqualPolicy::exclude;
  throw ConfigError("unknown equal policy: " + name);
}

}  // namespace

const BackendSpec& Config::backend_spec(const std::string& name) const {
  for (const BackendSpec& b : backends) {
    if (b.name == name) return b;
  }
  throw ConfigError("backend not declared: " + name);
}

const BookSpec& Config::book_spec(const std::string& book_id) const {
  for (const BookSpec& b : books) {
    if (b.book_id == book_id) return b;
  }
  throw ConfigError("book not declared: " + book_id);
}

Config parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  Config config;
  config.base_dir = base_dir;
  config.seed = get_or<std::uint64_t>(j, "seed", 0);
  config.run_id = get_or<std::string>(j, "run_id", "run");
  config.artifacts_dir =
      resolve(base_dir, get_or<std::string>(j, "artifacts_dir", "artifacts"));
  config.cache_dir =
      resolve(base_dir, get_or<std::string>(j, "cache_dir", "cache"));
  config.tokenizer = get_or<std::string>(j, "tokenizer", "approx_subword");
  config.passage_target_tokens =
      get_or<std::size_t>(j, "passage_target_tokens", 256);
  if (config.passage_target_tokens == 0) {
    throw ConfigError("passage_target_tokens must be positive");
  }
  if (j.contains("bm25")) {
    config.bm25.k1 = get_or<double>(j["bm25"], "k1", 1.2);
    config.bm25.b = get_or<double>(j["bm25"], "b", 0.75);
  }
  if (j.contains("gateway")) {
    const json& g = j["gateway"];
    config.gateway.max_in_flight = get_or<std::size_t>(g, "max_in_flight", 1);
    config.gateway.requests_per_minute =
        get_or<double>(g, "requests_per_minute", 0.0);
    config.gateway.retry_max_attempts =
        get_or<std::size_t>(g, "retry_max_attempts", 5);
    config.gateway.retry_base_delay_ms =
        get_or<std::size_t>(g, "retry_base_delay_ms", 250);
  }

  std::set<std::string> book_ids;
  for (const json& b : get_or<json>(j, "books", json::array())) {
    BookSpec spec;
    spec.book_id = require<std::string>(b, "book_id");
    spec.path = resolve(base_dir, require<std::string>(b, "path"));
    spec.title = get_or<std::string>(b, "title", spec.book_id);
    spec.author = get_or<std::string>(b, "author", "");
    spec.annotation_path =
        resolve(base_dir, get_or<std::string>(b, "annotation_path", ""));
    spec.doc_kind = get_or<std::string>(b, "doc_kind", "book");
    if (!book_ids.insert(spec.book_id).second) {
      throw ConfigError("duplicate book_id: " + spec.book_id);
    }
    config.books.push_back(std::move(spec));
  }

  std::set<std::string> backend_names;
  for (const json& b : get_or<json>(j, "backends", json::array())) {
    BackendSpec spec;
    spec.name = require<std::string>(b, "name");
    spec.kind = require<std::string>(b, "kind");
    if (!backend_names.insert(spec.name).second) {
      throw ConfigError("duplicate backend name: " + spec.name);
    }
    if (spec.kind == "mock") {
      spec.script_path =
          resolve(base_dir, get_or<std::string>(b, "script_path", ""));
    } else if (spec.kind == "http") {
      spec.http.name = spec.name;
      spec.http.base_url = require<std::string>(b, "base_url");
      spec.http.path =
          get_or<std::string>(b, "path", "/v1/chat/completions");
      spec.http.model_id = get_or<std::string>(b, "model", "");
      spec.http.auth_env = get_or<std::string>(b, "auth_env", "");
      spec.http.auth_header =
          get_or<std::string>(b, "auth_header", "Authorization");
      spec.http.auth_prefix = get_or<std::string>(b, "auth_prefix", "Bearer ");
      spec.http.text_pointer = get_or<std::string>(
          b, "text_pointer", "/choices/0/message/content");
      spec.http.finish_pointer =
          get_or<std::string>(b, "finish_pointer", "/choices/0/finish_reason");
      spec.http.input_tokens_pointer = get_or<std::string>(
          b, "input_tokens_pointer", "/usage/prompt_tokens");
      spec.http.output_tokens_pointer = get_or<std::string>(
          b, "output_tokens_pointer", "/usage/completion_tokens");
      spec.http.payload_style = get_or<std::string>(b, "payload_style", "chat");
      spec.http.timeout_seconds = get_or<int>(b, "timeout_seconds", 120);
    } else {
      throw ConfigError("unknown backend kind: " + spec.kind);
    }
    config.backends.push_back(std::move(spec));
  }

  if (j.contains("question_gen")) {
    const json& q = j["question_gen"];
    QuestionGenSpec spec;
    spec.source_path = resolve(base_dir, get_or<std::string>(q, "source_path", ""));
    if (spec.source_path.empty()) {
      spec.backend = require<std::string>(q, "backend");
    } else {
      spec.backend = get_or<std::string>(q, "backend", "");
    }
    spec.model_id = get_or<std::string>(q, "model_id", "");
    spec.questions_per_entity =
        get_or<std::size_t>(q, "questions_per_entity", 5);
    spec.target_count = get_or<std::size_t>(q, "target_count", 10);
    const std::string context =
        get_or<std::string>(q, "context", "full_book");
    if (context == "full_book") {
      spec.full_book_context = true;
    } else if (context == "entity_passages") {
      spec.full_book_context = false;
    } else {
      throw ConfigError("unknown question_gen context: " + context);
    }
    spec.max_output_tokens = get_or<std::size_t>(q, "max_output_tokens", 2048);
    config.question_gen = std::move(spec);
  }

  std::set<std::string> system_ids;
  for (const json& s : get_or<json>(j, "systems", json::array())) {
    SystemConfig system;
    system.system_id = require<std::string>(s, "system_id");
    if (!system_ids.insert(system.system_id).second) {
      throw ConfigError("duplicate system_id: " + system.system_id);
    }
    system.backend = require<std::string>(s, "backend");
    system.regime = regime_from_name(require<std::string>(s, "regime"));
    system.rag_budget = get_or<std::size_t>(s, "budget", 4096);
    if (system.regime == ContextRegime::rag && system.rag_budget == 0) {
      throw ConfigError("rag budget must be at least 1 for system " +
                        system.system_id);
    }
    system.answer_style = answer_style_from_name(
        get_or<std::string>(s, "answer_style", "five_sentence"));
    system.model_id = get_or<std::string>(s, "model_id", "");
    system.max_output_tokens = get_or<std::size_t>(s, "max_output_tokens", 1024);
    system.temperature = get_or<double>(s, "temperature", 0.0);
    config.systems.push_back(std::move(system));
  }

  if (j.contains("absolute_rater")) {
    const json& r = j["absolute_rater"];
    AbsoluteRaterSpec spec;
    spec.rater_id = get_or<std::string>(r, "rater_id", "absolute");
    spec.backend = require<std::string>(r, "backend");
    spec.model_id = get_or<std::string>(r, "model_id", "");
    spec.mode = get_or<std::string>(r, "mode", "entailment");
    if (spec.mode != "entailment" && spec.mode != "ground_truth") {
      throw ConfigError("unknown absolute rater mode: " + spec.mode);
    }
    spec.context = get_or<std::string>(r, "context", "full");
    if (spec.context != "full" && spec.context != "rag") {
      throw ConfigError("unknown absolute rater context: " + spec.context);
    }
    spec.rag_budget = get_or<std::size_t>(r, "rag_budget", 4096);
    spec.max_output_tokens = get_or<std::size_t>(r, "max_output_tokens", 1024);
    config.absolute_rater = std::move(spec);
  }

  if (j.contains("sxs")) {
    const json& s = j["sxs"];
    SxsSpec spec;
    spec.c = require<std::size_t>(s, "c");
    spec.variant =
        variant_from_name(get_or<std::string>(s, "variant", "book_context"));
    spec.equal_policy = equal_policy_from_name(
        get_or<std::string>(s, "equal_policy", "half_win"));
    spec.context = get_or<std::string>(s, "context", "full");
    if (spec.context != "full" && spec.context != "rag" &&
        spec.context != "none") {
      throw ConfigError("unknown sxs context: " + spec.context);
    }
    spec.rag_budget = get_or<std::size_t>(s, "rag_budget", 4096);
    for (const json& r : get_or<json>(s, "raters", json::array())) {
      SxsRaterSpec rater;
      rater.rater_id = require<std::string>(r, "rater_id");
      rater.backend = require<std::string>(r, "backend");
      rater.model_id = get_or<std::string>(r, "model_id", "");
      rater.max_output_tokens = get_or<std::size_t>(r, "max_output_tokens", 1024);
      spec.raters.push_back(std::move(rater));
    }
    if (spec.raters.empty()) {
      throw ConfigError("sxs requires at least one rater");
    }
    spec.ranking_rater =
        get_or<std::string>(s, "ranking_rater", spec.raters.front().rater_id);
    config.sxs = std::move(spec);
  }

  if (j.contains("bootstrap")) {
    const json& b = j["bootstrap"];
    config.bootstrap.replicates = get_or<std::size_t>(b, "replicates", 1000);
    config.bootstrap.level = get_or<double>(b, "level", 0.95);
    if (config.bootstrap.replicates == 0) {
      throw ConfigError("bootstrap replicates must be at least 1");
    }
    if (config.bootstrap.level <= 0.0 || config.bootstrap.level >= 1.0) {
      throw ConfigError("bootstrap level must be in (0, 1)");
    }
  }

  // Cross references.
  for (const SystemConfig& s : config.systems) config.backend_spec(s.backend);
  if (config.question_gen && !config.question_gen->backend.empty()) {
    config.backend_spec(config.question_gen->backend);
  }
  if (config.absolute_rater) config.backend_spec(config.absolute_rater->backend);
  if (config.sxs) {
    for (const SxsRaterSpec& r : config.sxs->raters) {
      config.backend_spec(r.backend);
    }
    bool found = false;
    for (const SxsRaterSpec& r : config.sxs->raters) {
      found = found || r.rater_id == config.sxs->ranking_rater;
    }
    if (!found) {
      throw ConfigError("ranking_rater is not a declared sxs rater: " +
                        config.sxs->ranking_rater);
    }
  }
  return config;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string raw = buf.str();
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  LoadedConfig loaded;
  loaded.digest = digest::sha256_hex(raw);
  loaded.config =
      parse_config(j, fs::path(path).parent_path().string().empty()
                          ? "."
                          : fs::path(path).parent_path().string());
  return loaded;
}

}  // namespace longeval
