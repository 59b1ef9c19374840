#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "longeval/answer_collection.hpp"
#include "longeval/gateway.hpp"
#include "longeval/raters.hpp"
#include "longeval/retrieval.hpp"

namespace longeval {

struct BookSpec {
  std::string book_id;
  std::string path;
  std::string title;
  std::string author;
  std::string annotation_path;  // optional coreference annotation file
  std::string doc_kind = "book";
};

struct BackendSpec {
  std::string name;
  std::string kind;         // "mock" or "http"
  std::string script_path;  // mock rules file
  HttpBackendProfile http;  // used when kind == "http"
};

struct QuestionGenSpec {
  std::string backend;
  std::string model_id;
  std::size_t questions_per_entity = 5;
  std::size_t target_count = 10;
  bool full_book_context = true;
  std::size_t max_output_tokens = 2048;
  // When set, questions are ingested from this jsonl file instead of being
  // generated (e.g. an existing human-curated dataset).
  std::string source_path;
};

struct AbsoluteRaterSpec {
  std::string rater_id;
  std::string backend;
  std::string model_id;
  std::string mode = "entailment";  // or "ground_truth"
  std::string context = "full";     // "full" or "rag"
  std::size_t rag_budget = 4096;
  std::size_t max_output_tokens = 1024;
};

struct SxsRaterSpec {
  std::string rater_id;
  std::string backend;
  std::string model_id;
  std::size_t max_output_tokens = 1024;
};

struct SxsSpec {
  std::size_t c = 200;
  PairwiseVariant variant = PairwiseVariant::book_context;
  EqualPolicy equal_policy = EqualPolicy::half_win;
  std::string context = "full";  // "full", "rag", or "none"
  std::size_t rag_budget = 4096;
  std::vector<SxsRaterSpec> raters;
  std::string ranking_rater;  // defaults to the first rater
};

struct BootstrapSpec {
  std::size_t replicates = 1000;
  double level = 0.95;
};

struct GatewaySpec {
  std::size_t max_in_flight = 1;
  double requests_per_minute = 0.0;  // 0 disables rate limiting
  std::size_t retry_max_attempts = 5;
  std::size_t retry_base_delay_ms = 250;
};

struct Config {
  std::uint64_t seed = 0;
  std::string run_id = "run";
  std::string artifacts_dir = "artifacts";
  std::string cache_dir = "cache";
  std::string tokenizer = "approx_subword";
  std::size_t passage_target_tokens = 256;
  Bm25Params bm25;
  GatewaySpec gateway;
  std::vector<BookSpec> books;
  std::vector<BackendSpec> backends;
  std::optional<QuestionGenSpec> question_gen;
  std::vector<SystemConfig> systems;
  std::optional<AbsoluteRaterSpec> absolute_rater;
  std::optional<SxsSpec> sxs;
  BootstrapSpec bootstrap;

  // Directory of the config file; relative paths resolve against it.
  std::string base_dir = ".";

  const BackendSpec& backend_spec(const std::string& name) const;
  const BookSpec& book_spec(const std::string& book_id) const;
};

struct LoadedConfig {
  Config config;
  std::string digest;  // sha256 of the raw file bytes
};

// Parses and validates a config file. Schema violations raise ConfigError.
LoadedConfig load_config(const std::string& path);
Config parse_config(const nlohmann::json& j, const std::string& base_dir);

}  // namespace longeval
