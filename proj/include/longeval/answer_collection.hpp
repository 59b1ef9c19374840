#pragma once

#include <optional>
#include <string>
#include <vector>

#include "longeval/corpus.hpp"
#include "longeval/gateway.hpp"
#include "longeval/question_gen.hpp"
#include "longeval/retrieval.hpp"

namespace longeval {

enum class ContextRegime { no_context, rag, full_context };
enum class AnswerStyle { five_sentence, one_sentence };

std::string regime_name(ContextRegime regime);
ContextRegime regime_from_name(const std::string& name);
std::string answer_style_name(AnswerStyle style);
AnswerStyle answer_style_from_name(const std::string& name);

struct SystemConfig {
  std::string system_id;
  std::string backend;  // gateway profile name
  ContextRegime regime = ContextRegime::no_context;
  std::size_t rag_budget = 4096;  // used when regime == rag
  AnswerStyle answer_style = AnswerStyle::five_sentence;
  std::string model_id;
  std::size_t max_output_tokens = 1024;
  double temperature = 0.0;
  std::optional<std::int64_t> seed = 0;
  // "book" or "movie script"; only the one-sentence no-context prompt uses it.
  std::string doc_kind = "book";
};

struct AnswerRecord {
  std::string question_id;
  std::string system_id;
  std::string answer_text;  // kept even when empty
  std::string prompt_digest;
  std::size_t context_token_count = 0;
  std::string status = "ok";  // "ok" or "error: ..."
};

// Renders the answering prompt for the system's regime and style. rag
// requires a bundle; full_context requires the book body.
std::string build_answer_prompt(const SystemConfig& config,
                                const std::string& question, const Book& book,
                                const std::optional<ContextBundle>& bundle);

// One record per (system, question), sorted by (question_id, system_id).
// Backend failures are recorded in the record status, never thrown.
std::vector<AnswerRecord> collect_answers(
    const std::vector<SystemConfig>& systems,
    const std::vector<QAItem>& qa_items, const Book& book,
    const Bm25Index* index, Gateway& gateway,
    const std::function<Backend&(const std::string&)>& backend_for);

}  // namespace longeval
