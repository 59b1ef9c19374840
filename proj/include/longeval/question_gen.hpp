#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longeval/corpus.hpp"
#include "longeval/gateway.hpp"
#include "longeval/retrieval.hpp"

namespace longeval {

struct QAItem {
  std::string question_id;
  std::string book_id;
  std::int64_t entity_id = 0;
  std::string question;
  std::string reference_answer;
  // Optional human reference answers for ground-truth rating (two by
  // convention); empty for generated datasets.
  std::vector<std::string> gt_answers;
  struct Provenance {
    std::string model_id;
    std::string prompt_digest;
  } provenance;
};

struct QaPair {
  std::string question;
  std::string answer;
};

struct QaParseResult {
  std::vector<QaPair> pairs;
  std::size_t unpaired_warnings = 0;
};

// Scans for "Question:" lines each followed (possibly after blank lines) by an
// "Answer:" line; unpaired questions are dropped and counted. Throws
// NoQuestionsParsedError when nothing parses.
QaParseResult parse_qa_pairs(std::string_view response_text);

struct QuestionGenOptions {
  std::size_t questions_per_entity = 5;
  std::size_t target_count = 1;
  std::size_t max_output_tokens = 2048;
  double temperature = 0.0;
  std::optional<std::int64_t> seed = 0;
  std::string model_id;
  // When false, each entity's context is the concatenation of the passages
  // containing its mentions instead of the whole book.
  bool full_book_context = true;
  std::size_t passage_target_tokens = 256;
};

struct QuestionGenResult {
  std::vector<QAItem> items;
  bool partial = false;  // entities exhausted before reaching target_count
  std::size_t duplicate_dropped = 0;
  std::size_t entity_mention_dropped = 0;  // violated indirect-reference rule
  std::size_t unpaired_warnings = 0;
};

// Walks entities in rank order, requesting questions_per_entity from the
// backend for each, until target_count items are collected or the entities
// run out. Exact duplicates (normalized whitespace/case) are removed, and
// questions naming the entity's canonical surface verbatim are rejected.
QuestionGenResult generate_dataset(const Book& book,
                                   const std::vector<EntityChain>& ranked_chains,
                                   Gateway& gateway, Backend& backend,
                                   const QuestionGenOptions& options,
                                   const Tokenizer& tokenizer);

}  // namespace longeval
