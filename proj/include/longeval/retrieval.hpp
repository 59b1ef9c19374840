#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "longeval/corpus.hpp"

namespace longeval {

struct Posting {
  std::size_t ordinal = 0;  // passage ordinal
  std::size_t tf = 0;       // term frequency within that passage
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Inverted index over the passages of one book. Immutable after build;
// concurrent readers are safe.
class Bm25Index {
 public:
  static Bm25Index build(std::vector<Passage> passages,
                         Bm25Params params = {});

  double score(const std::vector<std::string>& query_terms,
               std::size_t ordinal) const;
  double score(std::string_view query, std::size_t ordinal) const;

  std::size_t passage_count() const { return passages_.size(); }
  const std::vector<Passage>& passages() const { return passages_; }
  const Passage& passage(std::size_t ordinal) const {
    return passages_.at(ordinal);
  }
  const Bm25Params& params() const { return params_; }
  double avg_doc_length() const { return avg_doc_length_; }
  std::size_t doc_length(std::size_t ordinal) const {
    return doc_lengths_.at(ordinal);
  }
  const std::vector<Posting>* postings(const std::string& term) const;

  // Canonical binary layout; save -> load -> save is byte identical.
  void save(const std::string& path) const;
  static Bm25Index load(const std::string& path);

 private:
  Bm25Index() = default;
  void finalize();

  std::vector<Passage> passages_;
  std::vector<std::size_t> doc_lengths_;  // index-term counts per passage
  std::map<std::string, std::vector<Posting>> postings_;
  double avg_doc_length_ = 0.0;
  Bm25Params params_;
};

struct ContextBundle {
  std::vector<Passage> passages;  // ordinals strictly increasing
  std::size_t total_tokens = 0;
  std::size_t budget = 0;

  // Passage texts joined in book order.
  std::string text() const;
};

// Ranks positively scoring passages (descending score, ties by ascending
// ordinal), greedily packs them into the token budget skipping any passage
// that does not fit, then restores book order.
ContextBundle retrieve(const Bm25Index& index, std::string_view query,
                       std::size_t budget_tokens);

}  // namespace longeval
