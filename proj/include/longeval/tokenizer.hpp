#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace longeval {

// Token counting is pluggable: budgets ("up to 4k tokens") have to be
// enforceable offline without a model-specific tokenizer.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Counts maximal runs of non-whitespace.
class WhitespaceTokenizer : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

// Deterministic approximation of a subword tokenizer: words are maximal
// alphanumeric runs, every other non-space character is its own piece, and
// the piece count is scaled by 13/10 (integer ceiling) to account for words
// splitting into multiple subword units.
class ApproxSubwordTokenizer : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override;
  std::string name() const override { return "approx_subword"; }
};

// Factory for the names accepted in configuration files.
std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name);

}  // namespace longeval
