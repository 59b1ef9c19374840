#include "longeval/tokenizer.hpp"

#include <cctype>

#include "longeval/errors.hpp"

namespace longeval {

namespace {
bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}
bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}
}  // namespace

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::size_t ApproxSubwordTokenizer::count(std::string_view text) const {
  std::size_t pieces = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_alnum(c)) {
      if (!in_word) {
        in_word = true;
        ++pieces;
      }
    } else {
      in_word = false;
      if (!is_space(c)) ++pieces;  // punctuation counts as one piece
    }
  }
  // ceil(pieces * 1.3) in exact integer arithmetic
  return (pieces * 13 + 9) / 10;
}

std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name) {
  if (name == "whitespace") return std::make_shared<WhitespaceTokenizer>();
  if (name == "approx_subword" || name.empty()) {
    return std::make_shared<ApproxSubwordTokenizer>();
  }
  throw ConfigError("unknown tokenizer: " + name);
}

}  // namespace longeval
