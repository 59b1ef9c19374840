#include "longeval/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "longeval/errors.hpp"
#include "longeval/strings.hpp"

namespace longeval {

namespace {
bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}
}  // namespace

const std::string& EntityChain::canonical_surface() const {
  if (mentions.empty()) {
    static const std::string kEmpty;
    return kEmpty;
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const Mention& m : mentions) ++counts[m.surface];
  const Mention* best = &mentions.front();
  std::size_t best_count = counts[best->surface];
  for (const Mention& m : mentions) {
    std::size_t c = counts[m.surface];
    if (c > best_count) {  // ties keep the earlier mention
      best = &m;
      best_count = c;
    }
  }
  return best->surface;
}

Book make_book(std::string book_id, std::string title, std::string author,
               std::string raw_text, const Tokenizer& tokenizer) {
  Book book;
  book.book_id = std::move(book_id);
  book.title = std::move(title);
  book.author = std::move(author);
  book.body = strings::normalize_newlines(raw_text);
  if (book.body.empty()) throw EmptyBookError();
  book.token_count = tokenizer.count(book.body);
  return book;
}

Book ingest_book_file(const std::string& path, std::string book_id,
                      std::string title, std::string author,
                      const Tokenizer& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read book file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return make_book(std::move(book_id), std::move(title), std::move(author),
                   buf.str(), tokenizer);
}

CorefParse parse_coref_annotation(std::string_view text) {
  CorefParse out;
  out.plain_text.reserve(text.size());
  std::map<std::int64_t, EntityChain> by_id;

  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '[') {
      out.plain_text.push_back(c);
      ++i;
      continue;
    }
    const std::size_t open = i;
    ++i;
    std::size_t digits_begin = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    if (i == digits_begin) {
      throw ParseError("mention bracket is missing its entity id", open);
    }
    if (i >= text.size() || text[i] != ' ') {
      throw ParseError("expected a space after the entity id", open);
    }
    std::int64_t id = 0;
    for (std::size_t d = digits_begin; d < i; ++d) id = id * 10 + (text[d] - '0');
    ++i;  // consume the space
    const std::size_t surface_begin = i;
    while (i < text.size() && text[i] != ']' && text[i] != '[') ++i;
    if (i >= text.size()) {
      throw ParseError("unclosed mention bracket", open);
    }
    if (text[i] == '[') {
      throw ParseError("nested mention bracket", i);
    }
    if (i == surface_begin) {
      throw ParseError("empty mention surface", open);
    }
    Mention mention;
    mention.surface = std::string(text.substr(surface_begin, i - surface_begin));
    mention.start = out.plain_text.size();
    out.plain_text.append(mention.surface);
    mention.end = out.plain_text.size();
    ++i;  // consume ']'

    EntityChain& chain = by_id[id];
    chain.entity_id = id;
    chain.mentions.push_back(std::move(mention));
    chain.frequency = chain.mentions.size();
  }

  out.chains.reserve(by_id.size());
  for (auto& [id, chain] : by_id) out.chains.push_back(std::move(chain));
  return out;
}

std::string strip_coref_annotation(std::string_view text) {
  return parse_coref_annotation(text).plain_text;
}

std::vector<EntityChain> rank_entities(std::vector<EntityChain> chains) {
  std::stable_sort(chains.begin(), chains.end(),
                   [](const EntityChain& a, const EntityChain& b) {
                     if (a.frequency != b.frequency) {
                       return a.frequency > b.frequency;
                     }
                     return a.entity_id < b.entity_id;
                   });
  return chains;
}

std::vector<Passage> segment_passages(const Book& book,
                                      std::size_t target_tokens,
                                      const Tokenizer& tokenizer) {
  if (target_tokens == 0) {
    throw Error("segment_passages: target_tokens must be positive");
  }
  const std::string& body = book.body;

  // A paragraph chunk runs up to and including the blank-line separator that
  // follows it, so that concatenating chunks reproduces the body exactly.
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = pos;
    while (true) {
      nl = body.find('\n', nl);
      if (nl == std::string::npos) {
        chunks.emplace_back(pos, body.size());
        pos = body.size();
        break;
      }
      std::size_t run_end = nl;
      while (run_end < body.size() && body[run_end] == '\n') ++run_end;
      if (run_end - nl >= 2 || run_end == body.size()) {
        chunks.emplace_back(pos, run_end);
        pos = run_end;
        break;
      }
      nl = run_end;  // single newline inside a paragraph
    }
  }

  std::vector<Passage> passages;
  std::size_t cur_start = 0, cur_end = 0, cur_tokens = 0;
  bool open = false;
  auto flush = [&]() {
    if (!open) return;
    Passage p;
    p.book_id = book.book_id;
    p.ordinal = passages.size();
    p.start = cur_start;
    p.end = cur_end;
    p.text = body.substr(cur_start, cur_end - cur_start);
    p.token_count = cur_tokens;
    passages.push_back(std::move(p));
    open = false;
  };

  for (const auto& [begin, end] : chunks) {
    const std::size_t tokens =
        tokenizer.count(std::string_view(body).substr(begin, end - begin));
    if (open && cur_tokens + tokens > target_tokens) flush();
    if (!open) {
      cur_start = begin;
      cur_tokens = 0;
      open = true;
    }
    cur_end = end;
    cur_tokens += tokens;
    if (cur_tokens >= target_tokens) flush();
  }
  flush();
  return passages;
}

}  // namespace longeval
