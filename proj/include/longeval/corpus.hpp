#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "longeval/tokenizer.hpp"

namespace longeval {

struct Book {
  std::string book_id;
  std::string title;
  std::string author;
  std::string body;  // newline-normalized full text
  std::size_t token_count = 0;
};

struct Mention {
  std::string surface;
  // Character offsets into the recovered plain narrative, [start, end).
  std::size_t start = 0;
  std::size_t end = 0;
};

struct EntityChain {
  std::int64_t entity_id = 0;
  std::vector<Mention> mentions;  // document order
  std::size_t frequency = 0;      // == mentions.size()

  // The surface form occurring most often in the chain; ties go to the
  // surface seen first in document order.
  const std::string& canonical_surface() const;
};

struct Passage {
  std::string book_id;
  std::size_t ordinal = 0;  // 0-based position in book order
  std::size_t start = 0;    // character span into the book body
  std::size_t end = 0;
  std::string text;
  std::size_t token_count = 0;
};

struct CorefParse {
  std::vector<EntityChain> chains;  // ascending entity_id
  std::string plain_text;           // annotation with mention markup removed
};

Book make_book(std::string book_id, std::string title, std::string author,
               std::string raw_text, const Tokenizer& tokenizer);

// Reads a UTF-8 text file.
Book ingest_book_file(const std::string& path, std::string book_id,
                      std::string title, std::string author,
                      const Tokenizer& tokenizer);

// Parses coreference annotation where mentions appear as "[<id> <surface>]"
// (decimal id, single space, non-nested brackets) and everything else is
// literal narrative.
CorefParse parse_coref_annotation(std::string_view annotated_text);

// The plain narrative with all mention markup removed.
std::string strip_coref_annotation(std::string_view annotated_text);

// Descending frequency, ties broken by ascending entity_id.
std::vector<EntityChain> rank_entities(std::vector<EntityChain> chains);

// Greedy paragraph packing: whole paragraphs are accumulated until adding the
// next would exceed target_tokens; an oversized paragraph becomes its own
// passage. Passages tile the body exactly.
std::vector<Passage> segment_passages(const Book& book,
                                      std::size_t target_tokens,
                                      const Tokenizer& tokenizer);

}  // namespace longeval
