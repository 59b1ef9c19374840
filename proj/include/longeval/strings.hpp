#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace longeval::strings {

std::string lower(std::string_view s);
std::string trim(std::string_view s);

// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to);

bool starts_with(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Maximal runs of [A-Za-z0-9], lowercased. The term tokenizer used by the
// retrieval index.
std::vector<std::string> alnum_terms(std::string_view s);

// Collapses internal whitespace runs to single spaces, trims, lowercases.
std::string normalize_ws_lower(std::string_view s);

// Converts \r\n and bare \r to \n.
std::string normalize_newlines(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace longeval::strings
