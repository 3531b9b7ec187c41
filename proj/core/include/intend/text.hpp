#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// UTF-8 and character-folding primitives shared by the tokenizer, the corpus
// validator, and span grounding. All public offsets in this library are
// Unicode scalar-value (codepoint) offsets; these helpers convert between
// codepoint and byte positions of a given UTF-8 string.

namespace intend::text {

struct Codepoint {
  char32_t value = 0;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;  // exclusive
};

// Decodes a UTF-8 string. Invalid bytes are kept as one U+FFFD per byte so
// decoding is total and offsets stay monotone.
std::vector<Codepoint> decode_utf8(std::string_view s);

std::size_t cp_length(std::string_view s);

// Byte range covering codepoints [cp_begin, cp_end). Throws std::out_of_range
// when the range does not fit the string.
std::pair<std::size_t, std::size_t> cp_range_to_bytes(std::string_view s,
                                                      std::size_t cp_begin,
                                                      std::size_t cp_end);

std::string cp_slice(std::string_view s, std::size_t cp_begin, std::size_t cp_end);

// Codepoint index of the codepoint that starts at (or covers) byte_pos.
std::size_t cp_index_at_byte(std::string_view s, std::size_t byte_pos);

std::string encode_utf8(char32_t cp);

// Simple case folding: ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic.
// Full-table Unicode folding would need ICU; this covers the corpus languages.
char32_t fold_case(char32_t cp);

// Maps typographic variants onto ASCII: curly quotes, long dashes, ellipsis,
// exotic spaces. Applied before matching so that transcripts with smart
// punctuation still ground.
char32_t fold_compat(char32_t cp);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

std::string trim(std::string_view s);

// Casefold + compatibility fold + collapse whitespace runs to single spaces.
// Used for substring matching; never for offsets.
std::string fold_for_match(std::string_view s);

// ASCII-case-insensitive search helpers for response scanning.
std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from = 0);
bool contains_icase(std::string_view haystack, std::string_view needle);

// True when the character before pos is not a letter or digit (word start).
bool at_word_start(std::string_view s, std::size_t pos);

}  // namespace intend::text
