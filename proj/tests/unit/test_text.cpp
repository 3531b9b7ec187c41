#include <doctest.h>

#include <stdexcept>

#include "intend/text.hpp"

using namespace intend;

TEST_CASE("codepoint length counts scalar values, not bytes") {
  CHECK(text::cp_length("") == 0);
  CHECK(text::cp_length("abc") == 3);
  CHECK(text::cp_length("café") == 4);
  CHECK(text::cp_length("Волга") == 5);
  CHECK(text::cp_length("a🎒b") == 3);
}

TEST_CASE("cp_slice slices by codepoint offsets") {
  CHECK(text::cp_slice("café au lait", 0, 4) == "café");
  CHECK(text::cp_slice("a🎒b", 1, 2) == "🎒");
  CHECK(text::cp_slice("Волга", 2, 5) == "лга");
  CHECK_THROWS_AS(text::cp_slice("abc", 1, 5), std::out_of_range);
  CHECK_THROWS_AS(text::cp_slice("abc", 3, 2), std::out_of_range);
}

TEST_CASE("cp_index_at_byte inverts byte positions") {
  const std::string s = "a🎒b";
  const auto pos = s.find("b");
  CHECK(text::cp_index_at_byte(s, pos) == 2);
  CHECK(text::cp_index_at_byte(s, 0) == 0);
}

TEST_CASE("invalid utf-8 decodes without throwing") {
  const std::string junk = "ab\xff\xfe\xc3";
  CHECK(text::cp_length(junk) == 5);
  const auto cps = text::decode_utf8(junk);
  CHECK(cps.size() == 5);
  CHECK(cps[2].value == 0xFFFD);
}

TEST_CASE("fold_for_match folds case, quotes, and whitespace runs") {
  CHECK(text::fold_for_match("He’s  GONE\n now") == "he's gone now");
  CHECK(text::fold_for_match("“Quoted”") == "\"quoted\"");
  CHECK(text::fold_for_match("  CAFÉ  ") == "café");
  CHECK(text::fold_for_match("ВОЛГА") == "волга");
  CHECK(text::fold_for_match("") == "");
}

TEST_CASE("trim strips unicode whitespace") {
  CHECK(text::trim("  x  ") == "x");
  CHECK(text::trim(" x ") == "x");
  CHECK(text::trim("   ") == "");
  CHECK(text::trim("") == "");
}

TEST_CASE("case-insensitive search and word starts") {
  CHECK(text::find_icase("Hello World", "world") == 6);
  CHECK(text::find_icase("abc", "zzz") == std::string_view::npos);
  CHECK(text::contains_icase("No Conflict Detected.", "no conflict detected"));
  CHECK(text::at_word_start("foo bar", 4));
  CHECK_FALSE(text::at_word_start("foobar", 3));
  CHECK(text::at_word_start("x", 0));
}
