#include "intend/text.hpp"

#include <cctype>
#include <stdexcept>

namespace intend::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at byte i; returns bytes consumed (>= 1).
std::size_t decode_one(std::string_view s, std::size_t i, char32_t& out) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    out = kReplacement;
    return 1;
  }
  if (i + len > s.size()) {
    out = kReplacement;
    return 1;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      out = kReplacement;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings and surrogates.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
      cp > 0x10FFFF) {
    out = kReplacement;
    return 1;
  }
  out = cp;
  return len;
}

}  // namespace

std::vector<Codepoint> decode_utf8(std::string_view s) {
  std::vector<Codepoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = 0;
    const std::size_t n = decode_one(s, i, cp);
    out.push_back({cp, i, i + n});
    i += n;
  }
  return out;
}

std::size_t cp_length(std::string_view s) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = 0;
    i += decode_one(s, i, cp);
    ++count;
  }
  return count;
}

std::pair<std::size_t, std::size_t> cp_range_to_bytes(std::string_view s,
                                                      std::size_t cp_begin,
                                                      std::size_t cp_end) {
  if (cp_begin > cp_end) throw std::out_of_range("cp_range_to_bytes: begin > end");
  std::size_t idx = 0;
  std::size_t i = 0;
  std::size_t byte_begin = s.size();
  if (cp_begin == 0) byte_begin = 0;
  while (i < s.size() && idx < cp_end) {
    char32_t cp = 0;
    i += decode_one(s, i, cp);
    ++idx;
    if (idx == cp_begin) byte_begin = i;
  }
  if (idx < cp_end) throw std::out_of_range("cp_range_to_bytes: range past end of text");
  return {byte_begin, i};
}

std::string cp_slice(std::string_view s, std::size_t cp_begin, std::size_t cp_end) {
  const auto [b, e] = cp_range_to_bytes(s, cp_begin, cp_end);
  return std::string(s.substr(b, e - b));
}

std::size_t cp_index_at_byte(std::string_view s, std::size_t byte_pos) {
  std::size_t idx = 0;
  std::size_t i = 0;
  while (i < s.size() && i < byte_pos) {
    char32_t cp = 0;
    i += decode_one(s, i, cp);
    ++idx;
  }
  return idx;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

char32_t fold_case(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  // Latin-1 supplement uppercase, minus the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  // Latin Extended-A: mostly alternating upper/lower pairs.
  if (cp >= 0x100 && cp <= 0x137 && (cp % 2) == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && (cp % 2) == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E && (cp % 2) == 1) return cp + 1;
  if (cp == 0x17F) return U's';  // long s
  // Greek.
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp == 0x3C2) return 0x3C3;  // final sigma
  // Cyrillic.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

char32_t fold_compat(char32_t cp) {
  switch (cp) {
    case 0x2018:  // left single quote
    case 0x2019:  // right single quote
    case 0x201A:
    case 0x201B:
    case 0x2032:
      return U'\'';
    case 0x201C:  // left double quote
    case 0x201D:  // right double quote
    case 0x201E:
    case 0x201F:
    case 0x2033:
      return U'"';
    case 0x2010:
    case 0x2011:
    case 0x2012:
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2015:
    case 0x2212:  // minus sign
      return U'-';
    case 0x00A0:  // no-break space
    case 0x2007:
    case 0x202F:
    case 0x3000:
      return U' ';
    default:
      return cp;
  }
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U'\t':
    case U'\n':
    case 0x0B:
    case 0x0C:
    case U'\r':
    case U' ':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return std::ispunct(static_cast<unsigned char>(cp)) != 0;
  }
  switch (cp) {
    case 0xA1:    // inverted exclamation
    case 0xAB:    // left guillemet
    case 0xB7:    // middle dot
    case 0xBB:    // right guillemet
    case 0xBF:    // inverted question mark
    case 0x2022:  // bullet
    case 0x2026:  // ellipsis
    case 0x2039:
    case 0x203A:
      return true;
    default:
      // General punctuation block: quotes and dashes (compat-folded anyway).
      return cp >= 0x2010 && cp <= 0x201F;
  }
}

std::string trim(std::string_view s) {
  const auto cps = decode_utf8(s);
  std::size_t first = 0;
  std::size_t last = cps.size();
  while (first < last && is_space(cps[first].value)) ++first;
  while (last > first && is_space(cps[last - 1].value)) --last;
  if (first >= last) return {};
  return std::string(s.substr(cps[first].byte_begin, cps[last - 1].byte_end - cps[first].byte_begin));
}

std::string fold_for_match(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  bool any = false;
  for (const auto& c : decode_utf8(s)) {
    const char32_t folded = fold_compat(fold_case(c.value));
    if (is_space(folded)) {
      pending_space = any;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out += encode_utf8(folded);
    any = true;
  }
  return out;
}

namespace {
char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
}
}  // namespace

std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() &&
           ascii_lower(haystack[i + k]) == ascii_lower(needle[k])) {
      ++k;
    }
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  return find_icase(haystack, needle) != std::string_view::npos;
}

bool at_word_start(std::string_view s, std::size_t pos) {
  if (pos == 0) return true;
  const auto prev = static_cast<unsigned char>(s[pos - 1]);
  return std::isalnum(prev) == 0;
}

}  // namespace intend::text
