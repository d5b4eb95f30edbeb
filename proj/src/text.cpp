// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/text.hpp"

#include <array>

namespace gazete::text {

namespace {

constexpr char32_t kInvalidBase = 0xDC80;

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
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
      out.push_back(kInvalidBase + (b0 & 0x7F));
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(kInvalidBase + (b0 & 0x7F));
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if (!is_continuation(bk)) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok) {
      out.push_back(kInvalidBase + (b0 & 0x7F));
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp >= kInvalidBase && cp <= kInvalidBase + 0x7F) {
    out.push_back(static_cast<char>((cp - kInvalidBase) | 0x80));
    return;
  }
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
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (const char32_t cp : cps) utf8_append(out, cp);
  return out;
}

std::string turkish_lowercase(std::string_view s) {
  const auto cps = utf8_decode(s);
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : cps) {
    switch (cp) {
      case U'I': cp = 0x0131; break;   // I -> ı
      case 0x0130: cp = U'i'; break;   // İ -> i
      case 0x00C7: cp = 0x00E7; break; // Ç -> ç
      case 0x011E: cp = 0x011F; break; // Ğ -> ğ
      case 0x00D6: cp = 0x00F6; break; // Ö -> ö
      case 0x015E: cp = 0x015F; break; // Ş -> ş
      case 0x00DC: cp = 0x00FC; break; // Ü -> ü
      case 0x00C2: cp = 0x00E2; break; // Â -> â
      case 0x00CE: cp = 0x00EE; break; // Î -> î
      case 0x00DB: cp = 0x00FB; break; // Û -> û
      default:
        if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
        break;
    }
    utf8_append(out, cp);
  }
  return out;
}

bool is_whitespace(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x00A0:  // NBSP, common in scraped news
    case 0x202F:  // narrow NBSP
    case 0x200B:  // zero-width space
    case 0xFEFF:  // BOM / zero-width no-break
      return true;
    default:
      return false;
  }
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'!' && cp <= U'/') || (cp >= U':' && cp <= U'@') ||
           (cp >= U'[' && cp <= U'`') || (cp >= U'{' && cp <= U'~');
  }
  switch (cp) {
    case 0x00AB: case 0x00BB:              // « »
    case 0x2018: case 0x2019: case 0x201A: // ‘ ’ ‚
    case 0x201C: case 0x201D: case 0x201E: // “ ” „
    case 0x2010: case 0x2011: case 0x2012:
    case 0x2013: case 0x2014: case 0x2015: // dashes
    case 0x2026:                           // …
    case 0x2022: case 0x00B7:              // • ·
    case 0x2032: case 0x2033:              // ′ ″
    case 0x00A1: case 0x00BF:              // ¡ ¿
      return true;
    default:
      return false;
  }
}

std::string strip_punctuation(std::string_view s) {
  const auto cps = utf8_decode(s);
  std::string out;
  out.reserve(s.size());
  for (const char32_t cp : cps) {
    if (is_punctuation(cp)) {
      out.push_back(' ');
    } else {
      utf8_append(out, cp);
    }
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  const auto cps = utf8_decode(s);
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  bool seen_any = false;
  for (const char32_t cp : cps) {
    if (is_whitespace(cp)) {
      pending_space = seen_any;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8_append(out, cp);
    seen_any = true;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < s.size()) {
    while (start < s.size() && s[start] == ' ') ++start;
    if (start >= s.size()) break;
    std::size_t end = start;
    while (end < s.size() && s[end] != ' ') ++end;
    words.emplace_back(s.substr(start, end - start));
    start = end;
  }
  return words;
}

std::size_t count_words(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (const char c : s) {
    const bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v');
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

}  // namespace gazete::text
