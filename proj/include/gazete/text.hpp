// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gazete::text {

// Minimal UTF-8 codec. Invalid bytes are passed through as single code points
// in the 0xDC80..0xDCFF range so that decode/encode round-trips raw input.
std::vector<char32_t> utf8_decode(std::string_view s);
void utf8_append(std::string& out, char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

// Turkish-aware lowercasing: İ (U+0130) -> i, ASCII I -> ı (U+0131), plus the
// usual ASCII range and the Turkish alphabet (Ç Ğ Ö Ş Ü and circumflexed
// loanword vowels). Other code points are left untouched.
std::string turkish_lowercase(std::string_view s);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

// Replaces punctuation code points with a single space.
std::string strip_punctuation(std::string_view s);

// Collapses whitespace runs (including NBSP and zero-width marks) to single
// spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);

// Splits on ASCII spaces; callers normalize first.
std::vector<std::string> split_words(std::string_view s);

std::size_t count_words(std::string_view s);

}  // namespace gazete::text
