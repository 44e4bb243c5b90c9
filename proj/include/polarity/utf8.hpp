#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace polarity::utf8 {

struct Decoded {
  char32_t code_point;
  std::size_t length;  // bytes consumed, >= 1
};

// Decodes the code point starting at byte `pos`. Malformed sequences decode
// as U+FFFD consuming one byte, so that every byte belongs to exactly one
// code point.
Decoded decode(std::string_view text, std::size_t pos);

// Byte offsets of every code point boundary, including text.size().
std::vector<std::size_t> boundaries(std::string_view text);

std::size_t length(std::string_view text);

void append(std::string& out, char32_t cp);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_punctuation(char32_t cp);
bool is_combining_mark(char32_t cp);
// Code points that glue onto a preceding emoji (ZWJ, variation selectors,
// skin-tone modifiers, tag characters).
bool is_emoji_extender(char32_t cp);

char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

}  // namespace polarity::utf8
