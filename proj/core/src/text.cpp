// SPDX-License-Identifier: Apache-2.0
#include "kgtool/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <array>
#include <cstdint>

namespace kgtool {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punctuation(UChar32 cp) {
  if (cp < 0x80) {
    // ASCII punctuation per C's ispunct, which also covers symbols like $+<=>^`|~.
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return u_ispunct(cp) != 0;
}

void append_utf8(std::string& out, UChar32 cp) {
  std::array<uint8_t, U8_MAX_LENGTH> buf{};
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf.data(), len, U8_MAX_LENGTH, cp, error);
  if (!error) out.append(reinterpret_cast<const char*>(buf.data()), static_cast<std::size_t>(len));
}

bool is_article(std::string_view token) {
  return token == "a" || token == "an" || token == "the";
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  // Lowercase and strip punctuation in one pass; whitespace becomes ' '.
  std::string stripped;
  stripped.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) continue;
    if (u_isUWhiteSpace(cp)) {
      stripped.push_back(' ');
      continue;
    }
    if (is_punctuation(cp)) continue;
    append_utf8(stripped, u_tolower(cp));
  }

  std::string out;
  out.reserve(stripped.size());
  for (std::string_view token : split_whitespace(stripped)) {
    if (is_article(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_ascii_space(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !is_ascii_space(text[end])) ++end;
    if (end > pos) tokens.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_ascii_space(text[begin])) ++begin;
  while (end > begin && is_ascii_space(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

bool contains_nonempty(std::string_view haystack, std::string_view needle) {
  return !needle.empty() && haystack.find(needle) != std::string_view::npos;
}

}  // namespace kgtool
