// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgtool {

/// Answer normalization used for every EM-style comparison.
///
/// Steps, in order: Unicode lowercase; remove punctuation (ASCII punctuation
/// and every code point in general category P); drop the whole-word articles
/// "a", "an", "the" wherever they occur; collapse whitespace runs to a single
/// space and trim. Punctuation goes before articles so that the function is
/// idempotent ("t.he" must not survive as "the" into a second pass).
/// Invalid UTF-8 bytes are dropped.
std::string normalize_answer(std::string_view text);

/// Splits on ASCII whitespace; no empty tokens.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view text);

/// True when `needle` is non-empty and occurs contiguously in `haystack`.
bool contains_nonempty(std::string_view haystack, std::string_view needle);

}  // namespace kgtool
