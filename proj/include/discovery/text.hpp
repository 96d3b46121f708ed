#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace discovery {

// Decodes UTF-8 into code points. Invalid bytes decode to themselves so that
// distance computations never fail on arbitrary model output.
std::u32string decode_utf8(std::string_view text);

// Number of code points in `text`.
std::size_t utf8_length(std::string_view text);

// Longest prefix of `text` holding at most `max_code_points` code points.
std::string_view utf8_prefix(std::string_view text, std::size_t max_code_points);

std::string to_lower_ascii(std::string_view text);
bool iequals_ascii(std::string_view a, std::string_view b);

std::string_view trim(std::string_view text);

std::vector<std::string> split(std::string_view text, char delimiter);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// Levenshtein distance with unit insert/delete/substitute costs, measured in
/// code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Splits a label on camelCase humps, underscores, hyphens and whitespace,
/// lowercases the pieces and joins them with single spaces:
/// "iucnStatus" -> "iucn status", "VIN_prefix" -> "vin prefix".
std::string tokenize_label(std::string_view label);

/// 1 - edit_distance / max_length over tokenized forms. Symmetric, in [0, 1],
/// and exactly 1 iff the tokenized forms are equal.
double label_similarity(std::string_view a, std::string_view b);

}  // namespace discovery
