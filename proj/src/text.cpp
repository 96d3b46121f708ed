#include "discovery/text.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace discovery {

namespace {

// Length of the UTF-8 sequence introduced by `lead`, or 0 if it is not a
// valid lead byte.
std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;
}

bool is_continuation(unsigned char byte) { return (byte & 0xC0) == 0x80; }

// Number of bytes in the code point starting at `pos` (at least 1).
std::size_t code_point_width(std::string_view text, std::size_t pos) {
  const auto len = sequence_length(static_cast<unsigned char>(text[pos]));
  if (len <= 1 || pos + len > text.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    if (!is_continuation(static_cast<unsigned char>(text[pos + i]))) return 1;
  }
  return len;
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower_or_digit(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
bool is_separator(char c) {
  return c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c));
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto width = code_point_width(text, pos);
    const auto lead = static_cast<unsigned char>(text[pos]);
    char32_t cp = 0;
    switch (width) {
      case 1: cp = lead; break;
      case 2: cp = lead & 0x1F; break;
      case 3: cp = lead & 0x0F; break;
      default: cp = lead & 0x07; break;
    }
    for (std::size_t i = 1; i < width; ++i) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[pos + i]) & 0x3F);
    }
    out.push_back(cp);
    pos += width;
  }
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < text.size(); pos += code_point_width(text, pos)) ++count;
  return count;
}

std::string_view utf8_prefix(std::string_view text, std::size_t max_code_points) {
  std::size_t pos = 0;
  for (std::size_t n = 0; n < max_code_points && pos < text.size(); ++n) {
    pos += code_point_width(text, pos);
  }
  return text.substr(0, pos);
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  return a.size() == b.size() && to_lower_ascii(a) == to_lower_ascii(b);
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  auto source = decode_utf8(a);
  auto target = decode_utf8(b);
  if (source.size() < target.size()) std::swap(source, target);

  // Single row over the shorter string.
  std::vector<std::size_t> row(target.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= source.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= target.size(); ++j) {
      const std::size_t above = row[j];
      const std::size_t substitute = diagonal + (source[i - 1] == target[j - 1] ? 0 : 1);
      row[j] = std::min({above + 1, row[j - 1] + 1, substitute});
      diagonal = above;
    }
  }
  return row[target.size()];
}

std::string tokenize_label(std::string_view label) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(to_lower_ascii(current));
    current.clear();
  };
  for (std::size_t i = 0; i < label.size(); ++i) {
    const char c = label[i];
    if (is_separator(c)) {
      flush();
      continue;
    }
    if (is_upper(c) && !current.empty()) {
      const char prev = current.back();
      const bool next_lower = i + 1 < label.size() && label[i + 1] >= 'a' && label[i + 1] <= 'z';
      // "iucnStatus" splits before S; "HTTPServer" splits before the S that
      // starts the lowercase run.
      if (is_lower_or_digit(prev) || (is_upper(prev) && next_lower)) flush();
    }
    current.push_back(c);
  }
  flush();
  return join(tokens, " ");
}

double label_similarity(std::string_view a, std::string_view b) {
  const auto left = tokenize_label(a);
  const auto right = tokenize_label(b);
  const auto longest = std::max(utf8_length(left), utf8_length(right));
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(left, right)) / static_cast<double>(longest);
}

}  // namespace discovery
