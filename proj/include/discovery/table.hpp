#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace discovery {

using Row = std::vector<std::string>;

// A named relation of text cells. All rows share one arity, which also
// matches the header row when present. A header-only table is allowed; a
// table with neither headers nor rows is not.
class Table {
 public:
  Table(std::string name, std::optional<Row> headers, std::vector<Row> rows);

  const std::string& name() const noexcept { return name_; }
  const std::optional<Row>& headers() const noexcept { return headers_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  bool has_headers() const noexcept { return headers_.has_value(); }
  std::size_t arity() const noexcept { return arity_; }

  // Header name of column `index`, or its decimal position when headerless.
  std::string column_name(std::size_t index) const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::string name_;
  std::optional<Row> headers_;
  std::vector<Row> rows_;
  std::size_t arity_ = 0;
};

class SamplingStrategy {
 public:
  enum class Mode { Head, SeededRandom };

  static SamplingStrategy head() { return SamplingStrategy(Mode::Head, std::nullopt); }
  static SamplingStrategy seeded(std::uint64_t seed) {
    return SamplingStrategy(Mode::SeededRandom, seed);
  }

  Mode mode() const noexcept { return mode_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  SamplingStrategy(Mode mode, std::optional<std::uint64_t> seed) : mode_(mode), seed_(seed) {}

  Mode mode_;
  std::optional<std::uint64_t> seed_;
};

/// Keeps min(k, |rows|) rows. Head takes a prefix; SeededRandom draws k
/// distinct indices from a seeded mt19937_64 and keeps them in table order.
/// Duplicate rows are kept as-is.
Table sample_rows(const Table& table, std::size_t k, const SamplingStrategy& strategy);

// RFC-4180 serialization: header line first when present, "\n" between
// lines, no trailing newline. Fields holding ',', '"', CR or LF are quoted.
std::string to_csv(const Table& table);
std::string to_csv_line(const Row& fields);
std::string to_csv_rows(const std::vector<Row>& rows);

/// Parses RFC-4180 text into records. Accepts LF or CRLF line ends and
/// ignores one trailing line end. Throws MalformedCsv on an unterminated
/// quoted field.
std::vector<Row> parse_csv(std::string_view text);

/// Builds a table from CSV text, treating the first record as the header row
/// when `first_row_is_header` is set.
Table table_from_csv(std::string name, std::string_view text, bool first_row_is_header);

/// Reads a CSV file; the table is named after the file stem.
Table load_csv_table(const std::filesystem::path& path, bool first_row_is_header);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace discovery
