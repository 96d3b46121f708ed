#include "discovery/table.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "discovery/error.hpp"

namespace discovery {

Table::Table(std::string name, std::optional<Row> headers, std::vector<Row> rows)
    : name_(std::move(name)), headers_(std::move(headers)), rows_(std::move(rows)) {
  if (headers_) {
    arity_ = headers_->size();
  } else if (!rows_.empty()) {
    arity_ = rows_.front().size();
  }
  if (arity_ == 0) {
    throw Error(ErrorCode::InvalidTable, "table '" + name_ + "' has no columns");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != arity_) {
      throw Error(ErrorCode::InvalidTable,
                  "table '" + name_ + "': row " + std::to_string(i) + " has " +
                      std::to_string(rows_[i].size()) + " cells, expected " +
                      std::to_string(arity_));
    }
  }
}

std::string Table::column_name(std::size_t index) const {
  if (headers_) return headers_->at(index);
  if (index >= arity_) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  return std::to_string(index);
}

namespace {

// Uniform integer in [0, bound) without the implementation-defined
// behaviour of std::uniform_int_distribution, so samples are identical
// across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % bound;
}

bool needs_quotes(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

Table sample_rows(const Table& table, std::size_t k, const SamplingStrategy& strategy) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
  const auto& rows = table.rows();
  if (k >= rows.size()) return table;

  std::vector<Row> picked;
  picked.reserve(k);
  if (strategy.mode() == SamplingStrategy::Mode::Head) {
    picked.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    // Partial Fisher-Yates over indices, then restore table order.
    std::mt19937_64 rng(strategy.seed().value_or(0));
    std::vector<std::size_t> indices(rows.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + bounded(rng, indices.size() - i);
      std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    for (const auto index : indices) picked.push_back(rows[index]);
  }
  return Table(table.name(), table.headers(), std::move(picked));
}

std::string to_csv_line(const Row& fields) {
  // A lone empty field would serialize to an empty line, which reads back as
  // no record at all; quote it so the row survives a round trip.
  if (fields.size() == 1 && fields.front().empty()) return "\"\"";
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    const auto& field = fields[i];
    if (!needs_quotes(field)) {
      line += field;
      continue;
    }
    line += '"';
    for (const char c : field) {
      if (c == '"') line += '"';
      line += c;
    }
    line += '"';
  }
  return line;
}

std::string to_csv_rows(const std::vector<Row>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) out += '\n';
    out += to_csv_line(rows[i]);
  }
  return out;
}

std::string to_csv(const Table& table) {
  std::string out;
  if (table.headers()) out = to_csv_line(*table.headers());
  if (!table.rows().empty()) {
    if (table.headers()) out += '\n';
    out += to_csv_rows(table.rows());
  }
  return out;
}

std::vector<Row> parse_csv(std::string_view text) {
  std::vector<Row> records;
  Row record;
  std::string field;
  std::size_t line = 1;
  std::size_t pos = 0;
  bool in_record = false;

  const auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    in_record = false;
  };

  while (pos < text.size()) {
    if (text[pos] == '"' && field.empty()) {
      in_record = true;
      const std::size_t opened_at = line;
      ++pos;
      for (;;) {
        if (pos >= text.size()) {
          throw Error(ErrorCode::MalformedCsv, "unterminated quoted field", opened_at);
        }
        const char c = text[pos++];
        if (c == '"') {
          if (pos < text.size() && text[pos] == '"') {
            field += '"';
            ++pos;
            continue;
          }
          break;
        }
        if (c == '\n') ++line;
        field += c;
      }
      // Anything between the closing quote and the next delimiter is kept
      // verbatim rather than rejected.
      while (pos < text.size() && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') {
        field += text[pos++];
      }
      continue;
    }
    const char c = text[pos];
    if (c == ',') {
      in_record = true;
      record.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
      end_record();
      pos += 2;
      ++line;
    } else if (c == '\n') {
      end_record();
      ++pos;
      ++line;
    } else {
      in_record = true;
      field += c;
      ++pos;
    }
  }
  if (in_record) end_record();
  return records;
}

Table table_from_csv(std::string name, std::string_view text, bool first_row_is_header) {
  auto records = parse_csv(text);
  if (records.empty()) throw Error(ErrorCode::InvalidTable, "table '" + name + "' is empty");
  const auto arity = records.front().size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].size() != arity) {
      throw Error(ErrorCode::MalformedCsv,
                  "record has " + std::to_string(records[i].size()) + " fields, expected " +
                      std::to_string(arity),
                  i + 1);
    }
  }
  std::optional<Row> headers;
  if (first_row_is_header) {
    headers = std::move(records.front());
    records.erase(records.begin());
  }
  return Table(std::move(name), std::move(headers), std::move(records));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Table load_csv_table(const std::filesystem::path& path, bool first_row_is_header) {
  return table_from_csv(path.stem().string(), read_text_file(path), first_row_is_header);
}

}  // namespace discovery
