#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "discovery/ontology.hpp"
#include "discovery/prompt.hpp"
#include "discovery/table.hpp"
#include "discovery/text.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return DISCOVERY_FIXTURE_DIR; }
inline std::filesystem::path path(const std::string& name) { return dir() / name; }

inline discovery::Table ev_table() { return discovery::load_csv_table(path("ev_table.csv"), true); }
inline discovery::Table registration() {
  return discovery::load_csv_table(path("registration.csv"), true);
}
inline discovery::Table animals() { return discovery::load_csv_table(path("animals.csv"), true); }
inline discovery::Ontology ontology() { return discovery::load_ontology_file(path("ontology.tsv")); }

inline std::vector<std::string> classes() {
  std::vector<std::string> out;
  for (const auto& line : discovery::split(discovery::read_text_file(path("classes.txt")), '\n')) {
    if (!discovery::trim(line).empty()) out.emplace_back(discovery::trim(line));
  }
  return out;
}

inline constexpr const char* kJoinNotes =
    "df1 holds ElectricVehicle rows; df2 holds Person rows.";

// Golden prompts are keyed by task and by which of demonstration, metadata,
// prefix and task knowledge are switched on. Task knowledge is the class
// list for table-class prompts and the prior-findings note for joins; the
// column-type prompt has none.
struct Mask {
  bool demonstration;
  bool metadata;
  bool prefix;
  bool knowledge;

  static Mask from_bits(unsigned bits) {
    return {(bits & 8U) != 0, (bits & 4U) != 0, (bits & 2U) != 0, (bits & 1U) != 0};
  }
  std::string code() const {
    std::string out;
    out += demonstration ? "D1" : "D0";
    out += metadata ? "M1" : "M0";
    out += prefix ? "P1" : "P0";
    out += knowledge ? "K1" : "K0";
    return out;
  }
  discovery::PromptConfig config() const {
    discovery::PromptConfig c;
    c.include_demonstration = demonstration;
    c.include_metadata = metadata;
    c.include_prefix = prefix;
    return c;
  }
};

inline const std::vector<std::string>& golden_tasks() {
  static const std::vector<std::string> tasks{"table_class", "column_type", "join"};
  return tasks;
}

inline std::string render_golden(const std::string& task, const Mask& mask) {
  using namespace discovery;
  const auto config = mask.config();
  if (task == "table_class") {
    std::optional<std::vector<std::string>> allowed;
    if (mask.knowledge) allowed = classes();
    return assemble(table_class_prompt(ev_table(), allowed, config));
  }
  if (task == "column_type") return assemble(column_type_prompt(ev_table(), config));
  std::optional<std::string> notes;
  if (mask.knowledge) notes = kJoinNotes;
  return assemble(join_prompt(ev_table(), registration(), config, notes));
}

inline std::filesystem::path golden_path(const std::string& task, const Mask& mask) {
  return path("prompts") / (task + "_" + mask.code() + ".txt");
}

// Fresh scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("discovery-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto file = path_ / name;
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    out << content;
    return file;
  }

 private:
  std::filesystem::path path_;
};

// One transcript line; `match` may be empty.
inline std::string script_line(const std::string& response, const std::string& match = "") {
  auto escape = [](const std::string& s) {
    std::string out;
    for (const char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
      }
    }
    return out;
  };
  std::string line = "{";
  if (!match.empty()) line += "\"match\": \"" + escape(match) + "\", ";
  line += "\"response\": \"" + escape(response) + "\"}\n";
  return line;
}

}  // namespace fixtures
