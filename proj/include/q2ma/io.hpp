#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace q2ma {

// Key order in emitted JSON follows insertion order so output bytes are
// reproducible run to run.
using Json = nlohmann::ordered_json;

// Round-trip exact decimal form (%.17g).
std::string format_double(double value);

// Writes via a temp file in the target directory, then renames into place,
// so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const Json& doc);

std::string read_text_file(const std::filesystem::path& path);

// Parses a JSON config file; throws ConfigError with file and position
// diagnostics on failure.
Json read_json_file(const std::filesystem::path& path);

// Minimal CSV assembly with RFC-style quoting and a fixed column count.
class CsvBuilder {
  public:
    explicit CsvBuilder(std::vector<std::string> header);

    CsvBuilder& cell(const std::string& text);
    CsvBuilder& cell(double value);
    CsvBuilder& cell(long long value);
    void end_row();

    const std::string& str() const;  // requires all rows completed
    std::size_t rows() const { return rows_; }

  private:
    std::string out_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace q2ma
