#include "q2ma/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "q2ma/errors.hpp"

namespace q2ma {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const Json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

namespace {

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

CsvBuilder::CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
    if (columns_ == 0) throw Error("csv needs at least one column");
    for (std::size_t c = 0; c < columns_; ++c) {
        if (c) out_ += ',';
        out_ += csv_escape(header[c]);
    }
    out_ += '\n';
}

CsvBuilder& CsvBuilder::cell(const std::string& text) {
    if (in_row_ >= columns_) throw Error("csv row has too many cells");
    if (in_row_) out_ += ',';
    out_ += csv_escape(text);
    ++in_row_;
    return *this;
}

CsvBuilder& CsvBuilder::cell(double value) { return cell(format_double(value)); }

CsvBuilder& CsvBuilder::cell(long long value) { return cell(std::to_string(value)); }

void CsvBuilder::end_row() {
    if (in_row_ != columns_) throw Error("csv row is missing cells");
    out_ += '\n';
    in_row_ = 0;
    ++rows_;
}

const std::string& CsvBuilder::str() const {
    if (in_row_ != 0) throw Error("csv row left unfinished");
    return out_;
}

}  // namespace q2ma
