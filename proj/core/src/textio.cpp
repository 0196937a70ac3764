#include "kslab/textio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kslab {

std::string fmt_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

void KeyValueDoc::add(std::string key, std::string value) {
    rows_.emplace_back(std::move(key), std::move(value));
}
void KeyValueDoc::add(std::string key, const char* value) {
    rows_.emplace_back(std::move(key), std::string(value));
}
void KeyValueDoc::add(std::string key, double value) {
    rows_.emplace_back(std::move(key), fmt_double(value));
}
void KeyValueDoc::add(std::string key, int value) {
    rows_.emplace_back(std::move(key), std::to_string(value));
}
void KeyValueDoc::add(std::string key, long value) {
    rows_.emplace_back(std::move(key), std::to_string(value));
}
void KeyValueDoc::add(std::string key, long long value) {
    rows_.emplace_back(std::move(key), std::to_string(value));
}
void KeyValueDoc::add(std::string key, bool value) {
    rows_.emplace_back(std::move(key), fmt_bool(value));
}

std::string KeyValueDoc::str() const {
    std::string out;
    for (const auto& [k, v] : rows_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

void KeyValueDoc::write(const std::filesystem::path& path) const {
    write_text_file(path, str());
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> line;
        line.reserve(row.size());
        for (double v : row) line.push_back(fmt_double(v));
        cells.push_back(std::move(line));
    }
    write_csv_text(path, header, cells);
}

void write_csv_text(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::runtime_error("csv row width does not match the header");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    write_text_file(path, out);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace kslab
