#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kslab {

// Shortest decimal string that round-trips to the same double. Infinities
// and NaN print as inf/-inf/nan.
std::string fmt_double(double x);

std::string fmt_bool(bool b);

// Flat key=value document, one pair per line, insertion order preserved.
// All report files are built through this, so their byte content depends
// only on the values.
class KeyValueDoc {
public:
    void add(std::string key, std::string value);
    void add(std::string key, const char* value);
    void add(std::string key, double value);
    void add(std::string key, int value);
    void add(std::string key, long value);
    void add(std::string key, long long value);
    void add(std::string key, bool value);

    const std::vector<std::pair<std::string, std::string>>& rows() const { return rows_; }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Same shape with preformatted cells, for tables that mix text and numbers.
void write_csv_text(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace kslab
