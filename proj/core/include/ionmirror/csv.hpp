#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ionmirror::io {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

/// CSV table with a fixed header and shortest-round-trip numeric cells, so
/// identical inputs produce byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::size_t columns_;
    std::string body_;
};

/// Parse a CSV produced by CsvWriter. Cells stay strings; value() parses a
/// numeric cell on demand.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    double value(std::size_t row, std::size_t column) const;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ionmirror::io
