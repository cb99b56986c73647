#pragma once

#include <optional>
#include <string>
#include <vector>

namespace handsel {

// Minimal RFC-4180-ish CSV: comma separated, double quotes around fields that
// contain commas, quotes or newlines. No multi-line fields.
std::vector<std::string> split_csv_line(const std::string& line, int line_number = 0);
std::string join_csv_line(const std::vector<std::string>& fields);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(const std::string& text, int line_number, const std::string& field);
long long parse_int(const std::string& text, int line_number, const std::string& field);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers; // source line of each row, for error reports

    int column(const std::string& name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& leading_comments = {});

} // namespace handsel
