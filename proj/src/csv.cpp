#include "handsel/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "handsel/error.hpp"

namespace handsel {

std::vector<std::string> split_csv_line(const std::string& line, int line_number) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw Error(ErrorCode::malformed_row,
                    "unterminated quote on line " + std::to_string(line_number));
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string join_csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out += '"';
            for (char c : f) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    return out;
}

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, int line_number, const std::string& field) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || text.empty()) {
        throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_number) +
                                                  ": field '" + field +
                                                  "' is not a number: '" + text + "'");
    }
    return v;
}

long long parse_int(const std::string& text, int line_number, const std::string& field) {
    long long v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || text.empty()) {
        throw Error(ErrorCode::malformed_row, "line " + std::to_string(line_number) +
                                                  ": field '" + field +
                                                  "' is not an integer: '" + text + "'");
    }
    return v;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open file: " + path);
    CsvTable table;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line, line_number);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw Error(ErrorCode::malformed_row,
                            path + ": line " + std::to_string(line_number) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
            table.line_numbers.push_back(line_number);
        }
    }
    if (table.header.empty()) {
        throw Error(ErrorCode::malformed_row, path + ": missing header row");
    }
    return table;
}

void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& leading_comments) {
    std::ofstream out(path, std::ios::binary); // binary: no platform newline translation
    if (!out) throw Error(ErrorCode::io, "cannot write file: " + path);
    for (const auto& comment : leading_comments) out << "# " << comment << "\n";
    out << join_csv_line(table.header) << "\n";
    for (const auto& row : table.rows) out << join_csv_line(row) << "\n";
    if (!out) throw Error(ErrorCode::io, "write failed: " + path);
}

} // namespace handsel
