#include "silicrowd/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "silicrowd/core.hpp"

namespace silicrowd {

std::string format_pct2(double percent) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", percent);
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string format_long(long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%ld", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string render_csv(const CsvTable& table) {
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(row[i]);
        }
        out += '\n';
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    for (const auto& row : table.rows)
        if (row.size() != table.header.size())
            throw FormatError("csv row width " + std::to_string(row.size()) +
                              " does not match header width " +
                              std::to_string(table.header.size()));
    write_file(path, render_csv(table));
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_field = false;
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_was_quoted = false;
        any_field = true;
    };
    auto end_row = [&] {
        end_field();
        if (table.header.empty())
            table.header = row;
        else if (row.size() != table.header.size())
            throw FormatError("csv line " + std::to_string(line) + ": row width " +
                              std::to_string(row.size()) + " does not match header width " +
                              std::to_string(table.header.size()));
        else
            table.rows.push_back(row);
        row.clear();
        any_field = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
                if (c == '\n') ++line;
            }
        } else if (c == '"') {
            if (!field.empty() || field_was_quoted)
                throw FormatError("csv line " + std::to_string(line) +
                                  ": stray quote inside unquoted field");
            in_quotes = true;
            field_was_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') continue;
            end_row();
            ++line;
        } else if (c == '\n') {
            end_row();
            ++line;
        } else {
            field += c;
        }
    }
    if (in_quotes) throw FormatError("csv: unterminated quoted field");
    if (!field.empty() || field_was_quoted || any_field) end_row();
    if (table.header.empty()) throw FormatError("csv: empty input");
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace silicrowd
