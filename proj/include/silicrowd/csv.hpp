#pragma once

#include <string>
#include <vector>

namespace silicrowd {

// Deterministic numeric text. All CSV output funnels through these so byte
// identity across runs and machines only depends on IEEE doubles, not locale.
std::string format_pct2(double percent);    // fixed 2 decimals, e.g. "57.35"
std::string format_double(double v);        // shortest-ish "%.10g"
std::string format_long(long v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Quotes fields containing comma, quote, CR or LF; "" escapes a quote.
std::string csv_escape(const std::string& field);
std::string render_csv(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

// Parses quoted fields, embedded newlines, doubled quotes. Rejects ragged
// rows (every row must match the header width) and stray quotes.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::string read_file(const std::string& path);          // IoError if missing
void write_file(const std::string& path, const std::string& data);

}  // namespace silicrowd
