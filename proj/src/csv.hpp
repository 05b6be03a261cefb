#pragma once

#include <istream>
#include <string>
#include <vector>

namespace capsel::detail {

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF. Blank lines
/// are skipped and fields are trimmed.
std::vector<CsvRow> read_csv(std::istream& in);

/// Throws ParseError unless `header` matches `expected` exactly, in order.
void require_header(const CsvRow& header, const std::vector<std::string>& expected, const std::string& table);

double parse_double(const std::string& text, const std::string& field, std::size_t line);

bool is_valid_utf8(const std::string& text);

}  // namespace capsel::detail
