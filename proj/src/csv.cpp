#include "csv.hpp"

#include <charconv>
#include <cmath>

#include "capsel/error.hpp"

namespace capsel::detail {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

bool is_valid_utf8(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
        else return false;
        if (i + extra >= text.size() && extra > 0) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!is_valid_utf8(line)) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid UTF-8");
        }
        CsvRow row;
        row.line = line_no;
        std::string field;
        bool quoted = false;
        bool was_quoted = false;
        const std::size_t start_line = line_no;
        for (std::size_t i = 0;; ++i) {
            if (i == line.size()) {
                if (quoted) {
                    // quoted field spans a newline
                    std::string next;
                    if (!std::getline(in, next)) {
                        throw ParseError("line " + std::to_string(start_line) + ": unterminated quoted field");
                    }
                    ++line_no;
                    field.push_back('\n');
                    line = std::move(next);
                    i = static_cast<std::size_t>(-1);
                    continue;
                }
                break;
            }
            const char ch = line[i];
            if (quoted) {
                if (ch == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"' && trim(field).empty()) {
                field.clear();
                quoted = true;
                was_quoted = true;
            } else if (ch == ',') {
                row.fields.push_back(was_quoted ? field : trim(field));
                field.clear();
                was_quoted = false;
            } else {
                field.push_back(ch);
            }
        }
        row.fields.push_back(was_quoted ? field : trim(field));
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

void require_header(const CsvRow& header, const std::vector<std::string>& expected, const std::string& table) {
    if (header.fields != expected) {
        std::string want;
        for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
        throw ParseError(table + " line " + std::to_string(header.line) + ": header must be '" + want + "'");
    }
}

double parse_double(const std::string& text, const std::string& field, std::size_t line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ": field '" + field + "' is not a number: '" + text + "'");
    }
    return value;
}

}  // namespace capsel::detail
