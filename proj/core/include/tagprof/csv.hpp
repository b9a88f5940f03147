#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tagprof {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace csv {

/// Splits one line of comma-separated text. Fields may be double-quoted, with
/// "" as an escaped quote. Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field only when it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Fixed-precision text for human-facing tables.
std::string format_fixed(double value, int digits);

double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

/// All non-blank lines split into fields. Throws ParseError on an unterminated quote.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& source);

}  // namespace csv
}  // namespace tagprof
