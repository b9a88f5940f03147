#include "tagprof/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace tagprof::csv {

bool split_line(std::string_view line, std::vector<std::string>& fields) {
    fields.clear();
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return !in_quotes;
}

std::string escape(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\n") != std::string_view::npos ||
                              (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs_quotes) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) {
            out << ',';
        }
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double value) {
    if (value == 0.0) {
        return "0";  // also folds -0
    }
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, digits);
    std::string text(buf, result.ptr);
    if (text.starts_with('-') && text.find_first_not_of("-0.") == std::string::npos) {
        text.erase(0, 1);
    }
    return text;
}

std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& source) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> fields;
        if (!split_line(line, fields)) {
            throw ParseError(source, line_no, "unterminated quoted field");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw std::invalid_argument("not a finite number: '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text) {
    text = trim(text);
    long long value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace tagprof::csv
