#include "repscope/table.hpp"

#include <charconv>
#include <sstream>

#include "repscope/error.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::report {

namespace {

void check_field(const std::string& f) {
    if (f.find_first_of("\t\r\n") != std::string::npos) {
        fail(Errc::BadArgument, "table field contains a tab or newline");
    }
}

void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        check_field(row[i]);
        if (i != 0) {
            out += '\t';
        }
        out += row[i];
    }
    out += '\n';
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    fail(Errc::FormatError, "table has no column '" + std::string(name) + "'");
}

std::string format_table(const Table& t) {
    std::string out;
    append_row(out, t.header);
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) {
            fail(Errc::BadArgument, "table row width differs from header");
        }
        append_row(out, row);
    }
    return out;
}

Table parse_table(std::string_view text) {
    Table t;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!have_header) {
            t.header = split_line(line);
            have_header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto row = split_line(line);
        if (row.size() != t.header.size()) {
            fail(Errc::FormatError, "table row has " + std::to_string(row.size()) + " fields, header has " +
                                        std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_table(const Table& t, const std::filesystem::path& path) {
    io::write_text_file(path, format_table(t));
}

Table read_table(const std::filesystem::path& path) {
    return parse_table(io::read_text_file(path));
}

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(Errc::FormatError, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

long long parse_integer(std::string_view s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(Errc::FormatError, "not an integer: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace repscope::report
