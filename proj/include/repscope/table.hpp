#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace repscope::report {

// Tab-separated table with a header row. Fields may hold any UTF-8 bytes
// except tab, CR and LF.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
};

std::string format_table(const Table& t);
Table parse_table(std::string_view text);

void write_table(const Table& t, const std::filesystem::path& path);
Table read_table(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_real(double v);
double parse_real(std::string_view s);
long long parse_integer(std::string_view s);

}  // namespace repscope::report
