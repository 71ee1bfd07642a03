#pragma once

#include <string>
#include <vector>

namespace arz::csv {

/// Numeric CSV table: one header row followed by rows of doubles.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a header column, or -1 if absent.
    int column(const std::string& name) const;
};

Table read_file(const std::string& path);

/// Writes with "%.12g" formatting so identical inputs give identical bytes.
void write_file(const std::string& path, const Table& table);

std::string format_value(double v);

}  // namespace arz::csv
