#include "arz/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "arz/errors.hpp"

namespace arz::csv {

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);
    Table t;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::stringstream ss(stripped);
        std::string cell;
        if (t.header.empty()) {
            while (std::getline(ss, cell, ',')) t.header.push_back(trim(cell));
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            cell = trim(cell);
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": not a number: '" + cell + "'");
            }
        }
        if (row.size() != t.header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " columns, got " +
                            std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DataError(path + ": missing header row");
    return t;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write CSV file: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_value(row[i]);
        }
        out << '\n';
    }
}

}  // namespace arz::csv
