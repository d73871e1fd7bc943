#include "airgam/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace airgam {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) cells.emplace_back();
    return cells;
}

}  // namespace

int DelimitedTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

DelimitedTable read_delimited(std::istream& in, char delim) {
    DelimitedTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (!line.empty() && line[0] == '#') continue;
        auto cells = split_line(line, delim);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw std::invalid_argument("empty input: no header row");
    return table;
}

DelimitedTable read_delimited_file(const std::string& path, char delim) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return read_delimited(in, delim);
}

bool is_missing_cell(const std::string& cell) {
    if (cell.empty()) return true;
    return cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

}  // namespace airgam
