#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace airgam {

/// Header + rows of raw string cells. Cells are whitespace-trimmed.
struct DelimitedTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position for `name`, -1 if absent.
    int column(const std::string& name) const;
};

DelimitedTable read_delimited(std::istream& in, char delim = ',');
DelimitedTable read_delimited_file(const std::string& path, char delim = ',');

/// True for cells that denote a missing value ("" or "NA", case-insensitive).
bool is_missing_cell(const std::string& cell);

/// Writes content to `path` atomically (temp file in the same directory,
/// then rename).
void write_file_atomic(const std::string& path, const std::string& content);

/// Formats a double with enough digits to round-trip, "NA" for NaN.
std::string format_number(double v);

}  // namespace airgam
