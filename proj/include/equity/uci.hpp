#pragma once

// Loading the UCI student-performance tables and deriving per-student
// obstacle flags from family-support attributes.

#include "equity/core.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace equity {

// Splits one delimited line, honouring double quotes ("" escapes a quote).
// Surrounding whitespace and the quotes themselves are stripped.
std::vector<std::string> split_delimited(std::string_view line, char delim);

// Numeric columns are parsed to int, every other column is kept as text.
struct StudentTable {
    std::vector<std::string> columns;   // header order
    std::map<std::string, std::vector<int>> numeric;
    std::map<std::string, std::vector<std::string>> categorical;
    std::size_t rows = 0;

    bool has(const std::string& column) const;
    const std::vector<int>& ints(const std::string& column) const;
    const std::vector<std::string>& text(const std::string& column) const;
};

// Columns parsed as integers whenever they are present.
const std::vector<std::string>& uci_numeric_columns();
// Columns the case study needs; a file lacking any of them is rejected.
const std::vector<std::string>& uci_required_columns();

// Reads a delimited student file. With delim == 0 the delimiter is ';' (the
// UCI distribution) unless the header contains no ';', in which case ',' is
// used. Errors name the offending 1-based data row and column.
StudentTable load_uci_students(const std::filesystem::path& path, char delim = 0);
StudentTable parse_uci_students(std::string_view content, const std::string& source = "<memory>",
                                char delim = 0);

// Ordinal encodings used by the obstacle sum.
int encode_job(const std::string& level);      // at_home 0, other 1, services 2, health 3, teacher 4
int encode_yes_no(const std::string& level);   // no 0, yes 1

// Sum of paid, famrel, Mjob, Fjob, Medu, Fedu per student.
std::vector<int> support_sums(const StudentTable& table);

// Students whose support sum lies strictly below the population median.
std::vector<bool> derive_obstacle_flags(const StudentTable& table);

// Median of integer values (mean of the two middle values for even counts).
double median(std::vector<int> values);

}  // namespace equity
