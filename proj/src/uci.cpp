#include "equity/uci.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace equity {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<std::string> split_delimited(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw DataError("unterminated quote");
    out.push_back(trim(cur));
    return out;
}

bool StudentTable::has(const std::string& column) const {
    return std::find(columns.begin(), columns.end(), column) != columns.end();
}

const std::vector<int>& StudentTable::ints(const std::string& column) const {
    const auto it = numeric.find(column);
    if (it == numeric.end()) throw DataError("missing numeric column '" + column + "'");
    return it->second;
}

const std::vector<std::string>& StudentTable::text(const std::string& column) const {
    const auto it = categorical.find(column);
    if (it == categorical.end()) throw DataError("missing categorical column '" + column + "'");
    return it->second;
}

const std::vector<std::string>& uci_numeric_columns() {
    static const std::vector<std::string> cols{"age",   "Medu",     "Fedu",   "traveltime", "studytime",
                                               "failures", "famrel", "freetime", "goout",   "Dalc",
                                               "Walc",  "health",   "absences", "G1",       "G2",
                                               "G3"};
    return cols;
}

const std::vector<std::string>& uci_required_columns() {
    static const std::vector<std::string> cols{"sex",      "health", "studytime", "absences", "traveltime",
                                               "paid",     "freetime", "romantic", "Medu",    "Fedu",
                                               "famrel",   "Mjob",   "Fjob",      "G1",       "G2",
                                               "G3"};
    return cols;
}

StudentTable parse_uci_students(std::string_view content, const std::string& source, char delim) {
    std::istringstream in{std::string(content)};
    std::string line;
    StudentTable table;

    bool have_header = false;
    std::set<std::string> numeric_set(uci_numeric_columns().begin(), uci_numeric_columns().end());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (!have_header) {
            if (delim == 0) delim = line.find(';') == std::string::npos ? ',' : ';';
            table.columns = split_delimited(line, delim);
            std::set<std::string> seen;
            for (const auto& c : table.columns) {
                if (!seen.insert(c).second) throw DataError(source + ": duplicate column '" + c + "'");
                if (numeric_set.count(c)) {
                    table.numeric[c];
                } else {
                    table.categorical[c];
                }
            }
            for (const auto& c : uci_required_columns()) {
                if (!seen.count(c)) throw DataError(source + ": missing expected column '" + c + "'");
            }
            have_header = true;
            continue;
        }
        ++row;
        std::vector<std::string> cells;
        try {
            cells = split_delimited(line, delim);
        } catch (const DataError& e) {
            throw DataError(source + ": row " + std::to_string(row) + ": " + e.what());
        }
        if (cells.size() != table.columns.size()) {
            throw DataError(source + ": row " + std::to_string(row) + ": expected " +
                            std::to_string(table.columns.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& name = table.columns[c];
            if (numeric_set.count(name)) {
                int v = 0;
                if (!parse_int(cells[c], v)) {
                    throw DataError(source + ": row " + std::to_string(row) + ", column '" + name +
                                    "': cannot parse '" + cells[c] + "' as an integer");
                }
                table.numeric[name].push_back(v);
            } else {
                table.categorical[name].push_back(cells[c]);
            }
        }
    }
    if (!have_header) throw DataError(source + ": file has no header row");
    table.rows = row;
    return table;
}

StudentTable load_uci_students(const std::filesystem::path& path, char delim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open student file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_uci_students(buf.str(), path.string(), delim);
}

int encode_job(const std::string& level) {
    static const std::map<std::string, int> codes{
        {"at_home", 0}, {"other", 1}, {"services", 2}, {"health", 3}, {"teacher", 4}};
    const auto it = codes.find(level);
    if (it == codes.end()) {
        throw DataError("unknown job level '" + level +
                        "' (expected at_home, other, services, health, teacher)");
    }
    return it->second;
}

int encode_yes_no(const std::string& level) {
    if (level == "no") return 0;
    if (level == "yes") return 1;
    throw DataError("unknown yes/no level '" + level + "'");
}

std::vector<int> support_sums(const StudentTable& table) {
    const auto& paid = table.text("paid");
    const auto& famrel = table.ints("famrel");
    const auto& mjob = table.text("Mjob");
    const auto& fjob = table.text("Fjob");
    const auto& medu = table.ints("Medu");
    const auto& fedu = table.ints("Fedu");
    std::vector<int> sums(table.rows);
    for (std::size_t i = 0; i < table.rows; ++i) {
        sums[i] = encode_yes_no(paid[i]) + famrel[i] + encode_job(mjob[i]) + encode_job(fjob[i]) + medu[i] +
                  fedu[i];
    }
    return sums;
}

double median(std::vector<int> values) {
    if (values.empty()) throw UndefinedMetricError("median of an empty sequence");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2]));
}

std::vector<bool> derive_obstacle_flags(const StudentTable& table) {
    const std::vector<int> sums = support_sums(table);
    std::vector<bool> flags(sums.size(), false);
    if (sums.empty()) return flags;
    const double m = median(sums);
    for (std::size_t i = 0; i < sums.size(); ++i) flags[i] = static_cast<double>(sums[i]) < m;
    return flags;
}

}  // namespace equity
