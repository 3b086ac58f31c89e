#include "equity/population_io.hpp"

#include "equity/uci.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace equity {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> read_rows(std::string_view content, const std::string& source,
                                                std::vector<std::string>& header) {
    std::istringstream in{std::string(content)};
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (!have_header) {
            header = split_delimited(line, ',');
            have_header = true;
            continue;
        }
        ++row;
        auto cells = split_delimited(line, ',');
        if (cells.size() != header.size()) {
            throw DataError(source + ": row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        }
        rows.push_back(std::move(cells));
    }
    if (!have_header) throw DataError(source + ": file has no header row");
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& source) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError(source + ": missing column '" + name + "'");
}

int cell_int(const std::string& s, const std::string& source, std::size_t row, const std::string& col) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError(source + ": row " + std::to_string(row) + ", column '" + col + "': cannot parse '" + s +
                        "' as an integer");
    }
    return v;
}

double cell_double(const std::string& s, const std::string& source, std::size_t row, const std::string& col) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError(source + ": row " + std::to_string(row) + ", column '" + col + "': cannot parse '" + s +
                        "' as a number");
    }
    return v;
}

}  // namespace

Population parse_population_csv(std::string_view content, const std::string& source) {
    std::vector<std::string> header;
    const auto rows = read_rows(content, source, header);
    const std::size_t c_id = column(header, "id", source);
    const std::size_t c_grp = column(header, "grp", source);
    const std::size_t c_y = column(header, "y", source);
    const std::size_t c_yp = column(header, "y_prime", source);

    Population pop;
    std::vector<std::size_t> cx, cz;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("x:", 0) == 0) {
            const std::string name = header[i].substr(2);
            pop.feature_names.push_back(name);
            cx.push_back(i);
            cz.push_back(column(header, "z:" + name, source));
        }
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("z:", 0) == 0) (void)column(header, "x:" + header[i].substr(2), source);
    }

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        Individual ind;
        ind.id = cells[c_id];
        ind.grp = cell_int(cells[c_grp], source, r + 1, "grp");
        ind.y = cell_int(cells[c_y], source, r + 1, "y");
        ind.y_prime = cell_int(cells[c_yp], source, r + 1, "y_prime");
        for (std::size_t k = 0; k < cx.size(); ++k) {
            ind.x.push_back(cell_double(cells[cx[k]], source, r + 1, header[cx[k]]));
            ind.z.push_back(cell_double(cells[cz[k]], source, r + 1, header[cz[k]]));
        }
        pop.individuals.push_back(std::move(ind));
    }
    try {
        pop.validate();
    } catch (const EquityError& e) {
        throw DataError(source + ": " + e.what());
    }
    return pop;
}

Population load_population_csv(const std::filesystem::path& path) {
    return parse_population_csv(slurp(path), path.string());
}

std::string population_csv(const Population& pop) {
    std::ostringstream os;
    os << std::setprecision(17) << "id,grp,y,y_prime";
    for (const auto& f : pop.feature_names) os << ",x:" << f;
    for (const auto& f : pop.feature_names) os << ",z:" << f;
    os << '\n';
    for (const auto& ind : pop.individuals) {
        os << ind.id << ',' << ind.grp << ',' << ind.y << ',' << ind.y_prime;
        for (double v : ind.x) os << ',' << v;
        for (double v : ind.z) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

AuditTable parse_audit_csv(std::string_view content, const std::string& source) {
    std::vector<std::string> header;
    const auto rows = read_rows(content, source, header);
    const std::size_t c_pred = column(header, "pred", source);
    const std::size_t c_label = column(header, "label", source);
    const std::size_t c_group = column(header, "group", source);
    std::optional<std::size_t> c_tt;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "y_tt") c_tt = i;
    }
    AuditTable t;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        t.pred.push_back(cell_int(rows[r][c_pred], source, r + 1, "pred"));
        t.label.push_back(cell_int(rows[r][c_label], source, r + 1, "label"));
        t.group.push_back(cell_int(rows[r][c_group], source, r + 1, "group"));
        if (c_tt) t.y_tt.push_back(cell_int(rows[r][*c_tt], source, r + 1, "y_tt"));
        for (int v : {t.pred.back(), t.label.back(), t.group.back()}) {
            if (v != 0 && v != 1) throw DataError(source + ": row " + std::to_string(r + 1) + ": values must be 0 or 1");
        }
    }
    return t;
}

AuditTable load_audit_csv(const std::filesystem::path& path) { return parse_audit_csv(slurp(path), path.string()); }

// ============================================================================
// JSON DECLARATIONS
// ============================================================================

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(slurp(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

ObstacleModel alpha_from_json(const nlohmann::json& j, const std::vector<std::string>& features,
                              const std::string& source) {
    ObstacleModel om = ObstacleModel::none(features.size());
    if (j.is_null()) return om;
    if (!j.is_object()) throw DataError(source + ": obstacle_alpha must be an object");
    for (const auto& [name, w] : j.items()) {
        std::size_t k = features.size();
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (features[i] == name) k = i;
        }
        if (k == features.size()) throw DataError(source + ": obstacle_alpha names unknown feature '" + name + "'");
        if (!w.is_number()) throw DataError(source + ": obstacle_alpha['" + name + "'] must be a number");
        om.alpha[k] = w.get<double>();
        if (om.alpha[k] != 0.0) om.affected_features.insert(k);
    }
    try {
        om.validate();
    } catch (const EquityError& e) {
        throw DataError(source + ": " + e.what());
    }
    return om;
}

Policy policy_from_json(const nlohmann::json& j, const std::string& source) {
    if (j.is_number()) return Policy{j.get<double>()};
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity")) {
        return Policy::full_alleviation();
    }
    throw DataError(source + ": policies must be numbers or \"inf\"");
}

ModelSpace space_from_json(const nlohmann::json& j, const std::filesystem::path& base, const std::string& source) {
    ModelSpace space;
    try {
        space.dataset = load_population_csv(base / j.at("dataset").get<std::string>());
        for (const auto& s : j.at("specs")) space.candidate_specs.push_back(s.get<ModelSpec>());
        for (const auto& p : j.at("policies")) space.candidate_policies.push_back(policy_from_json(p, source));
        space.obstacle_model =
            alpha_from_json(j.value("obstacle_alpha", nlohmann::json()), space.dataset.feature_names, source);
        space.validate();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": " + e.what());
    } catch (const DomainViolation& e) {
        throw DataError(source + ": " + e.what());
    } catch (const DimensionError& e) {
        throw DataError(source + ": " + e.what());
    }
    return space;
}

}  // namespace

std::pair<ModelSpace, ModelSpace> load_model_spaces(const std::filesystem::path& path) {
    const nlohmann::json j = parse_json_file(path);
    const std::string source = path.string();
    if (!j.contains("proxy") || !j.contains("intended")) {
        throw DataError(source + ": expected \"proxy\" and \"intended\" spaces");
    }
    const auto base = path.parent_path();
    return {space_from_json(j.at("proxy"), base, source + " [proxy]"),
            space_from_json(j.at("intended"), base, source + " [intended]")};
}

GapSide parse_gap_side(const nlohmann::json& j, const std::string& source) {
    GapSide side;
    try {
        if (j.contains("spec")) {
            side.features = j.at("spec").at("feature_names").get<std::vector<std::string>>();
        } else {
            side.features = j.at("features").get<std::vector<std::string>>();
        }
        side.importance = j.at("importance").get<Vec>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": " + e.what());
    }
    if (side.importance.size() != side.features.size()) {
        throw DataError(source + ": importance and features differ in length");
    }
    side.obstacles.feature_names = side.features;
    side.obstacles.model = alpha_from_json(j.value("obstacle_alpha", nlohmann::json()), side.features, source);
    return side;
}

GapSide load_gap_side(const std::filesystem::path& path) { return parse_gap_side(parse_json_file(path), path.string()); }

}  // namespace equity
