#pragma once

// Comma-separated population files:
//   id,grp,y,y_prime,x:<feature>...,z:<feature>...
// Every feature needs both an x: and a z: column; feature order follows the
// x: columns.

#include "equity/core.hpp"
#include "equity/metrics.hpp"
#include "equity/scoring.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace equity {

Population parse_population_csv(std::string_view content, const std::string& source = "<memory>");
Population load_population_csv(const std::filesystem::path& path);
std::string population_csv(const Population& pop);

// Audit input: comma-separated with columns pred,label,group and an optional
// y_tt column holding the intended-model outcome of each row.
struct AuditTable {
    std::vector<int> pred, label, group;
    std::vector<int> y_tt;   // empty when the column is absent
};

AuditTable parse_audit_csv(std::string_view content, const std::string& source = "<memory>");
AuditTable load_audit_csv(const std::filesystem::path& path);

// Scoring spaces declared in JSON:
//   {"proxy": SPACE, "intended": SPACE}
//   SPACE = {"dataset": "<population csv, relative to the JSON file>",
//            "specs": [ModelSpec...],
//            "policies": [0, 0.5, "inf"],
//            "obstacle_alpha": {"<feature>": weight, ...}}
std::pair<ModelSpace, ModelSpace> load_model_spaces(const std::filesystem::path& path);

// One side of a proxy-gap comparison:
//   {"features": [...], "importance": [...], "obstacle_alpha": {"<feature>": weight}}
// A serialized trained model is accepted as well; its spec supplies the
// features and its importance vector the weights.
struct GapSide {
    std::vector<std::string> features;
    Vec importance;
    NamedObstacleModel obstacles;
};

GapSide parse_gap_side(const nlohmann::json& j, const std::string& source = "<memory>");
GapSide load_gap_side(const std::filesystem::path& path);

}  // namespace equity
