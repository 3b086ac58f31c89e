#include "equity/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace equity {

namespace {

struct Cell {
    std::string metric;
    std::string group;
    double value;
};

std::vector<Cell> cells_of(const EquityReport& r) {
    std::vector<Cell> out;
    auto per_group = [&](const std::string& metric, const std::map<int, double>& m) {
        for (const auto& [g, v] : m) out.push_back({metric, std::to_string(g), v});
    };
    out.push_back({"psi", "all", r.access.psi});
    per_group("psi", r.access.per_group);
    out.push_back({"eo_violation", "all", r.outcome.eo_violation});
    per_group("tpr", r.outcome.tpr_by_group);
    per_group("fpr", r.outcome.fpr_by_group);
    out.push_back({"zeta", "all", r.utilization.zeta});
    out.push_back({"m", "all", static_cast<double>(r.utilization.m)});
    out.push_back({"true_positive_share", "all", r.utilization.true_positive_share});
    out.push_back({"false_positive_share", "all", r.utilization.false_positive_share});
    per_group("fp_share", r.utilization.per_group_fp_share);
    per_group("fp_composition", r.utilization.fp_composition);
    if (r.gaps) {
        for (std::size_t k = 0; k < r.gaps->gamma_x.size(); ++k) {
            out.push_back({"gamma_x_" + std::to_string(k), "all", static_cast<double>(r.gaps->gamma_x[k])});
        }
        for (std::size_t k = 0; k < r.gaps->gamma_l.size(); ++k) {
            out.push_back({"gamma_l_" + std::to_string(k), "all", r.gaps->gamma_l[k]});
        }
        out.push_back({"obstacle_gap_unmatched", "all",
                       static_cast<double>(r.gaps->obstacle_gap.unmatched_affected_features)});
        out.push_back({"obstacle_gap_alpha_l1", "all", r.gaps->obstacle_gap.alpha_l1_distance_on_matched});
    }
    out.push_back({"score", "all", r.score});
    return out;
}

}  // namespace

std::size_t report_csv_cells(const EquityReport& report) { return cells_of(report).size(); }

std::string report_csv(const std::vector<NamedReport>& reports, bool header) {
    std::ostringstream os;
    os << std::setprecision(17);
    if (header) os << "regime,metric,group,value\n";
    for (const auto& [name, report] : reports) {
        for (const Cell& c : cells_of(report)) {
            os << name << ',' << c.metric << ',' << c.group << ',';
            if (std::isnan(c.value)) {
                os << "nan";
            } else {
                os << c.value;
            }
            os << '\n';
        }
    }
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw DataError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<std::filesystem::path> emit_report(const std::vector<NamedReport>& reports, ReportFormat format,
                                               const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    for (const auto& named : reports) {
        const std::filesystem::path path = out_dir / (named.first + (format == ReportFormat::json ? ".json" : ".csv"));
        if (format == ReportFormat::json) {
            write_text_file(path, nlohmann::json(named.second).dump(2) + "\n");
        } else {
            write_text_file(path, report_csv({named}));
        }
        written.push_back(path);
    }
    return written;
}

// ============================================================================
// CHECKLIST
// ============================================================================

const std::vector<ChecklistSection>& checklist() {
    static const std::vector<ChecklistSection> sections{
        {"Selection of the proxy model",
         {"What class of model functions would be the best to use, H_P?",
          "What features will be the most predictive?",
          "Given a selection of features, X_P, what access obstacles, O_P, will individuals face to access "
          "this model?",
          "Who is most likely to face the most (fewest) access obstacles?",
          "Which policy can alleviate the obstacles individuals face? Do I have the policy, Φ_P, to alleviate "
          "the obstacles? What is the model access Ψ_P?",
          "How well does the model function perform on individuals in different groups, Ω(P) ?",
          "How would a change in features affect accuracy, obstacles faced, and model access Ψ_P ?",
          "How well does this model reflect the physical and social environment in which decisions take form?",
          "Does the chosen model achieve equal access or optimal access threshold score?"}},
        {"Selection of evaluation model",
         {"What class of evaluation model functions would be the best to use, H_T?",
          "What are features I am I using for evaluation? What is the feature proxy gap, Γ_X(X_P, X_T)?",
          "What is the label proxy gap, Γ_L(h_P, h_T)?",
          "Given a selection of evaluation features, X_T, what utilization obstacles will individuals face to "
          "utilize the model?",
          "What is the obstacle gap?",
          "Who is most likely to face the most (fewest) utilization obstacles?",
          "If I changed the features, would that increase (decrease) the accuracy of evaluation results and "
          "increase (decrease) utilization obstacles faced?",
          "Which policy can alleviate the utilization obstacles individuals face? Do I have the policy, Φ_T, "
          "to alleviate the utilization obstacles?",
          "How well does the evaluation model function perform on individuals in different groups?",
          "Does the chosen model achieve equal utilization or optimal utilization threshold score?"}},
        {"Curation of ground truth",
         {"Given the obstacle gap, label proxy gap, Γ_L(h_P, h_T), and feature proxy gap, Γ_X(X_P, X_T), "
          "should I use proxy or evaluation model features/labels or both?",
          "If I choose these features/labels, given utilization, ζ(P), access, Ψ(P), and outcome, Ω(P), who "
          "is most likely to be misrepresented in the new ground truth? Do I exhaustively capture obstacles "
          "individuals face?"}},
    };
    return sections;
}

std::string emit_checklist() {
    std::ostringstream os;
    os << "Guiding questions for an equitable decision-making model\n";
    for (const auto& s : checklist()) {
        os << '\n' << s.task << '\n';
        for (std::size_t i = 0; i < s.questions.size(); ++i) {
            os << "  " << (i + 1) << ") " << s.questions[i] << '\n';
        }
    }
    return os.str();
}

}  // namespace equity
