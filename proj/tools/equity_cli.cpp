// Command-line front end: audit, score, casestudy, simulate-loop, gaps, questions.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 degenerate metric.

#include "equity/case_study.hpp"
#include "equity/config.hpp"
#include "equity/loop_sim.hpp"
#include "equity/metrics.hpp"
#include "equity/population_io.hpp"
#include "equity/report.hpp"
#include "equity/scoring.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace equity;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
    std::string format;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
    if (!g.out.empty()) cfg.out_dir = g.out;
    if (!g.format.empty()) cfg.formats = {report_format_from_string(g.format)};
    return cfg;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// ============================================================================
// SUBCOMMANDS
// ============================================================================

int cmd_audit(const RunConfig& cfg, const std::string& input) {
    const AuditTable t = load_audit_csv(input);
    const OutcomeReport outcome = eo_violation(t.pred, t.label, t.group, cfg.epsilon);
    nlohmann::json j{{"n", t.pred.size()}, {"outcome", outcome}};
    std::vector<std::pair<std::string, std::pair<std::string, double>>> cells{
        {"eo_violation", {"all", outcome.eo_violation}}};
    for (const auto& [g, v] : outcome.tpr_by_group) cells.push_back({"tpr", {std::to_string(g), v}});
    for (const auto& [g, v] : outcome.fpr_by_group) cells.push_back({"fpr", {std::to_string(g), v}});
    if (!t.y_tt.empty()) {
        std::vector<EvaluationRecord> records;
        for (std::size_t i = 0; i < t.pred.size(); ++i) {
            if (t.pred[i] == 1) records.push_back({"row" + std::to_string(i + 1), t.group[i], 1, t.y_tt[i]});
        }
        const UtilizationReport util = utilization(records);
        j["utilization"] = util;
        cells.push_back({"zeta", {"all", util.zeta}});
        for (const auto& [g, v] : util.per_group_fp_share) cells.push_back({"fp_share", {std::to_string(g), v}});
    }
    for (ReportFormat f : cfg.formats) {
        if (f == ReportFormat::json) {
            write_text_file(cfg.out_dir / "audit.json", j.dump(2) + "\n");
        } else {
            std::ostringstream os;
            os << std::setprecision(17) << "metric,group,value\n";
            for (const auto& [metric, gv] : cells) os << metric << ',' << gv.first << ',' << gv.second << '\n';
            write_text_file(cfg.out_dir / "audit.csv", os.str());
        }
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_score(RunConfig cfg, const Globals& g, const std::string& spaces_path, bool check_gaps) {
    if (g.seed) cfg.scoring.seed = cfg.loop.seed = *g.seed;
    const auto [proxy, intended] =
        spaces_path.empty() ? synthetic_benchmark_spaces(cfg.loop) : load_model_spaces(spaces_path);

    nlohmann::json pre;
    if (check_gaps) {
        // Optional pre-step: name-level gaps of the first declared specs.
        const ModelSpec& ps = proxy.candidate_specs.front();
        const ModelSpec& is = intended.candidate_specs.front();
        const NamedObstacleModel po{project(proxy.obstacle_model, proxy.dataset, ps.feature_names), ps.feature_names};
        const NamedObstacleModel io{project(intended.obstacle_model, intended.dataset, is.feature_names),
                                    is.feature_names};
        pre = {{"proxy_spec", ps.name},
               {"intended_spec", is.name},
               {"gamma_x", feature_proxy_gap(ps.feature_names, is.feature_names)},
               {"obstacle_gap", obstacle_gap(po, io)}};
    }

    const ScoringTrace trace = run_equity_scoring(proxy, intended, cfg.scoring);
    for (ReportFormat f : cfg.formats) {
        if (f == ReportFormat::json) {
            nlohmann::json j = trace;
            j["config"] = cfg.scoring;
            if (check_gaps) j["pre_gaps"] = pre;
            write_text_file(cfg.out_dir / "score_trace.json", j.dump(2) + "\n");
        } else {
            write_text_file(cfg.out_dir / "score_trace.csv", trace_csv(trace));
        }
    }
    if (check_gaps) std::cout << "pre-check gaps: " << pre.dump() << '\n';
    std::cout << "terminated: " << trace.terminated_reason << "  evaluations: " << trace.records.size()
              << "  score: " << fmt(trace.score) << "  (psi " << fmt(trace.psi) << ", omega " << fmt(trace.omega)
              << ", zeta " << fmt(trace.zeta) << ")\n";
    return 0;
}

int cmd_casestudy(RunConfig cfg, const Globals& g, const std::string& input, const std::string& regime,
                  const std::string& save_models) {
    if (g.seed) cfg.seed = *g.seed;
    if (!input.empty()) cfg.input = input;
    if (!regime.empty()) {
        bool found = false;
        for (const auto& f : all_regime_flags()) {
            if (f.name() == regime) {
                cfg.regime = f;
                found = true;
            }
        }
        if (!found) throw DomainViolation("unknown regime '" + regime + "'");
    }
    const CaseStudyResult result = run_case_study(cfg);

    std::vector<NamedReport> reports;
    for (const auto& rr : result.regimes) {
        if (rr.report) reports.emplace_back(rr.name(), *rr.report);
    }
    for (ReportFormat f : cfg.formats) {
        emit_report(reports, f, cfg.out_dir / "regimes");
        if (f == ReportFormat::json) {
            write_text_file(cfg.out_dir / "casestudy.json", nlohmann::json(result).dump(2) + "\n");
        } else {
            write_text_file(cfg.out_dir / "casestudy_long.csv", report_csv(reports));
        }
    }
    if (!save_models.empty()) {
        const std::filesystem::path dir(save_models);
        write_text_file(dir / "admissibility.json",
                        model_document(result.proxy_model, result.proxy_obstacles).dump(2) + "\n");
        write_text_file(dir / "performance.json",
                        model_document(result.intended_model, result.intended_obstacles).dump(2) + "\n");
    }
    write_text_file(cfg.out_dir / "admissibility_by_sex.csv", admissibility_table_csv(result));
    write_text_file(cfg.out_dir / "eo_violation.csv", eo_table_csv(result));
    write_text_file(cfg.out_dir / "utilization_shares.csv", utilization_table_csv(result));

    std::cout << "students " << result.students << ", flagged " << result.flagged << ", evaluated "
              << result.test_size << "\n";
    std::cout << std::left << std::setw(24) << "regime" << std::setw(10) << "psi" << std::setw(10) << "omega"
              << std::setw(10) << "tp_share" << std::setw(10) << "pos_M" << std::setw(10) << "pos_F"
              << "score\n";
    for (const auto& rr : result.regimes) {
        std::cout << std::setw(24) << rr.name();
        if (!rr.report) {
            std::cout << "degenerate: " << rr.error << '\n';
            continue;
        }
        std::cout << std::setw(10) << fmt(rr.report->access.psi) << std::setw(10)
                  << fmt(rr.report->outcome.eo_violation) << std::setw(10)
                  << fmt(rr.report->utilization.true_positive_share) << std::setw(10) << fmt(rr.positive_rate[0])
                  << std::setw(10) << fmt(rr.positive_rate[1]) << fmt(rr.report->score) << '\n';
    }
    return reports.empty() ? kExitDegenerate : 0;
}

int cmd_loop(RunConfig cfg, const Globals& g, std::size_t rounds, const std::vector<std::string>& regimes) {
    if (g.seed) cfg.loop.seed = *g.seed;
    if (rounds > 0) cfg.loop_rounds = rounds;
    if (!regimes.empty()) {
        cfg.loop_regimes.clear();
        for (const auto& r : regimes) cfg.loop_regimes.push_back(regime_from_string(r));
    }
    std::vector<LoopTrajectory> runs;
    for (Regime r : cfg.loop_regimes) runs.push_back(run_inequity_loop(cfg.loop, cfg.loop_rounds, r));
    for (ReportFormat f : cfg.formats) {
        if (f == ReportFormat::json) {
            write_text_file(cfg.out_dir / "loop_trajectory.json", nlohmann::json(runs).dump(2) + "\n");
        } else {
            write_text_file(cfg.out_dir / "loop_trajectory.csv", trajectory_csv(runs));
        }
    }
    for (const auto& t : runs) {
        double mean_zeta = 0.0, max_gap = 0.0;
        std::size_t n = 0;
        for (const auto& r : t.rounds) {
            if (std::isnan(r.zeta)) continue;
            mean_zeta += r.zeta;
            ++n;
            max_gap = std::max(max_gap, std::abs(r.fp_share[0] - r.fp_share[1]));
        }
        std::cout << std::left << std::setw(20) << to_string(t.regime) << "rounds " << t.rounds.size()
                  << "  mean zeta " << fmt(n ? mean_zeta / static_cast<double>(n) : std::nan(""))
                  << "  max fp-share gap " << fmt(max_gap) << "  events " << t.events.size() << '\n';
    }
    return 0;
}

int cmd_gaps(const RunConfig& cfg, const std::string& proxy_path, const std::string& intended_path) {
    const GapSide p = load_gap_side(proxy_path);
    const GapSide t = load_gap_side(intended_path);
    const GapReport gaps = proxy_gaps(p.features, p.importance, t.features, t.importance, p.obstacles, t.obstacles);
    const nlohmann::json j{{"proxy_features", p.features}, {"intended_features", t.features}, {"gaps", gaps}};
    for (ReportFormat f : cfg.formats) {
        if (f == ReportFormat::json) {
            write_text_file(cfg.out_dir / "gaps.json", j.dump(2) + "\n");
        } else {
            std::ostringstream os;
            os << std::setprecision(17) << "intended_feature,gamma_x,gamma_l\n";
            for (std::size_t k = 0; k < t.features.size(); ++k) {
                os << t.features[k] << ',' << gaps.gamma_x[k] << ',' << gaps.gamma_l[k] << '\n';
            }
            write_text_file(cfg.out_dir / "gaps.csv", os.str());
        }
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_questions(const Globals& g) {
    const std::string text = emit_checklist();
    if (!g.out.empty()) write_text_file(std::filesystem::path(g.out) / "questions.txt", text);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equity auditing and inequity-loop simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Random seed for the selected command");
    app.add_option("--config", g.config, "TOML configuration file");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    std::string audit_input;
    auto* audit = app.add_subcommand("audit", "Outcome and utilization metrics from a pred,label,group CSV");
    audit->add_option("--input", audit_input, "Audit CSV")->required();

    std::string spaces_path;
    bool check_gaps = false;
    auto* score = app.add_subcommand("score", "Equity scoring over proxy and intended model spaces");
    score->add_option("--spaces", spaces_path, "JSON declaration of the two model spaces (default: synthetic benchmark)");
    score->add_flag("--check-gaps", check_gaps, "Report feature and obstacle gaps before scoring");

    std::string cs_input, cs_regime, cs_save;
    auto* casestudy = app.add_subcommand("casestudy", "Student-admission case study over the UCI student file");
    casestudy->add_option("--input", cs_input, "UCI student CSV (semicolon-delimited)");
    casestudy->add_option("--regime", cs_regime, "Run a single regime, e.g. acc-eq_out-ne_util-ne");
    casestudy->add_option("--save-models", cs_save, "Directory for the trained proxy and intended models (JSON)");

    std::size_t loop_rounds = 0;
    std::vector<std::string> loop_regimes;
    auto* loop = app.add_subcommand("simulate-loop", "Multi-round ground-truth curation loop");
    loop->add_option("--rounds", loop_rounds, "Number of rounds");
    loop->add_option("--regime", loop_regimes, "Regimes to run (repeatable)")
        ->check(CLI::IsMember({"no_equity", "access_only", "access_and_outcome", "full_equity"}));

    std::string gap_proxy, gap_intended;
    auto* gaps = app.add_subcommand("gaps", "Feature, label and obstacle proxy gaps from model-spec files");
    gaps->add_option("--proxy", gap_proxy, "Proxy model JSON (gap spec or saved model)")->required();
    gaps->add_option("--intended", gap_intended, "Intended model JSON (gap spec or saved model)")->required();

    auto* questions = app.add_subcommand("questions", "Print the guiding-questions checklist");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        if (*questions) return cmd_questions(g);
        const RunConfig cfg = resolve_config(g);
        if (*audit) return cmd_audit(cfg, audit_input);
        if (*score) return cmd_score(cfg, g, spaces_path, check_gaps);
        if (*casestudy) return cmd_casestudy(cfg, g, cs_input, cs_regime, cs_save);
        if (*loop) return cmd_loop(cfg, g, loop_rounds, loop_regimes);
        if (*gaps) return cmd_gaps(cfg, gap_proxy, gap_intended);
    } catch (const UndefinedMetricError& e) {
        std::cerr << "degenerate metric: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const EquityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
