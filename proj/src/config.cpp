#include "equity/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace equity {

std::string RegimeFlags::name() const {
    std::string s;
    s += equal_access ? "acc-eq" : "acc-ne";
    s += equal_outcome ? "_out-eq" : "_out-ne";
    s += equal_utilization ? "_util-eq" : "_util-ne";
    return s;
}

std::vector<RegimeFlags> all_regime_flags() {
    std::vector<RegimeFlags> out;
    for (int u = 0; u < 2; ++u) {
        for (int o = 0; o < 2; ++o) {
            for (int a = 0; a < 2; ++a) out.push_back({a == 1, o == 1, u == 1});
        }
    }
    return out;
}

std::string to_string(ReportFormat f) { return f == ReportFormat::json ? "json" : "csv"; }

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw DomainViolation("unknown report format '" + s + "' (expected json or csv)");
}

void RunConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainViolation("tau must lie in (0, 1]");
    if (!(tau_o >= 0.0 && tau_o < 1.0)) throw DomainViolation("tau_o must lie in [0, 1)");
    if (!(epsilon >= 0.0)) throw DomainViolation("epsilon must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DomainViolation("train_fraction must lie in (0, 1)");
    }
    if (!(access_resurfacing >= 0.0 && access_resurfacing <= 1.0)) {
        throw DomainViolation("access_resurfacing must lie in [0, 1]");
    }
    if (!(alleviation_delta >= 0.0)) throw DomainViolation("alleviation_delta must be non-negative");
    if (threshold_quantiles == 0) throw DomainViolation("threshold_quantiles must be positive");
    if (dialect != "auto" && dialect != "semicolon" && dialect != "comma") {
        throw DomainViolation("dialect must be auto, semicolon or comma");
    }
    if (out_dir.empty()) throw DomainViolation("output directory must be nonempty");
    if (formats.empty()) throw DomainViolation("at least one report format is required");
    if (loop_rounds == 0) throw DomainViolation("loop rounds must be positive");
    loop.validate();
    scoring.validate();
}

char RunConfig::delimiter() const {
    if (dialect == "semicolon") return ';';
    if (dialect == "comma") return ',';
    return 0;
}

namespace {

class Reader {
public:
    Reader(const toml::table& table, std::string where, std::string source)
        : table_(table), where_(std::move(where)), source_(std::move(source)) {}

    void allow(std::initializer_list<const char*> keys) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : table_) {
            (void)v;
            if (!allowed.count(std::string(k.str()))) fail(std::string(k.str()), "unknown key");
        }
    }

    bool has(const char* key) const { return table_.contains(key); }

    void number(const char* key, double& out) const {
        if (const auto* n = table_.get(key)) {
            if (auto v = n->value<double>()) {
                out = *v;
            } else if (auto s = n->value<std::string>(); s && (*s == "inf" || *s == "infinity")) {
                out = std::numeric_limits<double>::infinity();
            } else {
                fail(key, "expected a number");
            }
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (const auto* n = table_.get(key)) {
            const auto v = n->value_exact<std::int64_t>();
            if (!v || *v < 0) fail(key, "expected a non-negative integer");
            out = static_cast<Int>(*v);
        }
    }

    void boolean(const char* key, bool& out) const {
        if (const auto* n = table_.get(key)) {
            const auto v = n->value_exact<bool>();
            if (!v) fail(key, "expected a boolean");
            out = *v;
        }
    }

    void string(const char* key, std::string& out) const {
        if (const auto* n = table_.get(key)) {
            const auto v = n->value_exact<std::string>();
            if (!v) fail(key, "expected a string");
            out = *v;
        }
    }

    void numbers(const char* key, Vec& out) const {
        if (const auto* n = table_.get(key)) {
            const auto* arr = n->as_array();
            if (!arr) fail(key, "expected an array of numbers");
            Vec v;
            for (const auto& e : *arr) {
                const auto x = e.value<double>();
                if (!x) fail(key, "expected an array of numbers");
                v.push_back(*x);
            }
            out = std::move(v);
        }
    }

    std::vector<std::string> strings(const char* key) const {
        std::vector<std::string> out;
        const auto* n = table_.get(key);
        if (!n) return out;
        if (auto s = n->value_exact<std::string>()) return {*s};
        const auto* arr = n->as_array();
        if (!arr) fail(key, "expected a string or an array of strings");
        for (const auto& e : *arr) {
            const auto s = e.value_exact<std::string>();
            if (!s) fail(key, "expected a string or an array of strings");
            out.push_back(*s);
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw DataError(source_ + ": " + (where_.empty() ? "" : "[" + where_ + "] ") + key + ": " + what);
    }

private:
    const toml::table& table_;
    std::string where_;
    std::string source_;
};

const toml::table* subtable(const toml::table& root, const char* name, const std::string& source) {
    const auto* n = root.get(name);
    if (!n) return nullptr;
    const auto* t = n->as_table();
    if (!t) throw DataError(source + ": '" + name + "' must be a table");
    return t;
}

}  // namespace

RunConfig parse_run_config(std::string_view toml_text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        throw DataError(source + ": " + std::string(e.description()));
    }

    RunConfig cfg;
    Reader top(root, "", source);
    top.allow({"seed", "out", "format", "casestudy", "loop", "scoring"});
    if (top.has("seed")) {
        std::uint64_t seed = 0;
        top.integer("seed", seed);
        cfg.seed = cfg.loop.seed = cfg.scoring.seed = seed;
    }
    if (top.has("out")) {
        std::string out;
        top.string("out", out);
        cfg.out_dir = out;
    }
    if (top.has("format")) {
        cfg.formats.clear();
        for (const auto& f : top.strings("format")) {
            try {
                cfg.formats.push_back(report_format_from_string(f));
            } catch (const DomainViolation& e) {
                top.fail("format", e.what());
            }
        }
    }

    if (const auto* t = subtable(root, "casestudy", source)) {
        Reader r(*t, "casestudy", source);
        r.allow({"input", "dialect", "tau", "tau_o", "epsilon", "pass_mark", "train_fraction",
                 "access_resurfacing", "alleviation_delta", "threshold_quantiles", "seed", "equal_access",
                 "equal_outcome", "equal_utilization"});
        std::string input;
        r.string("input", input);
        if (!input.empty()) cfg.input = input;
        r.string("dialect", cfg.dialect);
        r.number("tau", cfg.tau);
        r.number("tau_o", cfg.tau_o);
        r.number("epsilon", cfg.epsilon);
        r.integer("pass_mark", cfg.pass_mark);
        r.number("train_fraction", cfg.train_fraction);
        r.number("access_resurfacing", cfg.access_resurfacing);
        r.number("alleviation_delta", cfg.alleviation_delta);
        r.integer("threshold_quantiles", cfg.threshold_quantiles);
        r.integer("seed", cfg.seed);
        if (r.has("equal_access") || r.has("equal_outcome") || r.has("equal_utilization")) {
            RegimeFlags flags;
            r.boolean("equal_access", flags.equal_access);
            r.boolean("equal_outcome", flags.equal_outcome);
            r.boolean("equal_utilization", flags.equal_utilization);
            cfg.regime = flags;
        }
    }

    if (const auto* t = subtable(root, "loop", source)) {
        Reader r(*t, "loop", source);
        r.allow({"rounds", "regimes", "n_per_round", "d_proxy", "d_intended", "group_fraction", "obstacle_prob",
                 "utilization_obstacle_prob", "alpha_proxy", "alpha_intended", "obstacle_severity",
                 "true_proxy_coefficients", "true_intended_coefficients", "label_noise",
                 "feature_correlation", "group_as_feature", "seed"});
        SyntheticConfig& l = cfg.loop;
        r.integer("rounds", cfg.loop_rounds);
        if (r.has("regimes")) {
            cfg.loop_regimes.clear();
            for (const auto& s : r.strings("regimes")) {
                try {
                    cfg.loop_regimes.push_back(regime_from_string(s));
                } catch (const DomainViolation& e) {
                    r.fail("regimes", e.what());
                }
            }
        }
        r.integer("n_per_round", l.n_per_round);
        r.integer("d_proxy", l.d_proxy);
        r.integer("d_intended", l.d_intended);
        r.number("group_fraction", l.group_fraction);
        auto pair = [&](const char* key, std::array<double, 2>& out) {
            Vec v;
            r.numbers(key, v);
            if (!r.has(key)) return;
            if (v.size() != 2) r.fail(key, "expected two numbers (group 0, group 1)");
            out = {v[0], v[1]};
        };
        pair("obstacle_prob", l.obstacle_prob_by_group);
        pair("utilization_obstacle_prob", l.utilization_obstacle_prob_by_group);
        r.numbers("alpha_proxy", l.alpha_proxy);
        r.numbers("alpha_intended", l.alpha_intended);
        r.number("obstacle_severity", l.obstacle_severity);
        r.numbers("true_proxy_coefficients", l.true_proxy_coefficients);
        r.numbers("true_intended_coefficients", l.true_intended_coefficients);
        r.number("label_noise", l.label_noise);
        r.number("feature_correlation", l.feature_correlation);
        r.boolean("group_as_feature", l.group_as_feature);
        r.integer("seed", l.seed);
    }

    if (const auto* t = subtable(root, "scoring", source)) {
        Reader r(*t, "scoring", source);
        r.allow({"tau", "tau_o", "max_outer_iters", "max_inner_iters", "epsilon_outcomes", "train_fraction",
                 "seed"});
        ScoringConfig& s = cfg.scoring;
        r.number("tau", s.tau);
        r.number("tau_o", s.tau_o);
        r.integer("max_outer_iters", s.max_outer_iters);
        r.integer("max_inner_iters", s.max_inner_iters);
        r.number("epsilon_outcomes", s.epsilon_outcomes);
        r.number("train_fraction", s.train_fraction);
        r.integer("seed", s.seed);
    }

    try {
        cfg.validate();
    } catch (const DomainViolation& e) {
        throw DataError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.string());
}

}  // namespace equity
