#include "equity/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace equity {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kInitScale = 0.01;

void check_shapes(const Matrix& features, const Labels& labels, std::size_t dim) {
    if (features.size() != labels.size()) {
        throw DimensionError("feature rows (" + std::to_string(features.size()) +
                             ") and labels (" + std::to_string(labels.size()) + ") differ");
    }
    for (std::size_t r = 0; r < features.size(); ++r) {
        if (features[r].size() != dim) {
            throw DimensionError("row " + std::to_string(r) + " has " +
                                 std::to_string(features[r].size()) + " columns, expected " +
                                 std::to_string(dim));
        }
        for (double v : features[r]) {
            if (!std::isfinite(v)) {
                throw DomainViolation("non-finite feature value in row " + std::to_string(r));
            }
        }
        if (labels[r] != 0 && labels[r] != 1) {
            throw DomainViolation("non-binary label in row " + std::to_string(r));
        }
    }
}

double l2_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

Vec standardize(const TrainedModel& m, std::span<const double> x) {
    Vec out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = (x[k] - m.feature_mean[k]) / m.feature_scale[k];
    }
    return out;
}

double linear(std::span<const double> w, double b, std::span<const double> row) {
    double t = b;
    for (std::size_t k = 0; k < w.size(); ++k) t += w[k] * row[k];
    return t;
}

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

void fit_logistic(TrainedModel& m, const Matrix& features, const Labels& labels,
                  std::uint64_t seed) {
    const std::size_t d = m.dim();
    const std::size_t n = features.size();
    const auto& hp = m.spec.hyperparams;

    m.feature_mean.assign(d, 0.0);
    m.feature_scale.assign(d, 1.0);
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (const auto& row : features) mean += row[k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : features) var += (row[k] - mean) * (row[k] - mean);
        var /= static_cast<double>(n);
        m.feature_mean[k] = mean;
        m.feature_scale[k] = var < kVarianceFloor ? 1.0 : std::sqrt(var);
    }

    Matrix std_rows;
    std_rows.reserve(n);
    for (const auto& row : features) std_rows.push_back(standardize(m, row));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, kInitScale);
    Vec w(d);
    for (double& v : w) v = init(rng);
    double b = 0.0;

    for (int it = 0; it < hp.iterations; ++it) {
        const Vec g = regularized_log_loss_gradient(w, b, std_rows, labels, hp.l2);
        for (std::size_t k = 0; k < d; ++k) w[k] -= hp.learning_rate * g[k];
        b -= hp.learning_rate * g[d];
    }
    m.coefficients = std::move(w);
    m.intercept = b;
    m.importance = normalize_importance(m.coefficients);
}

void fit_norm_threshold(TrainedModel& m, const Matrix& features, const Labels& labels) {
    const std::size_t d = m.dim();
    m.coefficients.assign(d, 0.0);
    m.importance.assign(d, 0.0);
    m.feature_mean.assign(d, 0.0);
    m.feature_scale.assign(d, 1.0);
    if (m.spec.hyperparams.norm_threshold) {
        m.threshold = *m.spec.hyperparams.norm_threshold;
        return;
    }

    Vec norms;
    norms.reserve(features.size());
    for (const auto& row : features) norms.push_back(l2_norm(row));
    Vec candidates = norms;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    Vec thresholds{candidates.front()};
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        thresholds.push_back(0.5 * (candidates[i - 1] + candidates[i]));
    }
    thresholds.push_back(candidates.back() + 1.0);

    std::size_t best_err = features.size() + 1;
    for (double t : thresholds) {
        std::size_t err = 0;
        for (std::size_t r = 0; r < norms.size(); ++r) {
            err += static_cast<std::size_t>((norms[r] >= t ? 1 : 0) != labels[r]);
        }
        if (err < best_err) {
            best_err = err;
            m.threshold = t;
        }
    }
}

}  // namespace

std::string to_string(FunctionClass c) {
    switch (c) {
        case FunctionClass::logistic_regression: return "logistic_regression";
        case FunctionClass::norm_threshold: return "norm_threshold";
    }
    return "unknown";
}

FunctionClass function_class_from_string(const std::string& s) {
    if (s == "logistic_regression") return FunctionClass::logistic_regression;
    if (s == "norm_threshold") return FunctionClass::norm_threshold;
    throw DataError("unknown function class: " + s);
}

void ModelSpec::validate() const {
    if (feature_names.empty()) throw DomainViolation("model spec '" + name + "' has no features");
    std::unordered_set<std::string> seen;
    for (const auto& f : feature_names) {
        if (!seen.insert(f).second) {
            throw DomainViolation("model spec '" + name + "' repeats feature " + f);
        }
    }
    const auto& hp = hyperparams;
    if (!(hp.learning_rate > 0.0) || hp.iterations < 0 || !(hp.l2 >= 0.0)) {
        throw DomainViolation("model spec '" + name + "' has invalid hyperparameters");
    }
    if (!(hp.decision_threshold > 0.0 && hp.decision_threshold < 1.0)) {
        throw DomainViolation("decision_threshold must lie in (0, 1)");
    }
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

TrainedModel train(const ModelSpec& spec, const Matrix& features, const Labels& labels,
                   std::uint64_t seed) {
    spec.validate();
    check_shapes(features, labels, spec.feature_names.size());
    if (features.size() < 2) throw DomainViolation("training needs at least 2 rows");
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<long>(labels.size())) {
        throw DomainViolation("training labels contain a single class");
    }

    TrainedModel m;
    m.spec = spec;
    switch (spec.function_class) {
        case FunctionClass::logistic_regression: fit_logistic(m, features, labels, seed); break;
        case FunctionClass::norm_threshold: fit_norm_threshold(m, features, labels); break;
    }
    return m;
}

double score(const TrainedModel& model, std::span<const double> x_rev) {
    if (x_rev.size() != model.dim()) {
        throw DimensionError("model '" + model.spec.name + "' expects " +
                             std::to_string(model.dim()) + " features, got " +
                             std::to_string(x_rev.size()));
    }
    if (model.spec.function_class == FunctionClass::norm_threshold) return l2_norm(x_rev);
    const Vec s = standardize(model, x_rev);
    return sigmoid(linear(model.coefficients, model.intercept, s));
}

int predict(const TrainedModel& model, std::span<const double> x_rev) {
    const double s = score(model, x_rev);
    const double cut = model.spec.function_class == FunctionClass::norm_threshold
                           ? model.threshold
                           : model.spec.hyperparams.decision_threshold;
    return s >= cut ? 1 : 0;
}

Labels predict(const TrainedModel& model, const Matrix& rows) {
    Labels out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(predict(model, r));
    return out;
}

double loss(const TrainedModel& model, const Matrix& features, const Labels& labels) {
    if (features.empty()) throw DomainViolation("loss of an empty dataset is undefined");
    check_shapes(features, labels, model.dim());
    double total = 0.0;
    if (model.spec.function_class == FunctionClass::norm_threshold) {
        for (std::size_t r = 0; r < features.size(); ++r) {
            total += predict(model, features[r]) != labels[r] ? 1.0 : 0.0;
        }
    } else {
        for (std::size_t r = 0; r < features.size(); ++r) {
            const double t = linear(model.coefficients, model.intercept, standardize(model, features[r]));
            total += softplus(t) - labels[r] * t;
        }
    }
    return total / static_cast<double>(features.size());
}

const Vec& feature_importance(const TrainedModel& model) { return model.importance; }

Vec normalize_importance(std::span<const double> coefficients) {
    double l1 = 0.0;
    for (double c : coefficients) l1 += std::abs(c);
    Vec out(coefficients.size(), 0.0);
    if (l1 == 0.0) return out;
    for (std::size_t k = 0; k < coefficients.size(); ++k) out[k] = coefficients[k] / l1;
    return out;
}

double regularized_log_loss(std::span<const double> w, double b, const Matrix& std_rows,
                            const Labels& labels, double l2) {
    double total = 0.0;
    for (std::size_t r = 0; r < std_rows.size(); ++r) {
        const double t = linear(w, b, std_rows[r]);
        total += softplus(t) - labels[r] * t;
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return total / static_cast<double>(std_rows.size()) + 0.5 * l2 * reg;
}

Vec regularized_log_loss_gradient(std::span<const double> w, double b, const Matrix& std_rows,
                                  const Labels& labels, double l2) {
    const std::size_t d = w.size();
    Vec g(d + 1, 0.0);
    for (std::size_t r = 0; r < std_rows.size(); ++r) {
        const double err = sigmoid(linear(w, b, std_rows[r])) - labels[r];
        for (std::size_t k = 0; k < d; ++k) g[k] += err * std_rows[r][k];
        g[d] += err;
    }
    const double n = static_cast<double>(std_rows.size());
    for (std::size_t k = 0; k < d; ++k) g[k] = g[k] / n + l2 * w[k];
    g[d] /= n;
    return g;
}

// ----------------------------------------------------------------------------
// JSON
// ----------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ModelSpec& s) {
    const auto& hp = s.hyperparams;
    j = nlohmann::json{{"name", s.name},
                       {"feature_names", s.feature_names},
                       {"function_class", to_string(s.function_class)},
                       {"hyperparams",
                        {{"learning_rate", hp.learning_rate},
                         {"iterations", hp.iterations},
                         {"l2", hp.l2},
                         {"decision_threshold", hp.decision_threshold},
                         {"norm_threshold", hp.norm_threshold ? nlohmann::json(*hp.norm_threshold)
                                                              : nlohmann::json(nullptr)}}}};
}

void from_json(const nlohmann::json& j, ModelSpec& s) {
    s.name = j.value("name", std::string{});
    s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    s.function_class =
        function_class_from_string(j.value("function_class", std::string{"logistic_regression"}));
    if (j.contains("hyperparams")) {
        const auto& h = j.at("hyperparams");
        auto& hp = s.hyperparams;
        hp.learning_rate = h.value("learning_rate", hp.learning_rate);
        hp.iterations = h.value("iterations", hp.iterations);
        hp.l2 = h.value("l2", hp.l2);
        hp.decision_threshold = h.value("decision_threshold", hp.decision_threshold);
        if (h.contains("norm_threshold") && !h.at("norm_threshold").is_null()) {
            hp.norm_threshold = h.at("norm_threshold").get<double>();
        }
    }
}

void to_json(nlohmann::json& j, const TrainedModel& m) {
    j = nlohmann::json{{"spec", m.spec},
                       {"coefficients", m.coefficients},
                       {"intercept", m.intercept},
                       {"feature_mean", m.feature_mean},
                       {"feature_scale", m.feature_scale},
                       {"threshold", m.threshold},
                       {"importance", m.importance}};
}

void from_json(const nlohmann::json& j, TrainedModel& m) {
    m.spec = j.at("spec").get<ModelSpec>();
    m.coefficients = j.at("coefficients").get<Vec>();
    m.intercept = j.at("intercept").get<double>();
    m.feature_mean = j.at("feature_mean").get<Vec>();
    m.feature_scale = j.at("feature_scale").get<Vec>();
    m.threshold = j.value("threshold", 0.0);
    m.importance = j.at("importance").get<Vec>();
    const std::size_t d = m.spec.feature_names.size();
    if (m.coefficients.size() != d || m.feature_mean.size() != d || m.feature_scale.size() != d ||
        m.importance.size() != d) {
        throw DataError("trained model JSON has inconsistent vector lengths");
    }
}

}  // namespace equity
