#pragma once

// Model-function class used for both proxy and intended models: L2-regularised
// logistic regression fitted by full-batch gradient descent on standardised
// features, and a fixed norm-threshold classifier.

#include "equity/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace equity {

using Matrix = std::vector<Vec>;   // row-major, one row per individual
using Labels = std::vector<int>;

enum class FunctionClass { logistic_regression, norm_threshold };

std::string to_string(FunctionClass c);
FunctionClass function_class_from_string(const std::string& s);

struct Hyperparams {
    double learning_rate = 0.1;
    int iterations = 2000;
    double l2 = 1e-4;
    double decision_threshold = 0.5;
    // Norm-threshold class: fixed threshold. When unset, train() picks the
    // training-error minimiser among midpoints of sorted norms.
    std::optional<double> norm_threshold;
};

struct ModelSpec {
    std::string name;
    std::vector<std::string> feature_names;
    FunctionClass function_class = FunctionClass::logistic_regression;
    Hyperparams hyperparams;

    void validate() const;
};

struct TrainedModel {
    ModelSpec spec;
    Vec coefficients;        // standardised-feature space
    double intercept = 0.0;
    Vec feature_mean;
    Vec feature_scale;
    double threshold = 0.0;  // norm-threshold class only
    Vec importance;          // signed, L1-normalised coefficients

    std::size_t dim() const { return spec.feature_names.size(); }
};

TrainedModel train(const ModelSpec& spec, const Matrix& features, const Labels& labels,
                   std::uint64_t seed);

// Sigmoid score for logistic models, ||x||_2 for norm-threshold models.
double score(const TrainedModel& model, std::span<const double> x_rev);
int predict(const TrainedModel& model, std::span<const double> x_rev);
Labels predict(const TrainedModel& model, const Matrix& rows);

// Mean log-loss for logistic models, 0/1 error rate for norm-threshold models.
double loss(const TrainedModel& model, const Matrix& features, const Labels& labels);

const Vec& feature_importance(const TrainedModel& model);

// Signed L1 normalisation; an all-zero input stays all-zero.
Vec normalize_importance(std::span<const double> coefficients);

// Objective minimised by train(), on already-standardised rows:
//   mean log-loss + (l2 / 2) * ||w||^2   (intercept unregularised)
double regularized_log_loss(std::span<const double> w, double b, const Matrix& std_rows,
                            const Labels& labels, double l2);

// Analytic gradient of regularized_log_loss; the last element is d/db.
Vec regularized_log_loss_gradient(std::span<const double> w, double b, const Matrix& std_rows,
                                  const Labels& labels, double l2);

double sigmoid(double t);

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);
void to_json(nlohmann::json& j, const TrainedModel& m);
void from_json(const nlohmann::json& j, TrainedModel& m);

}  // namespace equity
