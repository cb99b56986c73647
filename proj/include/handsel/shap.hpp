#pragma once

#include <span>
#include <string>
#include <vector>

#include "handsel/matrix.hpp"
#include "handsel/trees.hpp"

namespace handsel {

struct ShapExplanation {
    std::vector<double> base_value;                 // per output
    std::vector<std::vector<double>> contributions; // [output][feature]
    std::vector<double> prediction;                 // per output
    std::vector<std::string> feature_names;
    std::vector<double> feature_values; // the explained instance

    // base_value + sum(contributions) for one output; equals prediction up
    // to the documented 1e-8 additivity residual
    double reconstructed(int output) const;
};

// Cover-weighted expectation of the model output (one entry per output):
// per tree the weighted mean of leaf values, combined per ensemble kind.
std::vector<double> expected_value(const TreeEnsemble& model);

// Exact path-dependent Shapley attributions: walks every decision path,
// tracking the fraction of cover-weighted subsets that flow hot (following
// x) and cold, with exact polynomial weights per path depth. Classification
// models are explained in their raw output space (class frequencies for
// forests, pre-softmax scores for boosting) where additivity is exact.
ShapExplanation tree_shap(const TreeEnsemble& model, std::span<const double> x);

// Independent oracle: enumerates all feature subsets (n_features <= 12) and
// applies the factorial Shapley weights to the cover-weighted tree-walk
// value function. Exponential; test and validation use only.
ShapExplanation shap_bruteforce(const TreeEnsemble& model, std::span<const double> x);

struct ImportanceEntry {
    std::string feature;
    double importance;
    bool operator==(const ImportanceEntry&) const = default;
};

// Mean |contribution| over all rows (summed across outputs for multi-output
// models), sorted descending with ties broken by feature name.
std::vector<ImportanceEntry> global_importance(const TreeEnsemble& model, const Matrix& X);
void write_importance(const std::string& path, const std::vector<ImportanceEntry>& entries);

// Force-plot data: one CSV row per feature sorted by signed contribution
// (descending), then base_value and prediction rows; headed by a
// "# Prediction: <n> goals" annotation line.
void export_force_data(const ShapExplanation& explanation, int output, const std::string& path);

struct ForceData {
    double base_value = 0.0;
    double prediction = 0.0;
    long long rounded_goals = 0;
    std::vector<std::string> features; // file order (sorted by contribution)
    std::vector<double> values;
    std::vector<double> contributions;
};

ForceData read_force_data(const std::string& path);

} // namespace handsel
