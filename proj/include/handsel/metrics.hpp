#pragma once

#include <span>
#include <string>
#include <vector>

#include "handsel/matrix.hpp"
#include "handsel/trees.hpp"

namespace handsel {

// Fraction of exact label matches.
double accuracy(std::span<const int> labels, std::span<const int> predictions);

// Support-weighted mean of per-class one-vs-rest F1 = 2TP / (2TP + FP + FN).
// Classes absent from the labels carry zero weight.
double weighted_f1(std::span<const int> labels, std::span<const int> predictions);

// Multi-class Brier score, sum-over-classes convention (range [0, 2]):
// mean over rows of sum_c (1[y=c] - p_c)^2. Every probability vector must
// sum to 1 within 1e-6.
double brier(std::span<const int> labels, const std::vector<std::vector<double>>& probabilities);

double rmse(std::span<const double> actual, std::span<const double> predicted);
// Mean |actual - predicted| / |actual|; rejects zero actuals.
double mape(std::span<const double> actual, std::span<const double> predicted);

struct ClassificationReport {
    std::string model;    // "forest" or "gbt"
    std::string features; // "classical" or "classical+SEL"
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    double brier = 0.0;
    bool operator==(const ClassificationReport&) const = default;
};

struct RegressionReport {
    std::string model;
    std::string features;
    double rmse_home = 0.0;
    double mape_home = 0.0;
    double rmse_away = 0.0;
    double mape_away = 0.0;
    bool operator==(const RegressionReport&) const = default;
};

// One ablation row per (model, feature set): score a trained model on a test
// matrix with matched targets.
ClassificationReport classification_report(const std::string& model_name,
                                           const std::string& feature_set,
                                           const TreeEnsemble& model, const Matrix& X,
                                           std::span<const int> labels);
RegressionReport regression_report(const std::string& model_name, const std::string& feature_set,
                                   const TwoTargetModel& model, const Matrix& X,
                                   std::span<const double> home, std::span<const double> away);

// CSV reports, one row per (model, feature set); the classification header
// records the sum-over-classes Brier convention.
void write_reports(const std::string& path, std::span<const ClassificationReport> reports);
void write_reports(const std::string& path, std::span<const RegressionReport> reports);

} // namespace handsel
