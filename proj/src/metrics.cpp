#include "handsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "handsel/csv.hpp"
#include "handsel/error.hpp"

namespace handsel {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) fail(ErrorCode::length_mismatch, "input lengths differ");
    if (a == 0) fail(ErrorCode::empty_input, "metrics need at least one sample");
}

} // namespace

double accuracy(std::span<const int> labels, std::span<const int> predictions) {
    check_lengths(labels.size(), predictions.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == predictions[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double weighted_f1(std::span<const int> labels, std::span<const int> predictions) {
    check_lengths(labels.size(), predictions.size());
    struct Cell {
        double tp = 0, fp = 0, fn = 0, support = 0;
    };
    std::map<int, Cell> cells;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cells[labels[i]].support += 1.0;
        if (labels[i] == predictions[i]) {
            cells[labels[i]].tp += 1.0;
        } else {
            cells[labels[i]].fn += 1.0;
            cells[predictions[i]].fp += 1.0;
        }
    }
    double total = 0.0;
    for (const auto& [label, cell] : cells) {
        if (cell.support == 0.0) continue; // predicted-only class: zero weight
        const double denom = 2.0 * cell.tp + cell.fp + cell.fn;
        const double f1 = denom == 0.0 ? 0.0 : 2.0 * cell.tp / denom;
        total += (cell.support / static_cast<double>(labels.size())) * f1;
    }
    return total;
}

double brier(std::span<const int> labels, const std::vector<std::vector<double>>& probabilities) {
    check_lengths(labels.size(), probabilities.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& p = probabilities[i];
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= p.size()) {
            fail(ErrorCode::dimension_mismatch, "label outside probability vector range");
        }
        double sum = 0.0;
        for (double v : p) sum += v;
        if (std::abs(sum - 1.0) > 1e-6) {
            fail(ErrorCode::non_normalized, "probability vector does not sum to 1");
        }
        for (std::size_t c = 0; c < p.size(); ++c) {
            const double y = static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0;
            total += (y - p[c]) * (y - p[c]);
        }
    }
    return total / static_cast<double>(labels.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual.size(), predicted.size());
    double sse = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual.size(), predicted.size());
    double total = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) fail(ErrorCode::zero_actual, "actual value is zero");
        total += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
    }
    return total / static_cast<double>(actual.size());
}

ClassificationReport classification_report(const std::string& model_name,
                                           const std::string& feature_set,
                                           const TreeEnsemble& model, const Matrix& X,
                                           std::span<const int> labels) {
    check_lengths(X.rows(), labels.size());
    std::vector<int> predicted;
    std::vector<std::vector<double>> probabilities;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        probabilities.push_back(predict_proba(model, X.row(r)));
        predicted.push_back(predict_class(model, X.row(r)));
    }
    ClassificationReport report;
    report.model = model_name;
    report.features = feature_set;
    report.accuracy = accuracy(labels, predicted);
    report.weighted_f1 = weighted_f1(labels, predicted);
    report.brier = brier(labels, probabilities);
    return report;
}

RegressionReport regression_report(const std::string& model_name, const std::string& feature_set,
                                   const TwoTargetModel& model, const Matrix& X,
                                   std::span<const double> home, std::span<const double> away) {
    check_lengths(X.rows(), home.size());
    check_lengths(home.size(), away.size());
    std::vector<double> pred_home, pred_away;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto [h, a] = predict_scores(model, X.row(r));
        pred_home.push_back(h);
        pred_away.push_back(a);
    }
    RegressionReport report;
    report.model = model_name;
    report.features = feature_set;
    report.rmse_home = rmse(home, pred_home);
    report.mape_home = mape(home, pred_home);
    report.rmse_away = rmse(away, pred_away);
    report.mape_away = mape(away, pred_away);
    return report;
}

void write_reports(const std::string& path, std::span<const ClassificationReport> reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
    out << "# brier: multi-class sum-over-classes convention, range [0, 2]\n";
    out << "model,features,accuracy,weighted_f1,brier\n";
    for (const auto& r : reports) {
        out << r.model << "," << r.features << "," << format_double(r.accuracy) << ","
            << format_double(r.weighted_f1) << "," << format_double(r.brier) << "\n";
    }
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

void write_reports(const std::string& path, std::span<const RegressionReport> reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
    out << "model,features,rmse_home,mape_home,rmse_away,mape_away\n";
    for (const auto& r : reports) {
        out << r.model << "," << r.features << "," << format_double(r.rmse_home) << ","
            << format_double(r.mape_home) << "," << format_double(r.rmse_away) << ","
            << format_double(r.mape_away) << "\n";
    }
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

} // namespace handsel
