#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "handsel/matrix.hpp"

namespace handsel {

// Prediction combiner: forest_mean averages tree outputs, boosted_sum
// accumulates learning_rate-scaled tree outputs onto base_score.
enum class EnsembleKind { forest_mean, boosted_sum };
enum class Task { classify, regress };

std::string_view ensemble_kind_name(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(std::string_view text);
std::string_view task_name(Task task);
Task parse_task(std::string_view text);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> values; // leaf payload; one entry per output
    double cover = 0.0;         // training rows that reached this node

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root, children by index
    bool operator==(const Tree&) const = default;
};

struct TrainConfig {
    int n_trees = 300;
    int max_depth = 6;          // boosted models typically use 3
    int min_samples_leaf = 1;
    int features_per_split = 0; // 0 = automatic (forest) / all features (single tree, boosting)
    double learning_rate = 0.1; // boosting only
    double subsample = 1.0;     // boosting row fraction per round
    bool bootstrap = true;      // forest row resampling; disable for deterministic stumps
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeEnsemble {
    EnsembleKind kind = EnsembleKind::forest_mean;
    Task task = Task::regress;
    int n_features = 0;
    int n_outputs = 1; // 1 for regression, #classes for classification
    double learning_rate = 1.0;
    std::vector<double> base_score;          // size n_outputs; zeros for forests
    std::vector<std::string> feature_names;  // size n_features
    std::vector<Tree> trees;
    std::vector<int> tree_output; // boosted classification: output index per tree; empty otherwise

    bool operator==(const TreeEnsemble&) const = default;
};

// Single CART trees. Regression splits maximize variance (SSE) reduction,
// classification splits maximize Gini gain. Thresholds are midpoints between
// consecutive distinct sorted values (x <= t goes left); equal-gain ties pick
// the lowest feature index, then the smallest threshold. Zero-gain splits are
// taken when the node is impure, so depth-2 trees can solve XOR layouts.
Tree train_tree(const Matrix& X, std::span<const double> y, const TrainConfig& config);
Tree train_tree(const Matrix& X, std::span<const int> y, int n_classes, const TrainConfig& config);

// Bagged forest: per-tree seed derive_seed(config.seed, tree_index) drives the
// bootstrap and per-split feature sampling. features_per_split = 0 selects
// round(sqrt(p)) features for classification and max(1, p/3) for regression.
TreeEnsemble train_random_forest(const Matrix& X, std::span<const double> y,
                                 const TrainConfig& config);
TreeEnsemble train_random_forest(const Matrix& X, std::span<const int> y, int n_classes,
                                 const TrainConfig& config);

// Gradient boosting with squared loss (regression) or softmax multinomial
// deviance (classification, one tree per class per round, leaf = mean
// gradient). Trees store unscaled leaf values; prediction applies
// base_score + learning_rate * sum.
TreeEnsemble train_gbt(const Matrix& X, std::span<const double> y, const TrainConfig& config);
TreeEnsemble train_gbt(const Matrix& X, std::span<const int> y, int n_classes,
                       const TrainConfig& config);

// Raw model output: regression value, forest class frequencies, or boosted
// pre-softmax scores. Size n_outputs.
std::vector<double> predict(const TreeEnsemble& model, std::span<const double> x);
// Classification only: probability distribution over classes.
std::vector<double> predict_proba(const TreeEnsemble& model, std::span<const double> x);
// Argmax class with lowest-index tie-break.
int predict_class(const TreeEnsemble& model, std::span<const double> x);

// Scalar output of one tree (output index selects a leaf-vector entry).
double tree_value(const Tree& tree, std::span<const double> x, int output);

// Two independent single-target regressors sharing hyperparameters; the away
// model trains with seed + 1.
struct TwoTargetModel {
    TreeEnsemble home;
    TreeEnsemble away;
    bool operator==(const TwoTargetModel&) const = default;
};

TwoTargetModel train_two_target(const Matrix& X, std::span<const double> y_home,
                                std::span<const double> y_away, EnsembleKind kind,
                                const TrainConfig& config);
std::pair<double, double> predict_scores(const TwoTargetModel& model, std::span<const double> x);
// Presentation helper: nearest-integer scoreline such as "32-24".
std::string format_scoreline(double home, double away);

// Versioned JSON model documents; round-trip exact (shortest representation
// doubles, alphabetically ordered keys).
nlohmann::json ensemble_to_json(const TreeEnsemble& model);
TreeEnsemble ensemble_from_json(const nlohmann::json& doc);
nlohmann::json two_target_to_json(const TwoTargetModel& model);
TwoTargetModel two_target_from_json(const nlohmann::json& doc);

} // namespace handsel
