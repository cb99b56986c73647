#include "handsel/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "handsel/error.hpp"
#include "handsel/rng.hpp"

namespace handsel {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

// Unified target view: regression fits doubles, classification fits labels.
struct Targets {
    std::span<const double> reg;
    std::span<const int> cls;
    int n_classes = 0; // 0 => regression

    bool classification() const { return n_classes > 0; }
    std::size_t size() const { return classification() ? cls.size() : reg.size(); }
};

struct Builder {
    const Matrix& X;
    Targets y;
    const TrainConfig& config;
    Rng* rng;              // nullptr => no per-split feature sampling
    int features_per_split; // resolved; 0 = all
    std::vector<TreeNode> nodes;

    // scratch, reused across nodes
    std::vector<int> order;
    std::vector<int> candidates;

    std::vector<double> leaf_values(std::span<const int> rows) const {
        if (y.classification()) {
            std::vector<double> freq(y.n_classes, 0.0);
            for (int r : rows) freq[static_cast<std::size_t>(y.cls[r])] += 1.0;
            for (double& f : freq) f /= static_cast<double>(rows.size());
            return freq;
        }
        // summed in sorted order so the leaf mean is invariant to row order
        std::vector<double> values;
        values.reserve(rows.size());
        for (int r : rows) values.push_back(y.reg[r]);
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values) sum += v;
        return {sum / static_cast<double>(rows.size())};
    }

    bool pure(std::span<const int> rows) const {
        if (y.classification()) {
            const int first = y.cls[rows.front()];
            for (int r : rows) {
                if (y.cls[r] != first) return false;
            }
            return true;
        }
        const double first = y.reg[rows.front()];
        for (int r : rows) {
            if (y.reg[r] != first) return false;
        }
        return true;
    }

    struct Split {
        bool found = false;
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    // Candidate features in ascending order: all of them, or a without-
    // replacement sample when the forest asked for per-split sampling.
    std::span<const int> pick_features(std::vector<int>& scratch) {
        const int p = static_cast<int>(X.cols());
        scratch.resize(static_cast<std::size_t>(p));
        std::iota(scratch.begin(), scratch.end(), 0);
        if (features_per_split <= 0 || features_per_split >= p || rng == nullptr) {
            return scratch;
        }
        for (int i = 0; i < features_per_split; ++i) {
            const auto j =
                i + static_cast<int>(rng->uniform_int(static_cast<std::uint64_t>(p - i)));
            std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(j)]);
        }
        scratch.resize(static_cast<std::size_t>(features_per_split));
        std::sort(scratch.begin(), scratch.end());
        return scratch;
    }

    // Scan one feature for the best boundary between distinct sorted values.
    // Gains use the sum-of-squares identity so the sweep is O(n) after the
    // sort; the sort key (value, target) pins accumulation order bitwise.
    void scan_feature(int f, std::span<int> rows, Split& best) {
        const std::size_t n = rows.size();
        order.assign(rows.begin(), rows.end());
        if (y.classification()) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double xa = X.at(static_cast<std::size_t>(a), static_cast<std::size_t>(f));
                const double xb = X.at(static_cast<std::size_t>(b), static_cast<std::size_t>(f));
                if (xa != xb) return xa < xb;
                return y.cls[a] < y.cls[b];
            });
        } else {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double xa = X.at(static_cast<std::size_t>(a), static_cast<std::size_t>(f));
                const double xb = X.at(static_cast<std::size_t>(b), static_cast<std::size_t>(f));
                if (xa != xb) return xa < xb;
                return y.reg[a] < y.reg[b];
            });
        }

        const std::size_t msl = static_cast<std::size_t>(config.min_samples_leaf);
        if (y.classification()) {
            std::vector<double> left(static_cast<std::size_t>(y.n_classes), 0.0);
            std::vector<double> right(static_cast<std::size_t>(y.n_classes), 0.0);
            for (int r : order) right[static_cast<std::size_t>(y.cls[r])] += 1.0;
            double right_sq = 0.0, left_sq = 0.0;
            for (double c : right) right_sq += c * c;
            // parent weighted impurity baseline: 1 - right_sq / n^2; gain
            // compares (sum_l c^2 / n_l + sum_r c^2 / n_r) against parent.
            const double parent_score = right_sq / static_cast<double>(n);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(y.cls[order[i]]);
                left_sq += 2.0 * left[c] + 1.0;
                right_sq -= 2.0 * right[c] - 1.0;
                left[c] += 1.0;
                right[c] -= 1.0;
                const double a = X.at(static_cast<std::size_t>(order[i]), static_cast<std::size_t>(f));
                const double b =
                    X.at(static_cast<std::size_t>(order[i + 1]), static_cast<std::size_t>(f));
                if (!(a < b)) continue;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < msl || nr < msl) continue;
                const double score = left_sq / static_cast<double>(nl) +
                                     right_sq / static_cast<double>(nr);
                consider(best, (score - parent_score) / static_cast<double>(n), f, a, b);
            }
        } else {
            double right_sum = 0.0, right_sq = 0.0;
            for (int r : order) {
                right_sum += y.reg[r];
                right_sq += y.reg[r] * y.reg[r];
            }
            const double parent_sse = right_sq - right_sum * right_sum / static_cast<double>(n);
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double v = y.reg[order[i]];
                left_sum += v;
                left_sq += v * v;
                right_sum -= v;
                right_sq -= v * v;
                const double a = X.at(static_cast<std::size_t>(order[i]), static_cast<std::size_t>(f));
                const double b =
                    X.at(static_cast<std::size_t>(order[i + 1]), static_cast<std::size_t>(f));
                if (!(a < b)) continue;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < msl || nr < msl) continue;
                const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                                   (right_sq - right_sum * right_sum / static_cast<double>(nr));
                consider(best, parent_sse - sse, f, a, b);
            }
        }
    }

    static void consider(Split& best, double gain, int f, double lo, double hi) {
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo; // midpoint rounded up to hi: fall back, lo still goes left
        if (best.found && gain <= best.gain) return; // scan order implements the tie-break
        best = {true, gain, f, t};
    }

    int build(std::vector<int>& rows, int depth) {
        const int index = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.back().cover = static_cast<double>(rows.size());

        const bool stop = depth >= config.max_depth ||
                          rows.size() < 2 * static_cast<std::size_t>(config.min_samples_leaf) ||
                          pure(rows);
        Split best;
        if (!stop) {
            std::vector<int> feats_scratch;
            for (int f : pick_features(feats_scratch)) scan_feature(f, rows, best);
        }
        if (!best.found) {
            nodes[static_cast<std::size_t>(index)].values = leaf_values(rows);
            return index;
        }

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(rows.size());
        for (int r : rows) {
            const double v =
                X.at(static_cast<std::size_t>(r), static_cast<std::size_t>(best.feature));
            (v <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode& node = nodes[static_cast<std::size_t>(index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return index;
    }
};

Tree build_tree(const Matrix& X, const Targets& y, const TrainConfig& config, Rng* rng,
                int features_per_split, std::vector<int> rows) {
    if (X.cols() == 0) fail(ErrorCode::degenerate_sample, "training matrix has zero columns");
    if (rows.empty()) fail(ErrorCode::empty_input, "no training rows");
    Builder builder{X, y, config, rng, features_per_split, {}, {}, {}};
    builder.build(rows, 0);
    return Tree{std::move(builder.nodes)};
}

std::vector<int> all_rows(std::size_t n) {
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

void check_matrix_targets(const Matrix& X, std::size_t n_targets) {
    if (X.rows() != n_targets) {
        fail(ErrorCode::length_mismatch, "row count differs from target count");
    }
}

void check_labels(std::span<const int> y, int n_classes) {
    if (n_classes < 2) fail(ErrorCode::config, "need at least 2 classes");
    std::vector<std::size_t> support(static_cast<std::size_t>(n_classes), 0);
    for (int label : y) {
        if (label < 0 || label >= n_classes) {
            fail(ErrorCode::invariant_violation, "label out of class range");
        }
        ++support[static_cast<std::size_t>(label)];
    }
    for (int c = 0; c < n_classes; ++c) {
        if (support[static_cast<std::size_t>(c)] == 0) {
            fail(ErrorCode::class_missing,
                 "class " + std::to_string(c) + " absent from training labels");
        }
    }
}

int resolve_features_per_split(const TrainConfig& config, std::size_t p, bool classification) {
    if (config.features_per_split > 0) return config.features_per_split;
    if (classification) {
        return std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(p)))));
    }
    return std::max(1, static_cast<int>(p / 3));
}

std::vector<int> bootstrap_rows(std::size_t n, Rng& rng) {
    std::vector<int> rows(n);
    for (auto& r : rows) r = static_cast<int>(rng.uniform_int(n));
    return rows;
}

// Without-replacement subsample, returned in ascending row order.
std::vector<int> subsample_rows(std::size_t n, double fraction, Rng& rng) {
    if (fraction >= 1.0) return all_rows(n);
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    std::vector<int> rows = all_rows(n);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_int(n - i);
        std::swap(rows[i], rows[j]);
    }
    rows.resize(k);
    std::sort(rows.begin(), rows.end());
    return rows;
}

TreeEnsemble make_ensemble(EnsembleKind kind, Task task, std::size_t p, int n_outputs) {
    TreeEnsemble model;
    model.kind = kind;
    model.task = task;
    model.n_features = static_cast<int>(p);
    model.n_outputs = n_outputs;
    model.learning_rate = 1.0;
    model.base_score.assign(static_cast<std::size_t>(n_outputs), 0.0);
    return model;
}

TreeEnsemble train_forest_impl(const Matrix& X, const Targets& y, const TrainConfig& config,
                               Task task, int n_outputs) {
    config.validate();
    const int fps = resolve_features_per_split(config, X.cols(), y.classification());
    TreeEnsemble model = make_ensemble(EnsembleKind::forest_mean, task, X.cols(), n_outputs);
    model.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int i = 0; i < config.n_trees; ++i) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
        std::vector<int> rows =
            config.bootstrap ? bootstrap_rows(X.rows(), rng) : all_rows(X.rows());
        model.trees.push_back(build_tree(X, y, config, &rng, fps, std::move(rows)));
    }
    return model;
}

double leaf_scalar(const Tree& tree, std::span<const double> x) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].values[0];
}

std::vector<double> softmax(std::span<const double> scores) {
    const double peak = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - peak);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

} // namespace

void TrainConfig::validate() const {
    if (n_trees < 1) fail(ErrorCode::config, "n_trees must be positive");
    if (max_depth < 1) fail(ErrorCode::config, "max_depth must be positive");
    if (min_samples_leaf < 1) fail(ErrorCode::config, "min_samples_leaf must be positive");
    if (features_per_split < 0) fail(ErrorCode::config, "features_per_split must be >= 0");
    if (!(learning_rate > 0.0) || learning_rate > 1.0) {
        fail(ErrorCode::config, "learning_rate must be in (0, 1]");
    }
    if (!(subsample > 0.0) || subsample > 1.0) fail(ErrorCode::config, "subsample must be in (0, 1]");
}

std::string_view ensemble_kind_name(EnsembleKind kind) {
    return kind == EnsembleKind::forest_mean ? "forest_mean" : "boosted_sum";
}

EnsembleKind parse_ensemble_kind(std::string_view text) {
    if (text == "forest_mean") return EnsembleKind::forest_mean;
    if (text == "boosted_sum") return EnsembleKind::boosted_sum;
    fail(ErrorCode::config, "unknown ensemble kind: " + std::string(text));
}

std::string_view task_name(Task task) { return task == Task::classify ? "classify" : "regress"; }

Task parse_task(std::string_view text) {
    if (text == "classify") return Task::classify;
    if (text == "regress") return Task::regress;
    fail(ErrorCode::config, "unknown task: " + std::string(text));
}

Tree train_tree(const Matrix& X, std::span<const double> y, const TrainConfig& config) {
    config.validate();
    check_matrix_targets(X, y.size());
    return build_tree(X, Targets{y, {}, 0}, config, nullptr, 0, all_rows(X.rows()));
}

Tree train_tree(const Matrix& X, std::span<const int> y, int n_classes,
                const TrainConfig& config) {
    config.validate();
    check_matrix_targets(X, y.size());
    check_labels(y, n_classes);
    return build_tree(X, Targets{{}, y, n_classes}, config, nullptr, 0, all_rows(X.rows()));
}

TreeEnsemble train_random_forest(const Matrix& X, std::span<const double> y,
                                 const TrainConfig& config) {
    check_matrix_targets(X, y.size());
    return train_forest_impl(X, Targets{y, {}, 0}, config, Task::regress, 1);
}

TreeEnsemble train_random_forest(const Matrix& X, std::span<const int> y, int n_classes,
                                 const TrainConfig& config) {
    check_matrix_targets(X, y.size());
    check_labels(y, n_classes);
    return train_forest_impl(X, Targets{{}, y, n_classes}, config, Task::classify, n_classes);
}

TreeEnsemble train_gbt(const Matrix& X, std::span<const double> y, const TrainConfig& config) {
    config.validate();
    check_matrix_targets(X, y.size());
    if (y.empty()) fail(ErrorCode::empty_input, "no training rows");
    const std::size_t n = X.rows();

    TreeEnsemble model = make_ensemble(EnsembleKind::boosted_sum, Task::regress, X.cols(), 1);
    model.learning_rate = config.learning_rate;
    double base = 0.0;
    for (double v : y) base += v;
    base /= static_cast<double>(n);
    model.base_score[0] = base;

    std::vector<double> pred(n, base);
    std::vector<double> residual(n);
    for (int i = 0; i < config.n_trees; ++i) {
        for (std::size_t r = 0; r < n; ++r) residual[r] = y[r] - pred[r];
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
        std::vector<int> rows = subsample_rows(n, config.subsample, rng);
        Tree tree =
            build_tree(X, Targets{residual, {}, 0}, config, &rng, config.features_per_split,
                       std::move(rows));
        for (std::size_t r = 0; r < n; ++r) {
            pred[r] += config.learning_rate * leaf_scalar(tree, X.row(r));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

TreeEnsemble train_gbt(const Matrix& X, std::span<const int> y, int n_classes,
                       const TrainConfig& config) {
    config.validate();
    check_matrix_targets(X, y.size());
    check_labels(y, n_classes);
    const std::size_t n = X.rows();
    const auto C = static_cast<std::size_t>(n_classes);

    TreeEnsemble model = make_ensemble(EnsembleKind::boosted_sum, Task::classify, X.cols(),
                                       n_classes);
    model.learning_rate = config.learning_rate;
    for (int label : y) model.base_score[static_cast<std::size_t>(label)] += 1.0;
    for (double& b : model.base_score) b = std::log(b / static_cast<double>(n));

    // scores[r][c], kept flat; gradients refit one class tree per round
    std::vector<double> scores(n * C);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < C; ++c) scores[r * C + c] = model.base_score[c];
    }
    std::vector<double> grad(n);
    std::vector<double> probs(n * C);
    for (int round = 0; round < config.n_trees; ++round) {
        // one probability snapshot per round; all class trees fit against it
        for (std::size_t r = 0; r < n; ++r) {
            const auto row = std::span<const double>(scores).subspan(r * C, C);
            const std::vector<double> p = softmax(row);
            std::copy(p.begin(), p.end(), probs.begin() + static_cast<std::ptrdiff_t>(r * C));
        }
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t r = 0; r < n; ++r) {
                grad[r] = (static_cast<std::size_t>(y[r]) == c ? 1.0 : 0.0) - probs[r * C + c];
            }
            const auto tree_index =
                static_cast<std::uint64_t>(round) * C + static_cast<std::uint64_t>(c);
            Rng rng(derive_seed(config.seed, tree_index));
            std::vector<int> rows = subsample_rows(n, config.subsample, rng);
            Tree tree = build_tree(X, Targets{grad, {}, 0}, config, &rng,
                                   config.features_per_split, std::move(rows));
            for (std::size_t r = 0; r < n; ++r) {
                scores[r * C + c] += config.learning_rate * leaf_scalar(tree, X.row(r));
            }
            model.trees.push_back(std::move(tree));
            model.tree_output.push_back(static_cast<int>(c));
        }
    }
    return model;
}

double tree_value(const Tree& tree, std::span<const double> x, int output) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].values[static_cast<std::size_t>(output)];
}

std::vector<double> predict(const TreeEnsemble& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.n_features)) {
        fail(ErrorCode::dimension_mismatch, "feature vector length differs from model");
    }
    std::vector<double> out(model.base_score);
    if (model.kind == EnsembleKind::forest_mean) {
        for (const Tree& tree : model.trees) {
            int node = 0;
            while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
                const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                               : nd.right;
            }
            const auto& values = tree.nodes[static_cast<std::size_t>(node)].values;
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += values[c];
        }
        for (double& v : out) v /= static_cast<double>(model.trees.size());
        return out;
    }
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const int output = model.tree_output.empty() ? 0 : model.tree_output[t];
        out[static_cast<std::size_t>(output)] +=
            model.learning_rate * leaf_scalar(model.trees[t], x);
    }
    return out;
}

std::vector<double> predict_proba(const TreeEnsemble& model, std::span<const double> x) {
    if (model.task != Task::classify) {
        fail(ErrorCode::config, "probabilities are only defined for classifiers");
    }
    std::vector<double> raw = predict(model, x);
    if (model.kind == EnsembleKind::forest_mean) return raw; // already a distribution
    return softmax(raw);
}

int predict_class(const TreeEnsemble& model, std::span<const double> x) {
    const std::vector<double> proba = predict_proba(model, x);
    return static_cast<int>(std::max_element(proba.begin(), proba.end()) - proba.begin());
}

TwoTargetModel train_two_target(const Matrix& X, std::span<const double> y_home,
                                std::span<const double> y_away, EnsembleKind kind,
                                const TrainConfig& config) {
    if (y_home.size() != y_away.size()) {
        fail(ErrorCode::length_mismatch, "home/away target lengths differ");
    }
    TrainConfig away_config = config;
    away_config.seed = config.seed + 1;
    TwoTargetModel model;
    if (kind == EnsembleKind::forest_mean) {
        model.home = train_random_forest(X, y_home, config);
        model.away = train_random_forest(X, y_away, away_config);
    } else {
        model.home = train_gbt(X, y_home, config);
        model.away = train_gbt(X, y_away, away_config);
    }
    return model;
}

std::pair<double, double> predict_scores(const TwoTargetModel& model, std::span<const double> x) {
    return {predict(model.home, x)[0], predict(model.away, x)[0]};
}

std::string format_scoreline(double home, double away) {
    return std::to_string(std::llround(home)) + "-" + std::to_string(std::llround(away));
}

namespace {

constexpr int kModelVersion = 1;

nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
        nlohmann::json j;
        j["cover"] = node.cover;
        if (node.is_leaf()) {
            j["values"] = node.values;
        } else {
            j["feature"] = node.feature;
            j["threshold"] = node.threshold;
            j["left"] = node.left;
            j["right"] = node.right;
        }
        nodes.push_back(std::move(j));
    }
    return nodes;
}

Tree tree_from_json(const nlohmann::json& doc, int n_features, std::size_t n_leaf_values) {
    if (!doc.is_array() || doc.empty()) {
        fail(ErrorCode::invariant_violation, "tree encoding must be a non-empty node array");
    }
    Tree tree;
    const int count = static_cast<int>(doc.size());
    for (const auto& j : doc) {
        TreeNode node;
        if (!j.contains("cover")) fail(ErrorCode::missing_cover, "node without cover value");
        node.cover = j.at("cover").get<double>();
        if (node.cover < 0.0) fail(ErrorCode::missing_cover, "negative cover value");
        if (j.contains("feature")) {
            node.feature = j.at("feature").get<int>();
            node.threshold = j.at("threshold").get<double>();
            node.left = j.at("left").get<int>();
            node.right = j.at("right").get<int>();
            if (node.feature < 0 || node.feature >= n_features) {
                fail(ErrorCode::invariant_violation, "split feature index out of range");
            }
            if (node.left <= 0 || node.left >= count || node.right <= 0 || node.right >= count) {
                fail(ErrorCode::invariant_violation, "child index out of range");
            }
        } else {
            node.values = j.at("values").get<std::vector<double>>();
            if (node.values.size() != n_leaf_values) {
                fail(ErrorCode::invariant_violation, "leaf value vector has wrong length");
            }
        }
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

} // namespace

nlohmann::json ensemble_to_json(const TreeEnsemble& model) {
    nlohmann::json doc;
    doc["format"] = "handsel-model";
    doc["version"] = kModelVersion;
    doc["kind"] = ensemble_kind_name(model.kind);
    doc["task"] = task_name(model.task);
    doc["n_features"] = model.n_features;
    doc["n_outputs"] = model.n_outputs;
    doc["learning_rate"] = model.learning_rate;
    doc["base_score"] = model.base_score;
    doc["feature_names"] = model.feature_names;
    if (!model.tree_output.empty()) doc["tree_output"] = model.tree_output;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& tree : model.trees) trees.push_back(tree_to_json(tree));
    doc["trees"] = std::move(trees);
    return doc;
}

TreeEnsemble ensemble_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != std::string("handsel-model")) {
        fail(ErrorCode::config, "not a model document");
    }
    if (doc.value("version", -1) != kModelVersion) {
        fail(ErrorCode::config, "unsupported model version");
    }
    TreeEnsemble model;
    model.kind = parse_ensemble_kind(doc.at("kind").get<std::string>());
    model.task = parse_task(doc.at("task").get<std::string>());
    model.n_features = doc.at("n_features").get<int>();
    model.n_outputs = doc.at("n_outputs").get<int>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    model.base_score = doc.at("base_score").get<std::vector<double>>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    if (doc.contains("tree_output")) {
        model.tree_output = doc.at("tree_output").get<std::vector<int>>();
    }
    if (model.n_features <= 0 || model.n_outputs <= 0) {
        fail(ErrorCode::invariant_violation, "model dimensions must be positive");
    }
    if (model.base_score.size() != static_cast<std::size_t>(model.n_outputs)) {
        fail(ErrorCode::invariant_violation, "base_score length differs from n_outputs");
    }
    if (!model.feature_names.empty() &&
        model.feature_names.size() != static_cast<std::size_t>(model.n_features)) {
        fail(ErrorCode::invariant_violation, "feature_names length differs from n_features");
    }
    const std::size_t leaf_len = model.kind == EnsembleKind::forest_mean
                                     ? static_cast<std::size_t>(model.n_outputs)
                                     : 1;
    for (const auto& tree : doc.at("trees")) {
        model.trees.push_back(tree_from_json(tree, model.n_features, leaf_len));
    }
    if (model.trees.empty()) fail(ErrorCode::invariant_violation, "model has no trees");
    if (model.kind == EnsembleKind::boosted_sum && model.n_outputs > 1 &&
        model.tree_output.empty()) {
        fail(ErrorCode::invariant_violation, "multi-output boosted model lacks tree_output");
    }
    if (!model.tree_output.empty() && model.tree_output.size() != model.trees.size()) {
        fail(ErrorCode::invariant_violation, "tree_output length differs from tree count");
    }
    for (int output : model.tree_output) {
        if (output < 0 || output >= model.n_outputs) {
            fail(ErrorCode::invariant_violation, "tree output index out of range");
        }
    }
    return model;
}

nlohmann::json two_target_to_json(const TwoTargetModel& model) {
    nlohmann::json doc;
    doc["format"] = "handsel-two-target";
    doc["version"] = kModelVersion;
    doc["home"] = ensemble_to_json(model.home);
    doc["away"] = ensemble_to_json(model.away);
    return doc;
}

TwoTargetModel two_target_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != std::string("handsel-two-target")) {
        fail(ErrorCode::config, "not a two-target model document");
    }
    if (doc.value("version", -1) != kModelVersion) {
        fail(ErrorCode::config, "unsupported model version");
    }
    TwoTargetModel model;
    model.home = ensemble_from_json(doc.at("home"));
    model.away = ensemble_from_json(doc.at("away"));
    return model;
}

} // namespace handsel
