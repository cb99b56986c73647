#include "handsel/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "handsel/csv.hpp"
#include "handsel/error.hpp"

namespace handsel {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

void check_instance(const TreeEnsemble& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.n_features)) {
        fail(ErrorCode::dimension_mismatch, "instance length differs from model feature count");
    }
}

double positive_cover(const TreeNode& node) {
    if (!(node.cover > 0.0)) {
        fail(ErrorCode::missing_cover, "node cover must be positive for explanations");
    }
    return node.cover;
}

// Cover-weighted mean of one tree's leaf values for one output.
double tree_expectation(const Tree& tree, int node, int output) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return nd.values[static_cast<std::size_t>(output)];
    const double total = positive_cover(nd);
    const double wl = positive_cover(tree.nodes[static_cast<std::size_t>(nd.left)]);
    const double wr = positive_cover(tree.nodes[static_cast<std::size_t>(nd.right)]);
    return (wl * tree_expectation(tree, nd.left, output) +
            wr * tree_expectation(tree, nd.right, output)) /
           total;
}

// --- exact path algorithm -------------------------------------------------
// Each path element tracks one feature encountered on the way down: the
// fraction of subsets that exclude it (zero) or include it (one), plus the
// permutation weight shared by all subsets of that size.

struct PathElement {
    int feature;
    double zero;
    double one;
    double weight;
};

void extend_path(std::vector<PathElement>& path, double zero, double one, int feature) {
    const int depth = static_cast<int>(path.size());
    path.push_back({feature, zero, one, depth == 0 ? 1.0 : 0.0});
    for (int i = depth - 1; i >= 0; --i) {
        path[static_cast<std::size_t>(i + 1)].weight +=
            one * path[static_cast<std::size_t>(i)].weight * (i + 1) /
            static_cast<double>(depth + 1);
        path[static_cast<std::size_t>(i)].weight =
            zero * path[static_cast<std::size_t>(i)].weight * (depth - i) /
            static_cast<double>(depth + 1);
    }
}

// Remove element `index`, redistributing its fractions out of the weights.
// The recomputed weights stay in place; only the feature identities shift
// down over the removed slot.
void unwind_path(std::vector<PathElement>& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one = path[index].one;
    const double zero = path[index].zero;
    double next = path[depth].weight;
    for (int i = static_cast<int>(depth) - 1; i >= 0; --i) {
        auto& elem = path[static_cast<std::size_t>(i)];
        if (one != 0.0) {
            const double tmp = elem.weight;
            elem.weight = next * static_cast<double>(depth + 1) /
                          (static_cast<double>(i + 1) * one);
            next = tmp - elem.weight * zero * (static_cast<double>(depth) - i) /
                             static_cast<double>(depth + 1);
        } else {
            elem.weight = elem.weight * static_cast<double>(depth + 1) /
                          (zero * (static_cast<double>(depth) - i));
        }
    }
    for (std::size_t j = index; j < depth; ++j) {
        path[j].feature = path[j + 1].feature;
        path[j].zero = path[j + 1].zero;
        path[j].one = path[j + 1].one;
    }
    path.pop_back();
}

// Total weight of subsets flowing through element `index`, as if unwound.
double unwound_path_sum(const std::vector<PathElement>& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one = path[index].one;
    const double zero = path[index].zero;
    double next = path[depth].weight;
    double total = 0.0;
    if (one != 0.0) {
        for (int i = static_cast<int>(depth) - 1; i >= 0; --i) {
            const double tmp = next / (static_cast<double>(i + 1) * one);
            total += tmp;
            next = path[static_cast<std::size_t>(i)].weight -
                   tmp * zero * (static_cast<double>(depth) - i);
        }
    } else {
        for (int i = static_cast<int>(depth) - 1; i >= 0; --i) {
            total += path[static_cast<std::size_t>(i)].weight /
                     (zero * (static_cast<double>(depth) - i));
        }
    }
    return total * static_cast<double>(depth + 1);
}

struct TreeShapWalker {
    const Tree& tree;
    std::span<const double> x;
    // phi[output][feature]; which outputs a leaf feeds depends on the caller
    std::vector<std::vector<double>>& phi;
    int only_output; // -1: leaf vector spans all outputs; else single target

    void leaf_contribution(const std::vector<PathElement>& path,
                           const std::vector<double>& values) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            const double w = unwound_path_sum(path, i);
            const double scale = w * (path[i].one - path[i].zero);
            const auto f = static_cast<std::size_t>(path[i].feature);
            if (only_output >= 0) {
                phi[static_cast<std::size_t>(only_output)][f] += scale * values[0];
            } else {
                for (std::size_t o = 0; o < phi.size(); ++o) phi[o][f] += scale * values[o];
            }
        }
    }

    void recurse(int node, std::vector<PathElement> path, double zero, double one, int feature) {
        extend_path(path, zero, one, feature);
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.is_leaf()) {
            leaf_contribution(path, nd.values);
            return;
        }
        const double total = positive_cover(nd);
        const TreeNode& left = tree.nodes[static_cast<std::size_t>(nd.left)];
        const TreeNode& right = tree.nodes[static_cast<std::size_t>(nd.right)];
        const bool go_left = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold;
        const int hot = go_left ? nd.left : nd.right;
        const int cold = go_left ? nd.right : nd.left;
        const double hot_zero = positive_cover(go_left ? left : right) / total;
        const double cold_zero = positive_cover(go_left ? right : left) / total;

        double incoming_zero = 1.0;
        double incoming_one = 1.0;
        for (std::size_t k = 1; k < path.size(); ++k) {
            if (path[k].feature == nd.feature) { // feature revisited along this path
                incoming_zero = path[k].zero;
                incoming_one = path[k].one;
                unwind_path(path, k);
                break;
            }
        }
        recurse(hot, path, hot_zero * incoming_zero, incoming_one, nd.feature);
        recurse(cold, std::move(path), cold_zero * incoming_zero, 0.0, nd.feature);
    }
};

ShapExplanation init_explanation(const TreeEnsemble& model, std::span<const double> x) {
    ShapExplanation ex;
    ex.base_value.assign(static_cast<std::size_t>(model.n_outputs), 0.0);
    ex.contributions.assign(static_cast<std::size_t>(model.n_outputs),
                            std::vector<double>(static_cast<std::size_t>(model.n_features), 0.0));
    ex.prediction = predict(model, x);
    ex.feature_names = model.feature_names;
    ex.feature_values.assign(x.begin(), x.end());
    return ex;
}

// Combine per-tree phi/base into the ensemble explanation in place.
void combine(const TreeEnsemble& model, ShapExplanation& ex,
             std::vector<std::vector<double>>& phi, std::vector<double>& base) {
    if (model.kind == EnsembleKind::forest_mean) {
        const auto T = static_cast<double>(model.trees.size());
        for (std::size_t o = 0; o < phi.size(); ++o) {
            ex.base_value[o] = base[o] / T;
            for (double& v : phi[o]) v /= T;
            ex.contributions[o] = phi[o];
        }
    } else {
        for (std::size_t o = 0; o < phi.size(); ++o) {
            ex.base_value[o] = model.base_score[o] + model.learning_rate * base[o];
            for (double& v : phi[o]) v *= model.learning_rate;
            ex.contributions[o] = phi[o];
        }
    }
}

// --- brute-force oracle ----------------------------------------------------

// Tree-walk value function: follow x on features inside the subset mask,
// take cover-weighted child averages outside it.
double masked_walk(const Tree& tree, int node, std::span<const double> x, unsigned mask,
                   int output) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return nd.values[static_cast<std::size_t>(output)];
    if (mask & (1u << static_cast<unsigned>(nd.feature))) {
        const int next = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                 : nd.right;
        return masked_walk(tree, next, x, mask, output);
    }
    const double total = positive_cover(nd);
    const double wl = positive_cover(tree.nodes[static_cast<std::size_t>(nd.left)]);
    const double wr = positive_cover(tree.nodes[static_cast<std::size_t>(nd.right)]);
    return (wl * masked_walk(tree, nd.left, x, mask, output) +
            wr * masked_walk(tree, nd.right, x, mask, output)) /
           total;
}

// Ensemble value function for one subset mask, one output.
double ensemble_value(const TreeEnsemble& model, std::span<const double> x, unsigned mask,
                      int output) {
    if (model.kind == EnsembleKind::forest_mean) {
        double sum = 0.0;
        for (const Tree& tree : model.trees) sum += masked_walk(tree, 0, x, mask, output);
        return sum / static_cast<double>(model.trees.size());
    }
    double sum = model.base_score[static_cast<std::size_t>(output)];
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const int target = model.tree_output.empty() ? 0 : model.tree_output[t];
        if (target != output) continue;
        sum += model.learning_rate * masked_walk(model.trees[t], 0, x, mask, 0);
    }
    return sum;
}

} // namespace

double ShapExplanation::reconstructed(int output) const {
    double total = base_value[static_cast<std::size_t>(output)];
    for (double v : contributions[static_cast<std::size_t>(output)]) total += v;
    return total;
}

std::vector<double> expected_value(const TreeEnsemble& model) {
    std::vector<double> base(static_cast<std::size_t>(model.n_outputs), 0.0);
    if (model.kind == EnsembleKind::forest_mean) {
        for (const Tree& tree : model.trees) {
            for (int o = 0; o < model.n_outputs; ++o) {
                base[static_cast<std::size_t>(o)] += tree_expectation(tree, 0, o);
            }
        }
        for (double& b : base) b /= static_cast<double>(model.trees.size());
        return base;
    }
    base = model.base_score;
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const int output = model.tree_output.empty() ? 0 : model.tree_output[t];
        base[static_cast<std::size_t>(output)] +=
            model.learning_rate * tree_expectation(model.trees[t], 0, 0);
    }
    return base;
}

ShapExplanation tree_shap(const TreeEnsemble& model, std::span<const double> x) {
    check_instance(model, x);
    ShapExplanation ex = init_explanation(model, x);

    std::vector<std::vector<double>> phi(
        static_cast<std::size_t>(model.n_outputs),
        std::vector<double>(static_cast<std::size_t>(model.n_features), 0.0));
    std::vector<double> base(static_cast<std::size_t>(model.n_outputs), 0.0);

    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const Tree& tree = model.trees[t];
        const int only_output =
            model.kind == EnsembleKind::boosted_sum
                ? (model.tree_output.empty() ? 0 : model.tree_output[t])
                : -1;
        TreeShapWalker walker{tree, x, phi, only_output};
        walker.recurse(0, {}, 1.0, 1.0, -1);
        if (only_output >= 0) {
            base[static_cast<std::size_t>(only_output)] += tree_expectation(tree, 0, 0);
        } else {
            for (int o = 0; o < model.n_outputs; ++o) {
                base[static_cast<std::size_t>(o)] += tree_expectation(tree, 0, o);
            }
        }
    }
    combine(model, ex, phi, base);
    return ex;
}

ShapExplanation shap_bruteforce(const TreeEnsemble& model, std::span<const double> x) {
    check_instance(model, x);
    if (model.n_features > 12) {
        fail(ErrorCode::too_many_features,
             "subset enumeration supports at most 12 features, got " +
                 std::to_string(model.n_features));
    }
    ShapExplanation ex = init_explanation(model, x);

    const unsigned n = static_cast<unsigned>(model.n_features);
    const unsigned full = (1u << n) - 1u;
    std::vector<double> factorial(n + 1, 1.0);
    for (unsigned i = 1; i <= n; ++i) factorial[i] = factorial[i - 1] * i;

    for (int o = 0; o < model.n_outputs; ++o) {
        std::vector<double> value(full + 1u);
        for (unsigned mask = 0; mask <= full; ++mask) {
            value[mask] = ensemble_value(model, x, mask, o);
        }
        ex.base_value[static_cast<std::size_t>(o)] = value[0];
        for (unsigned f = 0; f < n; ++f) {
            const unsigned bit = 1u << f;
            double phi = 0.0;
            for (unsigned mask = 0; mask <= full; ++mask) {
                if (mask & bit) continue;
                const auto s = static_cast<unsigned>(std::popcount(mask));
                const double weight = factorial[s] * factorial[n - s - 1] / factorial[n];
                phi += weight * (value[mask | bit] - value[mask]);
            }
            ex.contributions[static_cast<std::size_t>(o)][f] = phi;
        }
    }
    return ex;
}

std::vector<ImportanceEntry> global_importance(const TreeEnsemble& model, const Matrix& X) {
    if (X.rows() == 0) fail(ErrorCode::empty_input, "importance needs at least one row");
    std::vector<double> totals(static_cast<std::size_t>(model.n_features), 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const ShapExplanation ex = tree_shap(model, X.row(r));
        for (const auto& per_output : ex.contributions) {
            for (std::size_t f = 0; f < per_output.size(); ++f) {
                totals[f] += std::abs(per_output[f]);
            }
        }
    }
    std::vector<ImportanceEntry> entries;
    for (std::size_t f = 0; f < totals.size(); ++f) {
        const std::string name = f < model.feature_names.size() ? model.feature_names[f]
                                                                : "f" + std::to_string(f);
        entries.push_back({name, totals[f] / static_cast<double>(X.rows())});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    return entries;
}

void write_importance(const std::string& path, const std::vector<ImportanceEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
    out << "rank,feature,importance\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out << (i + 1) << "," << entries[i].feature << "," << format_double(entries[i].importance)
            << "\n";
    }
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

void export_force_data(const ShapExplanation& explanation, int output, const std::string& path) {
    if (output < 0 || static_cast<std::size_t>(output) >= explanation.contributions.size()) {
        fail(ErrorCode::dimension_mismatch, "output index out of range");
    }
    const auto& contrib = explanation.contributions[static_cast<std::size_t>(output)];
    std::vector<std::size_t> order(contrib.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (contrib[a] != contrib[b]) return contrib[a] > contrib[b];
        return a < b;
    });

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
    const double prediction = explanation.prediction[static_cast<std::size_t>(output)];
    out << "# Prediction: " << std::llround(prediction) << " goals\n";
    out << "feature,value,contribution\n";
    for (std::size_t i : order) {
        const std::string name = i < explanation.feature_names.size()
                                     ? explanation.feature_names[i]
                                     : "f" + std::to_string(i);
        out << name << "," << format_double(explanation.feature_values[i]) << ","
            << format_double(contrib[i]) << "\n";
    }
    out << "base_value,," << format_double(explanation.base_value[static_cast<std::size_t>(output)])
        << "\n";
    out << "prediction,," << format_double(prediction) << "\n";
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

ForceData read_force_data(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    std::string line;
    ForceData data;
    bool saw_header = false, saw_base = false, saw_prediction = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# Prediction:", 0) == 0) {
            std::istringstream ss(line.substr(13));
            ss >> data.rounded_goals;
            continue;
        }
        if (line[0] == '#') continue;
        if (!saw_header) {
            if (line != "feature,value,contribution") {
                fail(ErrorCode::malformed_row, "unexpected force-data header: " + line);
            }
            saw_header = true;
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 3) {
            fail(ErrorCode::malformed_row, "force-data row needs 3 fields at line " +
                                               std::to_string(lineno));
        }
        if (fields[0] == "base_value") {
            data.base_value = parse_double(fields[2], lineno, "base_value");
            saw_base = true;
        } else if (fields[0] == "prediction") {
            data.prediction = parse_double(fields[2], lineno, "prediction");
            saw_prediction = true;
        } else {
            data.features.push_back(fields[0]);
            data.values.push_back(parse_double(fields[1], lineno, "value"));
            data.contributions.push_back(parse_double(fields[2], lineno, "contribution"));
        }
    }
    if (!saw_header || !saw_base || !saw_prediction) {
        fail(ErrorCode::malformed_row, "force-data file missing required rows");
    }
    return data;
}

} // namespace handsel
