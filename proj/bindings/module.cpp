#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handsel/cmp.hpp"
#include "handsel/error.hpp"
#include "handsel/features.hpp"
#include "handsel/metrics.hpp"
#include "handsel/pipeline.hpp"
#include "handsel/shap.hpp"
#include "handsel/strength.hpp"
#include "handsel/trees.hpp"

namespace py = pybind11;

namespace {

using namespace handsel;

// Flag-style keyword arguments shared by every stage function; None leaves
// the JSON/default value in place, anything else wins over the file.
RunConfig build_config(const std::string& config, const py::object& out, const py::object& seed,
                       const py::object& cutoff, const py::object& features,
                       const py::object& model, const py::object& task) {
    ConfigOverrides overrides;
    if (!seed.is_none()) overrides.seed = seed.cast<std::uint64_t>();
    if (!cutoff.is_none()) overrides.cutoff = cutoff.cast<std::string>();
    if (!features.is_none()) overrides.features = features.cast<std::string>();
    if (!model.is_none()) overrides.model = model.cast<std::string>();
    if (!task.is_none()) overrides.task = task.cast<std::string>();
    if (!out.is_none()) overrides.out = out.cast<std::string>();
    return load_run_config(config, overrides);
}

py::dict shap_to_dict(const ShapExplanation& explanation) {
    py::dict d;
    d["base_value"] = explanation.base_value;
    d["contributions"] = explanation.contributions;
    d["prediction"] = explanation.prediction;
    d["feature_names"] = explanation.feature_names;
    d["feature_values"] = explanation.feature_values;
    return d;
}

// A loaded model document plus its serving plumbing: rows get their NaNs
// replaced by the training-split medians stored alongside the trees.
struct ServedModel {
    PipelineModel doc;

    std::vector<double> prepare(std::vector<double> x) const {
        const std::size_t want = doc.imputation.medians.size();
        if (x.size() != want)
            throw Error(ErrorCode::dimension_mismatch, "expected " + std::to_string(want) +
                                                           " features, got " +
                                                           std::to_string(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::isnan(x[i])) x[i] = doc.imputation.medians[i];
        return x;
    }

    const TreeEnsemble& classifier() const {
        if (doc.task != "classify")
            throw Error(ErrorCode::config, "not a classification model (task: " + doc.task + ")");
        return doc.classifier;
    }

    const TwoTargetModel& regressor() const {
        if (doc.task != "regress")
            throw Error(ErrorCode::config, "not a regression model (task: " + doc.task + ")");
        return doc.regressor;
    }
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Handball match prediction: Conway-Maxwell-Poisson team strengths, "
              "tree ensembles and exact TreeSHAP explanations.";
    m.attr("__version__") = "0.1.0";

    static py::exception<Error> handsel_error(m, "HandselError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string text =
                std::string(error_code_name(e.code())) + ": " + e.what();
            py::set_error(handsel_error, text.c_str());
        }
    });

    // --- Conway-Maxwell-Poisson core ---
    m.def(
        "log_normalizer",
        [](double lam, double nu) { return log_normalizer({lam, nu}); }, py::arg("lam"),
        py::arg("nu"), "log of the CMP normalizing constant Z(lambda, nu).");
    m.def(
        "pmf", [](double lam, double nu, int k) { return pmf({lam, nu}, k); }, py::arg("lam"),
        py::arg("nu"), py::arg("k"), "CMP probability mass at k.");
    m.def(
        "log_pmf", [](double lam, double nu, int k) { return log_pmf({lam, nu}, k); },
        py::arg("lam"), py::arg("nu"), py::arg("k"));
    m.def(
        "mean_variance",
        [](double lam, double nu) {
            const Moments mo = mean_variance({lam, nu});
            return std::make_pair(mo.mean, mo.variance);
        },
        py::arg("lam"), py::arg("nu"), "(mean, variance) of the CMP law.");
    m.def(
        "sample_cmp",
        [](double lam, double nu, int n, std::uint64_t seed) {
            return sample_cmp({lam, nu}, n, seed);
        },
        py::arg("lam"), py::arg("nu"), py::arg("n"), py::arg("seed"),
        "Draw n counts by inverse-CDF sampling.");
    m.def(
        "fit_mle",
        [](const std::vector<int>& samples) {
            const FitResult fit = fit_mle(samples);
            py::dict d;
            d["lambda"] = fit.params.lambda;
            d["nu"] = fit.params.nu;
            d["log_likelihood"] = fit.log_likelihood;
            d["n_samples"] = fit.n_samples;
            d["converged"] = fit.converged;
            d["nu_capped"] = fit.nu_capped;
            return d;
        },
        py::arg("samples"), "Maximum-likelihood CMP fit of integer counts.");
    m.def(
        "dispersion_index", [](const std::vector<int>& samples) { return dispersion_index(samples); },
        py::arg("samples"), "Sample variance over sample mean; < 1 means under-dispersed.");

    // --- strength functionals ---
    m.def(
        "attack_strength", [](double lam, double nu) { return attack_strength({lam, nu}); },
        py::arg("lam"), py::arg("nu"), "log(lambda)/nu from a fit of goals scored.");
    m.def(
        "defense_strength", [](double lam, double nu) { return defense_strength({lam, nu}); },
        py::arg("lam"), py::arg("nu"), "nu/log(lambda) from a fit of goals conceded.");

    // --- feature plumbing ---
    m.def("feature_names", &feature_names, py::arg("include_sel") = true,
          "Canonical feature column order; 37 names with strengths, 33 without.");
    m.def("haversine_km", &haversine_km, py::arg("lat_a"), py::arg("lon_a"), py::arg("lat_b"),
          py::arg("lon_b"));

    // --- evaluation metrics ---
    m.def(
        "accuracy",
        [](const std::vector<int>& labels, const std::vector<int>& predictions) {
            return accuracy(labels, predictions);
        },
        py::arg("labels"), py::arg("predictions"));
    m.def(
        "weighted_f1",
        [](const std::vector<int>& labels, const std::vector<int>& predictions) {
            return weighted_f1(labels, predictions);
        },
        py::arg("labels"), py::arg("predictions"));
    m.def(
        "brier",
        [](const std::vector<int>& labels, const std::vector<std::vector<double>>& probabilities) {
            return brier(labels, probabilities);
        },
        py::arg("labels"), py::arg("probabilities"),
        "Multi-class Brier score, sum-over-classes convention (range [0, 2]).");
    m.def(
        "rmse",
        [](const std::vector<double>& actual, const std::vector<double>& predicted) {
            return rmse(actual, predicted);
        },
        py::arg("actual"), py::arg("predicted"));
    m.def(
        "mape",
        [](const std::vector<double>& actual, const std::vector<double>& predicted) {
            return mape(actual, predicted);
        },
        py::arg("actual"), py::arg("predicted"));

    // --- pipeline stages (mirror the CLI subcommands) ---
    auto def_stage = [&m](const char* name, void (*stage)(const RunConfig&), const char* doc) {
        m.def(
            name,
            [stage](const std::string& config, const py::object& out, const py::object& seed,
                    const py::object& cutoff, const py::object& features, const py::object& model,
                    const py::object& task) {
                stage(build_config(config, out, seed, cutoff, features, model, task));
            },
            py::arg("config") = "", py::kw_only(), py::arg("out") = py::none(),
            py::arg("seed") = py::none(), py::arg("cutoff") = py::none(),
            py::arg("features") = py::none(), py::arg("model") = py::none(),
            py::arg("task") = py::none(), doc);
    };
    def_stage("synth", &run_synth, "Generate a synthetic league into the data directory.");
    def_stage("strengths", &run_strengths, "Fit attack/defense strengths as of the cutoff.");
    def_stage("featurize", &run_featurize,
              "Assemble train/test feature matrices and imputation tables.");
    def_stage("train", &run_train, "Train the selected model/task per feature set.");
    def_stage("evaluate", &run_evaluate,
              "Score every model family and task on the held-out split.");
    m.def(
        "predict",
        [](const std::string& fixtures, const std::string& config, const py::object& out,
           const py::object& seed, const py::object& cutoff, const py::object& features,
           const py::object& model, const py::object& task) {
            run_predict(build_config(config, out, seed, cutoff, features, model, task), fixtures);
        },
        py::arg("fixtures"), py::arg("config") = "", py::kw_only(), py::arg("out") = py::none(),
        py::arg("seed") = py::none(), py::arg("cutoff") = py::none(),
        py::arg("features") = py::none(), py::arg("model") = py::none(),
        py::arg("task") = py::none(), "Score a fixtures CSV with the trained model.");
    m.def(
        "explain",
        [](const std::string& match, bool global_importance, const std::string& config,
           const py::object& out, const py::object& seed, const py::object& cutoff,
           const py::object& features, const py::object& model, const py::object& task) {
            run_explain(build_config(config, out, seed, cutoff, features, model, task), match,
                        global_importance);
        },
        py::arg("match"), py::arg("global_importance") = false, py::arg("config") = "",
        py::kw_only(), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        py::arg("cutoff") = py::none(), py::arg("features") = py::none(),
        py::arg("model") = py::none(), py::arg("task") = py::none(),
        "Write force-plot data for one match (and optionally global importances).");

    // --- model serving ---
    py::class_<ServedModel>(m, "Model", "A trained model document ready to serve.")
        .def_static(
            "load", [](const std::string& path) { return ServedModel{load_pipeline_model(path)}; },
            py::arg("path"))
        .def_property_readonly("model", [](const ServedModel& s) { return s.doc.model; })
        .def_property_readonly("task", [](const ServedModel& s) { return s.doc.task; })
        .def_property_readonly("feature_set",
                               [](const ServedModel& s) { return s.doc.feature_set; })
        .def_property_readonly("feature_names",
                               [](const ServedModel& s) { return s.doc.imputation.names; })
        .def(
            "predict_proba",
            [](const ServedModel& s, std::vector<double> x) {
                return predict_proba(s.classifier(), s.prepare(std::move(x)));
            },
            py::arg("x"), "Outcome probabilities [home win, draw, away win].")
        .def(
            "predict_class",
            [](const ServedModel& s, std::vector<double> x) {
                const int cls = predict_class(s.classifier(), s.prepare(std::move(x)));
                return std::string(outcome_name(static_cast<Outcome>(cls)));
            },
            py::arg("x"))
        .def(
            "predict_scores",
            [](const ServedModel& s, std::vector<double> x) {
                return predict_scores(s.regressor(), s.prepare(std::move(x)));
            },
            py::arg("x"), "(home, away) expected goals.")
        .def(
            "scoreline",
            [](const ServedModel& s, std::vector<double> x) {
                const auto [home, away] = predict_scores(s.regressor(), s.prepare(std::move(x)));
                return format_scoreline(home, away);
            },
            py::arg("x"))
        .def(
            "explain",
            [](const ServedModel& s, std::vector<double> x) {
                const std::vector<double> row = s.prepare(std::move(x));
                if (s.doc.task == "classify") return shap_to_dict(tree_shap(s.classifier(), row));
                // Stack the two single-output regressors as outputs [home, away].
                const TwoTargetModel& two = s.regressor();
                ShapExplanation home = tree_shap(two.home, row);
                const ShapExplanation away = tree_shap(two.away, row);
                home.base_value.push_back(away.base_value[0]);
                home.contributions.push_back(away.contributions[0]);
                home.prediction.push_back(away.prediction[0]);
                return shap_to_dict(home);
            },
            py::arg("x"),
            "Exact per-feature attributions; base_value + sum(contributions) "
            "reconstructs each output.");
}
