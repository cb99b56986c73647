#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "handsel/cmp.hpp"
#include "handsel/error.hpp"
#include "handsel/features.hpp"
#include "handsel/records.hpp"
#include "handsel/trees.hpp"

namespace handsel {

// Boosted models default to shallow trees; everything else follows TrainConfig.
inline TrainConfig default_gbt_config() {
    TrainConfig config;
    config.max_depth = 3;
    return config;
}

// Resolved settings for one CLI invocation. A single seed drives the
// generator and every learner; the seed fields inside the sub-configs are
// ignored so "same config, same seed" cannot silently diverge.
struct RunConfig {
    std::string out_dir = "out";
    std::string data_dir;          // empty = <out_dir>/data
    std::uint64_t seed = 42;
    std::string cutoff;            // "YYYY-MM-DD"; empty = start of the last season
    std::string features = "both"; // classical | sel | both
    std::string model = "forest";  // forest | gbt
    std::string task = "classify"; // classify | regress
    SynthConfig synth;
    FitConfig fit;
    TrainConfig forest;
    TrainConfig gbt = default_gbt_config();

    void validate() const;
    std::string resolved_data_dir() const;
    // Explicit cutoff when set, otherwise July 1 opening the season of the
    // latest match (so the default test side is the final season).
    Date resolve_cutoff(std::span<const MatchRecord> matches) const;
    // Path-free view of the settings; its hash goes into manifests, so two
    // runs into different directories stay byte-identical.
    nlohmann::json semantic_json() const;
};

// Flag-level overrides; anything set here wins over the JSON file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> cutoff;
    std::optional<std::string> features;
    std::optional<std::string> model;
    std::optional<std::string> task;
    std::optional<std::string> out;
};

// config_path may be empty (defaults only). Unknown JSON keys are rejected.
RunConfig load_run_config(const std::string& config_path, const ConfigOverrides& overrides);

// {"classical", "sel"} for the "both" selector, else the single choice.
std::vector<std::string> selected_feature_sets(const RunConfig& config);

// Artifact locations inside config.out_dir.
std::string dataset_file(const RunConfig& config, std::string_view split, std::string_view set);
std::string imputation_file(const RunConfig& config, std::string_view set);
std::string model_file(const RunConfig& config, std::string_view model, std::string_view task,
                       std::string_view set);

nlohmann::json imputation_to_json(const ImputationTable& table);
ImputationTable imputation_from_json(const nlohmann::json& doc);

// A trained model bundled with everything needed to serve it: the feature
// set it expects and the training-split imputation medians.
struct PipelineModel {
    std::string model;       // forest | gbt
    std::string task;        // classify | regress
    std::string feature_set; // classical | sel
    ImputationTable imputation;
    TreeEnsemble classifier; // task == classify
    TwoTargetModel regressor; // task == regress
};

nlohmann::json pipeline_model_to_json(const PipelineModel& model);
PipelineModel pipeline_model_from_json(const nlohmann::json& doc);
PipelineModel load_pipeline_model(const std::string& path);

// Pipeline stages. Each reads only its declared inputs, writes only into
// config.out_dir (synth into the data directory) and drops a
// manifest_<stage>.json with the config hash and all file digests.
void run_synth(const RunConfig& config);
void run_strengths(const RunConfig& config);
void run_featurize(const RunConfig& config);
void run_train(const RunConfig& config);
void run_evaluate(const RunConfig& config);
void run_predict(const RunConfig& config, const std::string& fixtures_path);
void run_explain(const RunConfig& config, const std::string& match_id, bool with_global);

// Single-line JSON for stderr: {"error":{"code":...,"message":...}}.
std::string error_report(const Error& error);

} // namespace handsel
