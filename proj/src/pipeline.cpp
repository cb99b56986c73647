#include "handsel/pipeline.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <utility>

#include "handsel/csv.hpp"
#include "handsel/digest.hpp"
#include "handsel/metrics.hpp"
#include "handsel/shap.hpp"
#include "handsel/strength.hpp"

namespace handsel {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kClassCount = 3; // HomeWin, Draw, AwayWin

std::string path_join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void save_text(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open for writing: " + path);
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::io, "write failed: " + path);
    }
}

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, "invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

void save_json(const std::string& path, const json& doc) {
    save_text(path, doc.dump(2) + "\n");
}

void check_choice(const std::string& value, std::initializer_list<std::string_view> allowed,
                  const char* what) {
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
        std::string msg = std::string(what) + " must be one of {";
        bool first = true;
        for (auto a : allowed) {
            if (!first) msg += ", ";
            msg += a;
            first = false;
        }
        throw Error(ErrorCode::config, msg + "}, got \"" + value + "\"");
    }
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const char* where) {
    if (!obj.is_object()) {
        throw Error(ErrorCode::config, std::string(where) + " must be a JSON object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw Error(ErrorCode::config,
                        std::string("unknown key ") + where + "." + it.key());
        }
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const char* where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::config, std::string(where) + "." + key + " has the wrong type");
    }
}

void parse_synth(const json& obj, SynthConfig& out) {
    check_keys(obj,
               {"n_teams", "n_seasons", "rounds_per_season", "home_advantage", "base_mean_goals",
                "strength_spread", "noise_nu_min", "noise_nu_max"},
               "synth");
    read_field(obj, "n_teams", out.n_teams, "synth");
    read_field(obj, "n_seasons", out.n_seasons, "synth");
    read_field(obj, "rounds_per_season", out.rounds_per_season, "synth");
    read_field(obj, "home_advantage", out.home_advantage, "synth");
    read_field(obj, "base_mean_goals", out.base_mean_goals, "synth");
    read_field(obj, "strength_spread", out.strength_spread, "synth");
    read_field(obj, "noise_nu_min", out.noise_nu_range.first, "synth");
    read_field(obj, "noise_nu_max", out.noise_nu_range.second, "synth");
}

void parse_fit(const json& obj, FitConfig& out) {
    check_keys(obj, {"tolerance", "max_terms", "nu_cap", "max_iterations", "min_samples"}, "fit");
    read_field(obj, "tolerance", out.tolerance, "fit");
    read_field(obj, "max_terms", out.max_terms, "fit");
    read_field(obj, "nu_cap", out.nu_cap, "fit");
    read_field(obj, "max_iterations", out.max_iterations, "fit");
    read_field(obj, "min_samples", out.min_samples, "fit");
}

void parse_train(const json& obj, TrainConfig& out, const char* where) {
    check_keys(obj,
               {"n_trees", "max_depth", "min_samples_leaf", "features_per_split", "learning_rate",
                "subsample", "bootstrap"},
               where);
    read_field(obj, "n_trees", out.n_trees, where);
    read_field(obj, "max_depth", out.max_depth, where);
    read_field(obj, "min_samples_leaf", out.min_samples_leaf, where);
    read_field(obj, "features_per_split", out.features_per_split, where);
    read_field(obj, "learning_rate", out.learning_rate, where);
    read_field(obj, "subsample", out.subsample, where);
    read_field(obj, "bootstrap", out.bootstrap, where);
}

json synth_json(const SynthConfig& c) {
    json obj;
    obj["n_teams"] = c.n_teams;
    obj["n_seasons"] = c.n_seasons;
    obj["rounds_per_season"] = c.rounds_per_season;
    obj["home_advantage"] = c.home_advantage;
    obj["base_mean_goals"] = c.base_mean_goals;
    obj["strength_spread"] = c.strength_spread;
    obj["noise_nu_min"] = c.noise_nu_range.first;
    obj["noise_nu_max"] = c.noise_nu_range.second;
    return obj;
}

json fit_json(const FitConfig& c) {
    json obj;
    obj["tolerance"] = c.tolerance;
    obj["max_terms"] = c.max_terms;
    obj["nu_cap"] = c.nu_cap;
    obj["max_iterations"] = c.max_iterations;
    obj["min_samples"] = c.min_samples;
    return obj;
}

json train_json(const TrainConfig& c) {
    json obj;
    obj["n_trees"] = c.n_trees;
    obj["max_depth"] = c.max_depth;
    obj["min_samples_leaf"] = c.min_samples_leaf;
    obj["features_per_split"] = c.features_per_split;
    obj["learning_rate"] = c.learning_rate;
    obj["subsample"] = c.subsample;
    obj["bootstrap"] = c.bootstrap;
    return obj;
}

struct DataBundle {
    std::vector<MatchRecord> matches;
    std::vector<TeamRecord> teams;
    std::vector<PlayerRecord> players;
};

std::vector<std::string> data_paths(const RunConfig& config) {
    const std::string dir = config.resolved_data_dir();
    return {path_join(dir, "matches.csv"), path_join(dir, "teams.csv"),
            path_join(dir, "players.csv")};
}

DataBundle load_data(const RunConfig& config) {
    const auto paths = data_paths(config);
    DataBundle data;
    data.matches = parse_matches(paths[0]);
    data.teams = parse_teams(paths[1]);
    data.players = parse_players(paths[2]);
    return data;
}

std::vector<std::string> team_ids(const std::vector<TeamRecord>& teams) {
    std::vector<std::string> ids;
    ids.reserve(teams.size());
    for (const auto& t : teams) ids.push_back(t.team_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void write_manifest(const RunConfig& config, const std::string& stage,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths) {
    json doc;
    doc["format"] = "handsel-manifest";
    doc["version"] = 1;
    doc["stage"] = stage;
    doc["seed"] = config.seed;
    doc["config_sha256"] = sha256_hex(config.semantic_json().dump(2));
    // Digest maps are keyed by file name, not path, so runs into different
    // directories produce identical manifests.
    json inputs = json::object();
    for (const auto& p : input_paths) {
        inputs[fs::path(p).filename().string()] = sha256_file(p);
    }
    doc["inputs"] = inputs;
    json outputs = json::object();
    for (const auto& p : output_paths) {
        outputs[fs::path(p).filename().string()] = sha256_file(p);
    }
    doc["outputs"] = outputs;
    save_json(path_join(config.out_dir, "manifest_" + stage + ".json"), doc);
}

// The ablation needs classical and SEL models scored on identical rows, so
// the classical matrix is the SEL matrix minus the four strength columns.
Dataset project_classical(const Dataset& full) {
    if (full.features.cols() != static_cast<std::size_t>(kNumFeatures)) {
        throw Error(ErrorCode::invariant_violation,
                    "expected the full feature matrix before projecting the classical block");
    }
    Dataset out;
    out.feature_names.assign(full.feature_names.begin(),
                             full.feature_names.begin() + kNumClassical);
    out.match_ids = full.match_ids;
    out.features = Matrix(0, kNumClassical);
    for (std::size_t r = 0; r < full.features.rows(); ++r) {
        out.features.append_row(full.features.row(r).subspan(0, kNumClassical));
    }
    out.targets = full.targets;
    out.issues = full.issues;
    return out;
}

Dataset subset_rows(const Dataset& full, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.feature_names = full.feature_names;
    out.features = Matrix(0, full.features.cols());
    for (std::size_t r : rows) {
        out.match_ids.push_back(full.match_ids[r]);
        out.features.append_row(full.features.row(r));
        out.targets.push_back(full.targets[r]);
    }
    return out;
}

std::vector<int> class_labels(const Dataset& dataset) {
    std::vector<int> labels;
    labels.reserve(dataset.match_ids.size());
    for (std::size_t i = 0; i < dataset.match_ids.size(); ++i) {
        if (!dataset.targets[i]) {
            throw Error(ErrorCode::missing_score,
                        "match " + dataset.match_ids[i] + " has no result");
        }
        labels.push_back(static_cast<int>(dataset.targets[i]->outcome));
    }
    return labels;
}

std::pair<std::vector<double>, std::vector<double>> goal_targets(const Dataset& dataset) {
    std::vector<double> home, away;
    home.reserve(dataset.match_ids.size());
    away.reserve(dataset.match_ids.size());
    for (std::size_t i = 0; i < dataset.match_ids.size(); ++i) {
        if (!dataset.targets[i]) {
            throw Error(ErrorCode::missing_score,
                        "match " + dataset.match_ids[i] + " has no result");
        }
        home.push_back(dataset.targets[i]->home_goals);
        away.push_back(dataset.targets[i]->away_goals);
    }
    return {std::move(home), std::move(away)};
}

std::string ablation_label(const std::string& set) {
    return set == "classical" ? "classical" : "classical+SEL";
}

TrainConfig family_config(const RunConfig& config, const std::string& family) {
    TrainConfig tc = (family == "forest") ? config.forest : config.gbt;
    tc.seed = config.seed;
    return tc;
}

PipelineModel fit_pipeline_model(const RunConfig& config, const std::string& family,
                                 const std::string& task, const std::string& set,
                                 const Dataset& train, ImputationTable imputation) {
    TrainConfig tc = family_config(config, family);
    PipelineModel pm;
    pm.model = family;
    pm.task = task;
    pm.feature_set = set;
    pm.imputation = std::move(imputation);
    if (task == "classify") {
        const std::vector<int> labels = class_labels(train);
        pm.classifier = (family == "forest")
                            ? train_random_forest(train.features, labels, kClassCount, tc)
                            : train_gbt(train.features, labels, kClassCount, tc);
        pm.classifier.feature_names = train.feature_names;
    } else {
        const auto [home, away] = goal_targets(train);
        const EnsembleKind kind =
            (family == "forest") ? EnsembleKind::forest_mean : EnsembleKind::boosted_sum;
        pm.regressor = train_two_target(train.features, home, away, kind, tc);
        pm.regressor.home.feature_names = train.feature_names;
        pm.regressor.away.feature_names = train.feature_names;
    }
    return pm;
}

std::string train_log_text(const PipelineModel& pm, const TrainConfig& tc, const Dataset& train) {
    std::ostringstream out;
    out << "model: " << pm.model << "\n";
    out << "task: " << pm.task << "\n";
    out << "features: " << pm.feature_set << "\n";
    out << "rows: " << train.match_ids.size() << "\n";
    out << "columns: " << train.features.cols() << "\n";
    out << "n_trees: " << tc.n_trees << "\n";
    out << "max_depth: " << tc.max_depth << "\n";
    out << "min_samples_leaf: " << tc.min_samples_leaf << "\n";
    out << "features_per_split: " << tc.features_per_split << "\n";
    out << "learning_rate: " << format_double(tc.learning_rate) << "\n";
    out << "subsample: " << format_double(tc.subsample) << "\n";
    out << "bootstrap: " << (tc.bootstrap ? "true" : "false") << "\n";
    out << "seed: " << tc.seed << "\n";
    if (pm.task == "classify") {
        const std::vector<int> labels = class_labels(train);
        std::vector<int> predicted;
        std::vector<std::vector<double>> probabilities;
        predicted.reserve(labels.size());
        probabilities.reserve(labels.size());
        for (std::size_t r = 0; r < train.features.rows(); ++r) {
            predicted.push_back(predict_class(pm.classifier, train.features.row(r)));
            probabilities.push_back(predict_proba(pm.classifier, train.features.row(r)));
        }
        out << "train_accuracy: " << format_double(accuracy(labels, predicted)) << "\n";
        out << "train_weighted_f1: " << format_double(weighted_f1(labels, predicted)) << "\n";
        out << "train_brier: " << format_double(brier(labels, probabilities)) << "\n";
    } else {
        const auto [home, away] = goal_targets(train);
        std::vector<double> pred_home, pred_away;
        pred_home.reserve(home.size());
        pred_away.reserve(away.size());
        for (std::size_t r = 0; r < train.features.rows(); ++r) {
            const auto scores = predict_scores(pm.regressor, train.features.row(r));
            pred_home.push_back(scores.first);
            pred_away.push_back(scores.second);
        }
        out << "train_rmse_home: " << format_double(rmse(home, pred_home)) << "\n";
        out << "train_rmse_away: " << format_double(rmse(away, pred_away)) << "\n";
    }
    return out.str();
}

ImputationTable load_imputation(const std::string& path) {
    return imputation_from_json(load_json(path));
}

// Feature rows for a batch of fixtures against the recorded history; every
// fixture must resolve (prediction silently dropping rows would be worse
// than an error).
Dataset fixture_dataset(const RunConfig& config, const DataBundle& data,
                        std::span<const MatchRecord> fixtures, bool include_sel) {
    StrengthProvider provider(data.matches, team_ids(data.teams), config.fit);
    FeatureBuilder builder(data.teams, data.players, &provider);
    Dataset ds = assemble_dataset(fixtures, builder, include_sel, /*require_targets=*/false);
    if (!ds.issues.empty()) {
        throw Error(ErrorCode::unresolved_roster, ds.issues.front());
    }
    return ds;
}

void check_model_selector(const RunConfig& config, const char* stage) {
    if (config.features == "both") {
        throw Error(ErrorCode::config, std::string(stage) +
                                           " serves a single model; pass --features classical "
                                           "or --features sel");
    }
}

const std::array<std::string, 3> kOutcomeFileNames = {"home_win", "draw", "away_win"};

} // namespace

void RunConfig::validate() const {
    if (out_dir.empty()) {
        throw Error(ErrorCode::config, "out_dir must not be empty");
    }
    check_choice(features, {"classical", "sel", "both"}, "features");
    check_choice(model, {"forest", "gbt"}, "model");
    check_choice(task, {"classify", "regress"}, "task");
    if (!cutoff.empty()) {
        parse_date(cutoff); // throws on malformed dates
    }
    SynthConfig sc = synth;
    sc.seed = seed;
    sc.validate();
    fit.validate();
    TrainConfig fc = forest;
    fc.seed = seed;
    fc.validate();
    TrainConfig gc = gbt;
    gc.seed = seed;
    gc.validate();
}

std::string RunConfig::resolved_data_dir() const {
    return data_dir.empty() ? path_join(out_dir, "data") : data_dir;
}

Date RunConfig::resolve_cutoff(std::span<const MatchRecord> matches) const {
    if (!cutoff.empty()) {
        return parse_date(cutoff);
    }
    if (matches.empty()) {
        throw Error(ErrorCode::empty_input, "no matches to derive a cutoff from");
    }
    Date last = matches.front().start_time.utc_date();
    for (const auto& m : matches) {
        last = std::max(last, m.start_time.utc_date());
    }
    return Date{season_start_year(last), 7, 1};
}

json RunConfig::semantic_json() const {
    json doc;
    doc["seed"] = seed;
    doc["cutoff"] = cutoff;
    doc["features"] = features;
    doc["model"] = model;
    doc["task"] = task;
    doc["synth"] = synth_json(synth);
    doc["fit"] = fit_json(fit);
    doc["forest"] = train_json(forest);
    doc["gbt"] = train_json(gbt);
    return doc;
}

RunConfig load_run_config(const std::string& config_path, const ConfigOverrides& overrides) {
    RunConfig config;
    if (!config_path.empty()) {
        const json doc = load_json(config_path);
        check_keys(doc,
                   {"out_dir", "data_dir", "seed", "cutoff", "features", "model", "task", "synth",
                    "fit", "forest", "gbt"},
                   "config");
        read_field(doc, "out_dir", config.out_dir, "config");
        read_field(doc, "data_dir", config.data_dir, "config");
        read_field(doc, "seed", config.seed, "config");
        read_field(doc, "cutoff", config.cutoff, "config");
        read_field(doc, "features", config.features, "config");
        read_field(doc, "model", config.model, "config");
        read_field(doc, "task", config.task, "config");
        if (doc.contains("synth")) parse_synth(doc.at("synth"), config.synth);
        if (doc.contains("fit")) parse_fit(doc.at("fit"), config.fit);
        if (doc.contains("forest")) parse_train(doc.at("forest"), config.forest, "forest");
        if (doc.contains("gbt")) parse_train(doc.at("gbt"), config.gbt, "gbt");
    }
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.cutoff) config.cutoff = *overrides.cutoff;
    if (overrides.features) config.features = *overrides.features;
    if (overrides.model) config.model = *overrides.model;
    if (overrides.task) config.task = *overrides.task;
    if (overrides.out) config.out_dir = *overrides.out;
    config.validate();
    return config;
}

std::vector<std::string> selected_feature_sets(const RunConfig& config) {
    if (config.features == "both") {
        return {"classical", "sel"};
    }
    return {config.features};
}

std::string dataset_file(const RunConfig& config, std::string_view split, std::string_view set) {
    return path_join(config.out_dir,
                     "features_" + std::string(split) + "_" + std::string(set) + ".csv");
}

std::string imputation_file(const RunConfig& config, std::string_view set) {
    return path_join(config.out_dir, "imputation_" + std::string(set) + ".json");
}

std::string model_file(const RunConfig& config, std::string_view model, std::string_view task,
                       std::string_view set) {
    return path_join(config.out_dir, "model_" + std::string(model) + "_" + std::string(task) +
                                         "_" + std::string(set) + ".json");
}

json imputation_to_json(const ImputationTable& table) {
    if (table.names.size() != table.medians.size()) {
        throw Error(ErrorCode::length_mismatch, "imputation names and medians disagree");
    }
    json doc;
    doc["format"] = "handsel-imputation";
    doc["version"] = 1;
    doc["names"] = table.names;
    doc["medians"] = table.medians;
    return doc;
}

ImputationTable imputation_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "handsel-imputation") {
        throw Error(ErrorCode::config, "not an imputation document");
    }
    if (doc.value("version", 0) != 1) {
        throw Error(ErrorCode::config, "unsupported imputation document version");
    }
    ImputationTable table;
    read_field(doc, "names", table.names, "imputation");
    read_field(doc, "medians", table.medians, "imputation");
    if (table.names.size() != table.medians.size()) {
        throw Error(ErrorCode::length_mismatch, "imputation names and medians disagree");
    }
    return table;
}

json pipeline_model_to_json(const PipelineModel& model) {
    json doc;
    doc["format"] = "handsel-pipeline-model";
    doc["version"] = 1;
    doc["model"] = model.model;
    doc["task"] = model.task;
    doc["features"] = model.feature_set;
    doc["imputation"] = imputation_to_json(model.imputation);
    if (model.task == "classify") {
        doc["classifier"] = ensemble_to_json(model.classifier);
    } else {
        doc["regressor"] = two_target_to_json(model.regressor);
    }
    return doc;
}

PipelineModel pipeline_model_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "handsel-pipeline-model") {
        throw Error(ErrorCode::config, "not a pipeline model document");
    }
    if (doc.value("version", 0) != 1) {
        throw Error(ErrorCode::config, "unsupported pipeline model version");
    }
    PipelineModel model;
    read_field(doc, "model", model.model, "model");
    read_field(doc, "task", model.task, "model");
    read_field(doc, "features", model.feature_set, "model");
    check_choice(model.model, {"forest", "gbt"}, "model.model");
    check_choice(model.task, {"classify", "regress"}, "model.task");
    check_choice(model.feature_set, {"classical", "sel"}, "model.features");
    if (!doc.contains("imputation")) {
        throw Error(ErrorCode::config, "pipeline model lacks its imputation table");
    }
    model.imputation = imputation_from_json(doc.at("imputation"));
    if (model.task == "classify") {
        if (!doc.contains("classifier")) {
            throw Error(ErrorCode::config, "classification model lacks a classifier");
        }
        model.classifier = ensemble_from_json(doc.at("classifier"));
    } else {
        if (!doc.contains("regressor")) {
            throw Error(ErrorCode::config, "regression model lacks a regressor");
        }
        model.regressor = two_target_from_json(doc.at("regressor"));
    }
    return model;
}

PipelineModel load_pipeline_model(const std::string& path) {
    return pipeline_model_from_json(load_json(path));
}

void run_synth(const RunConfig& config) {
    SynthConfig sc = config.synth;
    sc.seed = config.seed;
    const SynthData data = generate_synthetic(sc);
    const std::string dir = config.resolved_data_dir();
    fs::create_directories(dir);
    const auto paths = data_paths(config);
    write_matches(paths[0], data.matches);
    write_teams(paths[1], data.teams);
    write_players(paths[2], data.players);
    write_manifest(config, "synth", {}, paths);
}

void run_strengths(const RunConfig& config) {
    const DataBundle data = load_data(config);
    const Date cutoff = config.resolve_cutoff(data.matches);
    const auto ids = team_ids(data.teams);
    StrengthProvider provider(data.matches, ids, config.fit);
    CsvTable table;
    table.header = {"team_id",       "as_of",      "s_attack",       "s_defense",
                    "attack_lambda", "attack_nu",  "defense_lambda", "defense_nu",
                    "n_matches",     "imputed"};
    for (const auto& id : ids) {
        const TeamStrength& s = provider.get(id, cutoff);
        table.rows.push_back({s.team_id, format_date(s.as_of), format_double(s.s_attack),
                              format_double(s.s_defense), format_double(s.attack_params.lambda),
                              format_double(s.attack_params.nu),
                              format_double(s.defense_params.lambda),
                              format_double(s.defense_params.nu), std::to_string(s.n_matches),
                              s.imputed ? "true" : "false"});
    }
    fs::create_directories(config.out_dir);
    const std::string out_path = path_join(config.out_dir, "strengths.csv");
    write_csv(out_path, table);
    write_manifest(config, "strengths", data_paths(config), {out_path});
}

void run_featurize(const RunConfig& config) {
    const DataBundle data = load_data(config);
    const Date cutoff = config.resolve_cutoff(data.matches);
    StrengthProvider provider(data.matches, team_ids(data.teams), config.fit);
    FeatureBuilder builder(data.teams, data.players, &provider);
    const Dataset full =
        assemble_dataset(data.matches, builder, /*include_sel=*/true, /*require_targets=*/true);

    std::map<std::string, Date> date_by_id;
    for (const auto& m : data.matches) {
        date_by_id[m.match_id] = m.start_time.utc_date();
    }
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < full.match_ids.size(); ++i) {
        (date_by_id.at(full.match_ids[i]) < cutoff ? train_rows : test_rows).push_back(i);
    }
    if (train_rows.empty() || test_rows.empty()) {
        throw Error(ErrorCode::empty_split, "cutoff " + format_date(cutoff) +
                                                " leaves an empty train or test side");
    }

    fs::create_directories(config.out_dir);
    std::vector<std::string> outputs;
    for (const auto& set : selected_feature_sets(config)) {
        const Dataset view = (set == "classical") ? project_classical(full) : full;
        Dataset train = subset_rows(view, train_rows);
        Dataset test = subset_rows(view, test_rows);
        const ImputationTable imputation = fit_imputation(train);
        apply_imputation(train, imputation);
        apply_imputation(test, imputation);
        const std::string train_path = dataset_file(config, "train", set);
        const std::string test_path = dataset_file(config, "test", set);
        const std::string imp_path = imputation_file(config, set);
        write_dataset(train_path, train);
        write_dataset(test_path, test);
        save_json(imp_path, imputation_to_json(imputation));
        outputs.insert(outputs.end(), {train_path, test_path, imp_path});
    }
    write_manifest(config, "featurize", data_paths(config), outputs);
}

void run_train(const RunConfig& config) {
    fs::create_directories(config.out_dir);
    std::vector<std::string> inputs, outputs;
    for (const auto& set : selected_feature_sets(config)) {
        const std::string train_path = dataset_file(config, "train", set);
        const std::string imp_path = imputation_file(config, set);
        const Dataset train = read_dataset(train_path);
        const ImputationTable imputation = load_imputation(imp_path);
        inputs.insert(inputs.end(), {train_path, imp_path});

        const PipelineModel pm =
            fit_pipeline_model(config, config.model, config.task, set, train, imputation);
        const std::string model_path = model_file(config, config.model, config.task, set);
        save_json(model_path, pipeline_model_to_json(pm));
        const std::string log_path = path_join(
            config.out_dir, "train_" + config.model + "_" + config.task + "_" + set + ".log");
        save_text(log_path, train_log_text(pm, family_config(config, config.model), train));
        outputs.insert(outputs.end(), {model_path, log_path});
    }
    write_manifest(config, "train", inputs, outputs);
}

void run_evaluate(const RunConfig& config) {
    fs::create_directories(config.out_dir);
    std::vector<std::string> inputs;
    struct SplitPair {
        std::string set;
        Dataset train;
        Dataset test;
    };
    std::vector<SplitPair> splits;
    for (const auto& set : selected_feature_sets(config)) {
        const std::string train_path = dataset_file(config, "train", set);
        const std::string test_path = dataset_file(config, "test", set);
        splits.push_back({set, read_dataset(train_path), read_dataset(test_path)});
        inputs.insert(inputs.end(), {train_path, test_path});
    }

    // The ablation table always covers both model families and both tasks;
    // --model/--task only steer train/predict/explain.
    std::vector<ClassificationReport> classification;
    std::vector<RegressionReport> regression;
    for (const std::string family : {"forest", "gbt"}) {
        for (const auto& split : splits) {
            const std::string label = ablation_label(split.set);
            const PipelineModel cls =
                fit_pipeline_model(config, family, "classify", split.set, split.train, {});
            classification.push_back(classification_report(family, label, cls.classifier,
                                                           split.test.features,
                                                           class_labels(split.test)));
            const PipelineModel reg =
                fit_pipeline_model(config, family, "regress", split.set, split.train, {});
            const auto [home, away] = goal_targets(split.test);
            regression.push_back(regression_report(family, label, reg.regressor,
                                                   split.test.features, home, away));
        }
    }
    const std::string classify_path = path_join(config.out_dir, "report_classify.csv");
    const std::string regress_path = path_join(config.out_dir, "report_regress.csv");
    write_reports(classify_path, classification);
    write_reports(regress_path, regression);
    write_manifest(config, "evaluate", inputs, {classify_path, regress_path});
}

void run_predict(const RunConfig& config, const std::string& fixtures_path) {
    check_model_selector(config, "predict");
    const std::string model_path =
        model_file(config, config.model, config.task, config.features);
    const PipelineModel pm = load_pipeline_model(model_path);
    const DataBundle data = load_data(config);
    const std::vector<MatchRecord> fixtures = parse_matches(fixtures_path);
    if (fixtures.empty()) {
        throw Error(ErrorCode::empty_input, "no fixtures in " + fixtures_path);
    }
    Dataset ds = fixture_dataset(config, data, fixtures, pm.feature_set == "sel");
    apply_imputation(ds, pm.imputation);

    CsvTable table;
    if (pm.task == "regress") {
        table.header = {"match_id", "pred_home", "pred_away", "scoreline"};
        for (std::size_t r = 0; r < ds.features.rows(); ++r) {
            const auto scores = predict_scores(pm.regressor, ds.features.row(r));
            table.rows.push_back({ds.match_ids[r], format_double(scores.first),
                                  format_double(scores.second),
                                  format_scoreline(scores.first, scores.second)});
        }
    } else {
        table.header = {"match_id", "p_home_win", "p_draw", "p_away_win", "outcome"};
        for (std::size_t r = 0; r < ds.features.rows(); ++r) {
            const auto probs = predict_proba(pm.classifier, ds.features.row(r));
            const int cls = predict_class(pm.classifier, ds.features.row(r));
            table.rows.push_back({ds.match_ids[r], format_double(probs[0]),
                                  format_double(probs[1]), format_double(probs[2]),
                                  std::string(outcome_name(static_cast<Outcome>(cls)))});
        }
    }
    fs::create_directories(config.out_dir);
    const std::string out_path = path_join(config.out_dir, "predictions.csv");
    write_csv(out_path, table);
    auto inputs = data_paths(config);
    inputs.insert(inputs.end(), {model_path, fixtures_path});
    write_manifest(config, "predict", inputs, {out_path});
}

void run_explain(const RunConfig& config, const std::string& match_id, bool with_global) {
    check_model_selector(config, "explain");
    const std::string model_path =
        model_file(config, config.model, config.task, config.features);
    const PipelineModel pm = load_pipeline_model(model_path);
    const DataBundle data = load_data(config);
    const auto it = std::find_if(data.matches.begin(), data.matches.end(),
                                 [&](const MatchRecord& m) { return m.match_id == match_id; });
    if (it == data.matches.end()) {
        throw Error(ErrorCode::config, "unknown match id: " + match_id);
    }
    Dataset ds = fixture_dataset(config, data, {&*it, 1}, pm.feature_set == "sel");
    apply_imputation(ds, pm.imputation);
    const auto x = ds.features.row(0);

    fs::create_directories(config.out_dir);
    auto inputs = data_paths(config);
    inputs.push_back(model_path);
    std::vector<std::string> outputs;
    if (pm.task == "regress") {
        const ShapExplanation home = tree_shap(pm.regressor.home, x);
        const ShapExplanation away = tree_shap(pm.regressor.away, x);
        const std::string home_path =
            path_join(config.out_dir, "force_" + match_id + "_home.csv");
        const std::string away_path =
            path_join(config.out_dir, "force_" + match_id + "_away.csv");
        export_force_data(home, 0, home_path);
        export_force_data(away, 0, away_path);
        outputs.insert(outputs.end(), {home_path, away_path});
    } else {
        const ShapExplanation explanation = tree_shap(pm.classifier, x);
        for (int output = 0; output < kClassCount; ++output) {
            const std::string path = path_join(
                config.out_dir, "force_" + match_id + "_" + kOutcomeFileNames[output] + ".csv");
            export_force_data(explanation, output, path);
            outputs.push_back(path);
        }
    }

    if (with_global) {
        const std::string test_path = dataset_file(config, "test", pm.feature_set);
        const Dataset test = read_dataset(test_path);
        inputs.push_back(test_path);
        if (pm.task == "regress") {
            const std::string home_path = path_join(config.out_dir, "importance_home.csv");
            const std::string away_path = path_join(config.out_dir, "importance_away.csv");
            write_importance(home_path, global_importance(pm.regressor.home, test.features));
            write_importance(away_path, global_importance(pm.regressor.away, test.features));
            outputs.insert(outputs.end(), {home_path, away_path});
        } else {
            const std::string path = path_join(config.out_dir, "importance.csv");
            write_importance(path, global_importance(pm.classifier, test.features));
            outputs.push_back(path);
        }
    }
    write_manifest(config, "explain", inputs, outputs);
}

std::string error_report(const Error& error) {
    json doc;
    doc["error"]["code"] = std::string(error_code_name(error.code()));
    doc["error"]["message"] = error.what();
    return doc.dump();
}

} // namespace handsel
