#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "handsel/csv.hpp"
#include "handsel/digest.hpp"
#include "handsel/error.hpp"
#include "handsel/pipeline.hpp"
#include "handsel/shap.hpp"

using namespace handsel;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const fs::path dir = fs::temp_directory_path() / "handsel_pipeline_test";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Two seasons of eight teams keep every stage under a second while still
// producing draws (all three outcome classes) in the training split.
RunConfig small_config(const std::string& out_dir) {
    RunConfig config;
    config.out_dir = out_dir;
    config.synth.n_teams = 8;
    config.synth.n_seasons = 2;
    config.forest.n_trees = 20;
    config.gbt.n_trees = 25;
    config.validate();
    return config;
}

// All six stages; predict scores the last three matches as unplayed
// fixtures, explain targets a mid-season test match.
void run_all(const RunConfig& config, const std::string& match_id) {
    run_synth(config);
    run_strengths(config);
    run_featurize(config);
    run_train(config);
    run_evaluate(config);

    auto fixtures = parse_matches(config.resolved_data_dir() + "/matches.csv");
    fixtures.erase(fixtures.begin(), fixtures.end() - 3);
    for (auto& m : fixtures) {
        m.home_goals.reset();
        m.away_goals.reset();
    }
    const std::string fixtures_path = config.out_dir + "/fixtures.csv";
    write_matches(fixtures_path, fixtures);
    RunConfig serve = config;
    serve.features = "sel";
    run_predict(serve, fixtures_path);
    run_explain(serve, match_id, /*with_global=*/true);
}

} // namespace

TEST_CASE("run config: defaults, file values and flag overrides") {
    const RunConfig defaults = load_run_config("", {});
    CHECK(defaults.out_dir == "out");
    CHECK(defaults.resolved_data_dir() == "out/data");
    CHECK(defaults.seed == 42);
    CHECK(defaults.features == "both");
    CHECK(defaults.forest.max_depth == 6);
    CHECK(defaults.gbt.max_depth == 3); // boosting default is shallow

    const auto dir = tmp_dir();
    const auto path = dir / "config.json";
    write_text(path, R"({
      "out_dir": "elsewhere",
      "seed": 7,
      "synth": {"n_teams": 6, "noise_nu_min": 1.5},
      "gbt": {"n_trees": 77, "learning_rate": 0.05}
    })");
    const RunConfig from_file = load_run_config(path.string(), {});
    CHECK(from_file.out_dir == "elsewhere");
    CHECK(from_file.seed == 7);
    CHECK(from_file.synth.n_teams == 6);
    CHECK(from_file.synth.noise_nu_range.first == 1.5);
    CHECK(from_file.synth.noise_nu_range.second == 2.2); // untouched default
    CHECK(from_file.gbt.n_trees == 77);
    CHECK(from_file.gbt.learning_rate == 0.05);

    ConfigOverrides flags;
    flags.seed = 99;
    flags.out = "flagged";
    flags.features = "sel";
    const RunConfig overridden = load_run_config(path.string(), flags);
    CHECK(overridden.seed == 99);
    CHECK(overridden.out_dir == "flagged");
    CHECK(overridden.features == "sel");
    CHECK(overridden.synth.n_teams == 6); // file value survives

    CHECK(selected_feature_sets(defaults) == std::vector<std::string>{"classical", "sel"});
    CHECK(selected_feature_sets(overridden) == std::vector<std::string>{"sel"});
}

TEST_CASE("run config: rejection of unknown keys and bad selectors") {
    const auto dir = tmp_dir();
    const auto typo = dir / "typo.json";
    write_text(typo, R"({"synth": {"n_team": 6}})");
    CHECK(code_of([&] { load_run_config(typo.string(), {}); }) == ErrorCode::config);

    ConfigOverrides flags;
    flags.model = "xgboost";
    CHECK(code_of([&] { load_run_config("", flags); }) == ErrorCode::config);

    flags = {};
    flags.cutoff = "not-a-date";
    CHECK(code_of([&] { load_run_config("", flags); }).has_value());

    CHECK(code_of([&] { load_run_config((dir / "absent.json").string(), {}); }) ==
          ErrorCode::io);

    const auto invalid = dir / "invalid.json";
    write_text(invalid, "{nope");
    CHECK(code_of([&] { load_run_config(invalid.string(), {}); }) == ErrorCode::config);
}

TEST_CASE("cutoff resolution: explicit date, else the final season opening") {
    RunConfig config;
    std::vector<MatchRecord> matches(2);
    matches[0].start_time = parse_timestamp("2022-10-01T17:00:00Z");
    matches[1].start_time = parse_timestamp("2024-03-15T19:00:00Z"); // season 2023/2024
    CHECK(config.resolve_cutoff(matches) == Date{2023, 7, 1});

    config.cutoff = "2022-01-04";
    CHECK(config.resolve_cutoff(matches) == Date{2022, 1, 4});

    config.cutoff.clear();
    CHECK(code_of([&] { config.resolve_cutoff({}); }) == ErrorCode::empty_input);
}

TEST_CASE("imputation table round-trips through JSON") {
    ImputationTable table;
    table.names = {"a", "b"};
    table.medians = {1.5, -0.25};
    const ImputationTable back = imputation_from_json(imputation_to_json(table));
    CHECK(back.names == table.names);
    CHECK(back.medians == table.medians);

    nlohmann::json broken = imputation_to_json(table);
    broken["medians"] = {1.0};
    CHECK(code_of([&] { imputation_from_json(broken); }) == ErrorCode::length_mismatch);
    CHECK(code_of([&] { imputation_from_json(nlohmann::json::object()); }) ==
          ErrorCode::config);
}

TEST_CASE("pipeline end to end: artifacts, shapes and cross-checks") {
    const auto root = tmp_dir() / "full";
    fs::remove_all(root);
    const RunConfig config = small_config(root.string());
    const std::string match_id = "s2022r10g1";
    run_all(config, match_id);

    // every stage leaves its manifest
    for (const std::string stage :
         {"synth", "strengths", "featurize", "train", "evaluate", "predict", "explain"}) {
        CHECK(fs::exists(root / ("manifest_" + stage + ".json")));
    }

    // featurize manifest digests match the files on disk
    {
        nlohmann::json manifest;
        std::ifstream in(root / "manifest_featurize.json");
        in >> manifest;
        CHECK(manifest.at("config_sha256") ==
              sha256_hex(config.semantic_json().dump(2)));
        for (const auto& [name, digest] : manifest.at("outputs").items()) {
            CHECK(digest.get<std::string>() == sha256_file((root / name).string()));
        }
        for (const auto& [name, digest] : manifest.at("inputs").items()) {
            CHECK(digest.get<std::string>() ==
                  sha256_file((root / "data" / name).string()));
        }
    }

    // strengths table: one row per team, as_of at the auto cutoff
    {
        const CsvTable table = read_csv((root / "strengths.csv").string());
        CHECK(table.rows.size() == 8);
        CHECK(table.column("s_attack") >= 0);
        for (const auto& row : table.rows) {
            CHECK(row[size_t(table.column("as_of"))] == "2022-07-01");
        }
    }

    // feature files: classical is the SEL matrix minus the strength block
    {
        const Dataset sel = read_dataset(dataset_file(config, "train", "sel"));
        const Dataset classical = read_dataset(dataset_file(config, "train", "classical"));
        CHECK(sel.feature_names.size() == size_t(kNumFeatures));
        CHECK(classical.feature_names.size() == size_t(kNumClassical));
        CHECK(sel.match_ids == classical.match_ids);
        for (std::size_t r = 0; r < classical.features.rows(); ++r) {
            for (std::size_t c = 0; c < classical.features.cols(); ++c) {
                CHECK(classical.features.at(r, c) == sel.features.at(r, c));
            }
        }
    }

    // ablation reports: 2 families x 2 feature sets for both tasks
    {
        const CsvTable classify = read_csv((root / "report_classify.csv").string());
        const CsvTable regress = read_csv((root / "report_regress.csv").string());
        CHECK(classify.rows.size() == 4);
        CHECK(regress.rows.size() == 4);
        CHECK(classify.rows[0][0] == "forest");
        CHECK(classify.rows[0][1] == "classical");
        CHECK(classify.rows[1][1] == "classical+SEL");
        CHECK(classify.rows[2][0] == "gbt");
    }

    // the saved model reproduces the predictions file
    {
        const PipelineModel pm =
            load_pipeline_model(model_file(config, "forest", "classify", "sel"));
        CHECK(pm.feature_set == "sel");
        CHECK(pm.classifier.n_features == kNumFeatures);
        CHECK(pm.classifier.feature_names == feature_names(true));

        const CsvTable predictions = read_csv((root / "predictions.csv").string());
        CHECK(predictions.header ==
              std::vector<std::string>{"match_id", "p_home_win", "p_draw", "p_away_win",
                                       "outcome"});
        CHECK(predictions.rows.size() == 3);
        for (const auto& row : predictions.rows) {
            const double ph = parse_double(row[1], 0, "p_home_win");
            const double pd = parse_double(row[2], 0, "p_draw");
            const double pa = parse_double(row[3], 0, "p_away_win");
            CHECK(ph + pd + pa == doctest::Approx(1.0).epsilon(1e-9));
            const double top = std::max({ph, pd, pa});
            if (row[4] == "HomeWin") CHECK(ph == top);
            if (row[4] == "Draw") CHECK(pd == top);
            if (row[4] == "AwayWin") CHECK(pa == top);
        }
    }

    // force-plot files (classify task: one per outcome class): additivity
    {
        const ForceData force =
            read_force_data((root / ("force_" + match_id + "_home_win.csv")).string());
        double total = force.base_value;
        for (double c : force.contributions) total += c;
        CHECK(std::abs(total - force.prediction) < 1e-8);
        CHECK(fs::exists(root / ("force_" + match_id + "_draw.csv")));
        CHECK(fs::exists(root / ("force_" + match_id + "_away_win.csv")));
    }

    // global importance over the test split, one ranking per class task
    {
        const CsvTable importance = read_csv((root / "importance.csv").string());
        CHECK(importance.header == std::vector<std::string>{"rank", "feature", "importance"});
        CHECK(importance.rows.size() == size_t(kNumFeatures));
        CHECK(importance.rows[0][0] == "1");
    }
}

TEST_CASE("pipeline reruns are byte-identical across output directories") {
    const auto root_a = tmp_dir() / "det_a";
    const auto root_b = tmp_dir() / "det_b";
    fs::remove_all(root_a);
    fs::remove_all(root_b);
    run_all(small_config(root_a.string()), "s2022r10g1");
    run_all(small_config(root_b.string()), "s2022r10g1");

    std::map<std::string, fs::path> files_a;
    for (const auto& entry : fs::recursive_directory_iterator(root_a)) {
        if (entry.is_regular_file()) {
            files_a[fs::relative(entry.path(), root_a).string()] = entry.path();
        }
    }
    CHECK(files_a.size() > 20);
    for (const auto& [rel, path_a] : files_a) {
        const fs::path path_b = root_b / rel;
        REQUIRE(fs::exists(path_b));
        CAPTURE(rel);
        CHECK(slurp(path_a) == slurp(path_b));
    }
}

TEST_CASE("stage isolation: later outputs never feed earlier stages") {
    const auto root = tmp_dir() / "isolation";
    fs::remove_all(root);
    const RunConfig config = small_config(root.string());
    run_synth(config);
    run_strengths(config);
    run_featurize(config);
    run_evaluate(config);

    const std::string before = slurp(dataset_file(config, "train", "sel"));
    fs::remove(root / "report_classify.csv");
    fs::remove(root / "report_regress.csv");
    run_featurize(config); // must not notice the missing reports
    CHECK(slurp(dataset_file(config, "train", "sel")) == before);
}

TEST_CASE("pipeline error paths carry stable codes") {
    const auto root = tmp_dir() / "errors";
    fs::remove_all(root);
    RunConfig config = small_config(root.string());

    // inputs missing entirely
    CHECK(code_of([&] { run_strengths(config); }) == ErrorCode::io);

    run_synth(config);
    run_featurize(config);
    run_train(config);

    // serving stages need one concrete feature set
    CHECK(config.features == "both");
    CHECK(code_of([&] { run_predict(config, "unused.csv"); }) == ErrorCode::config);
    CHECK(code_of([&] { run_explain(config, "s2022r10g1", false); }) == ErrorCode::config);

    RunConfig serve = config;
    serve.features = "sel";
    CHECK(code_of([&] { run_explain(serve, "no-such-match", false); }) == ErrorCode::config);

    // a cutoff beyond all matches leaves nothing to test on
    RunConfig late = config;
    late.cutoff = "2050-01-01";
    CHECK(code_of([&] { run_featurize(late); }) == ErrorCode::empty_split);

    // error reports are single-line JSON with the stable code name
    const std::string report = error_report(Error(ErrorCode::empty_split, "nothing left"));
    CHECK(report == R"({"error":{"code":"empty_split","message":"nothing left"}})");
}
