#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "handsel/error.hpp"
#include "handsel/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"handsel — handball match prediction with CMP strength features"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    std::string config_path;
    handsel::ConfigOverrides overrides;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", overrides.seed, "master seed for generator and learners");
    app.add_option("--cutoff", overrides.cutoff, "train/test cutoff date (YYYY-MM-DD)");
    app.add_option("--features", overrides.features, "feature set: classical, sel or both");
    app.add_option("--model", overrides.model, "model family: forest or gbt");
    app.add_option("--task", overrides.task, "prediction task: classify or regress");
    app.add_option("--out", overrides.out, "output directory");

    auto* synth = app.add_subcommand("synth", "generate a synthetic league dataset");
    auto* strengths = app.add_subcommand("strengths", "fit per-team strengths as of the cutoff");
    auto* featurize =
        app.add_subcommand("featurize", "build train/test feature matrices with targets");
    auto* train = app.add_subcommand("train", "fit the selected model and write it as JSON");
    auto* evaluate =
        app.add_subcommand("evaluate", "ablation report: both model families, classify and regress");
    auto* predict = app.add_subcommand("predict", "score unplayed fixtures with a trained model");
    auto* explain =
        app.add_subcommand("explain", "per-feature contributions for one match (force-plot data)");

    std::string fixtures_path;
    predict->add_option("--fixtures", fixtures_path, "CSV of fixtures to score")->required();

    std::string match_id;
    bool with_global = false;
    explain->add_option("--match", match_id, "match id to explain")->required();
    explain->add_flag("--global", with_global, "also write mean-|contribution| rankings");

    CLI11_PARSE(app, argc, argv);

    try {
        const handsel::RunConfig config = handsel::load_run_config(config_path, overrides);
        if (synth->parsed()) {
            handsel::run_synth(config);
        } else if (strengths->parsed()) {
            handsel::run_strengths(config);
        } else if (featurize->parsed()) {
            handsel::run_featurize(config);
        } else if (train->parsed()) {
            handsel::run_train(config);
        } else if (evaluate->parsed()) {
            handsel::run_evaluate(config);
        } else if (predict->parsed()) {
            handsel::run_predict(config, fixtures_path);
        } else if (explain->parsed()) {
            handsel::run_explain(config, match_id, with_global);
        }
        return 0;
    } catch (const handsel::Error& e) {
        std::cerr << handsel::error_report(e) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << R"({"error":{"code":"internal","message":")" << e.what() << R"("}})" << "\n";
        return 1;
    }
}
