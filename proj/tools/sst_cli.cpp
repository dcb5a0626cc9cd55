// Command-line harness for the stepping-stone toolkit. All real work
// happens behind the C API in libsst; this binary only parses
// arguments, applies config overrides, and prints result records.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sst.h"

namespace {

using nlohmann::json;

constexpr size_t kResultCap = 1 << 16;

// Exit contract: 0 success, 1 partial/experimental failure, 2 usage or
// config error.
int status_to_exit(sst_status status) {
    switch (status) {
        case SST_OK: return 0;
        case SST_ERR_CONFIG: return 2;
        case SST_ERR_INVALID: return 2;
        default: return 1;
    }
}

int fail(sst_status status) {
    std::cerr << "error: " << sst_last_error() << "\n";
    return status_to_exit(status);
}

struct GlobalOpts {
    std::string config_path;
    long long seed = -1;  // <0: keep config seeds
    int workers = 0;      // 0: keep config value
    std::string out;
    std::string materialized;  // temp config honoring overrides
};

// Seed/worker overrides are applied by materializing an adjusted copy
// of the config document; the shared library only ever sees a path.
bool materialize_config(GlobalOpts& g, std::string& error) {
    json j = json::object();
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) {
            error = "cannot open config: " + g.config_path;
            return false;
        }
        try {
            in >> j;
        } catch (const json::exception& e) {
            error = std::string("config parse error: ") + e.what();
            return false;
        }
    }
    if (g.seed >= 0) {
        j["dataset"]["base_seed"] = g.seed;
        j["train"]["seed"] = g.seed;
        j["eval"]["seed"] = g.seed;
        j["obfuscation"]["seed"] = g.seed;
    }
    if (g.workers > 0) j["dataset"]["workers"] = g.workers;
    if (g.seed < 0 && g.workers == 0 && !g.config_path.empty()) {
        g.materialized = g.config_path;
        return true;
    }
    g.materialized = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                     "/sst_config_" + std::to_string(::getpid()) + ".json";
    std::ofstream out(g.materialized, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) {
        error = "cannot write temp config";
        return false;
    }
    return true;
}

int print_result(const char* buf) {
    std::cout << buf << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stepping-stone chain simulation, correlation and evaluation toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "Experiment config (JSON)");
    app.add_option("--seed", g.seed, "Override every seed in the config");
    app.add_option("--workers", g.workers,
                   "Worker threads for simulation (wall-clock only, never results)");
    app.add_option("--out", g.out, "Default output path/directory");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a burst model from a directory of traces");
    std::string fit_dir, fit_out = "burst_model.json";
    double fit_threshold = 0.0065, fit_percentile = 0.97;
    bool fit_per_flow = false, fit_auto = false;
    fit->add_option("trace_dir", fit_dir, "Directory of .csv/.jsonl traces")->required();
    fit->add_option("--threshold", fit_threshold, "Burst gap threshold in seconds");
    fit->add_flag("--auto-threshold", fit_auto,
                  "Derive the threshold from the inter-packet delay percentile");
    fit->add_option("--percentile", fit_percentile, "Percentile for --auto-threshold");
    fit->add_flag("--per-flow", fit_per_flow, "Percentile per flow instead of pooled");
    fit->add_option("--model-out", fit_out, "Output model path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic chain dataset");
    std::string sim_out = "dataset";
    simulate->add_option("--out-dir", sim_out, "Dataset output directory");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "Write feature tensors for a dataset");
    std::string feat_manifest, feat_out = "features";
    featurize->add_option("manifest", feat_manifest, "Dataset manifest")->required();
    featurize->add_option("--out-dir", feat_out, "Feature output directory");

    // train
    auto* train = app.add_subcommand("train", "Train the correlator or chain-length model");
    std::string train_manifest, train_out = "model.sstc";
    train->add_option("manifest", train_manifest, "Dataset manifest")->required();
    train->add_option("--checkpoint-out", train_out, "Checkpoint path");

    // score
    auto* score = app.add_subcommand("score", "Score candidate pairs with a trained model");
    std::string score_ckpt, score_manifest, score_out = "scores.csv", score_mode;
    score->add_option("checkpoint", score_ckpt, "Correlator checkpoint")->required();
    score->add_option("manifest", score_manifest, "Dataset manifest")->required();
    score->add_option("--mode", score_mode, "network | host (overrides eval.mode)");
    score->add_option("--scores-out", score_out, "Score table path (CSV)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Compute low-FPR metrics from a score table");
    std::string eval_scores, eval_links, eval_report = "report.json", eval_roc = "roc.csv";
    std::string eval_taus = "1e-3,1e-4,1e-5";
    evaluate->add_option("scores", eval_scores, "Score table (CSV)")->required();
    evaluate->add_option("--links", eval_links, "Per-chain link scores for reconstruction");
    evaluate->add_option("--taus", eval_taus, "Comma-separated FPR budgets");
    evaluate->add_option("--report-out", eval_report, "Metrics report path (JSON)");
    evaluate->add_option("--roc-out", eval_roc, "ROC export path (CSV)");

    // obfuscate
    auto* obfuscate = app.add_subcommand("obfuscate", "Apply padding/delay countermeasures");
    std::string obf_manifest, obf_out = "obfuscated";
    double obf_overhead = -1.0;
    std::string obf_profile;
    obfuscate->add_option("manifest", obf_manifest, "Dataset manifest")->required();
    obfuscate->add_option("--out-dir", obf_out, "Obfuscated dataset directory");
    obfuscate->add_option("--pad-overhead", obf_overhead, "Chaff overhead percentage");
    obfuscate->add_option("--delay-profile", obf_profile,
                          "none | light_v1 | light_v2 | heavy");

    // predict-length
    auto* predict = app.add_subcommand("predict-length", "Predict chain lengths for a dataset");
    std::string pred_ckpt, pred_manifest, pred_out = "chainlen.csv";
    predict->add_option("checkpoint", pred_ckpt, "Chain-length checkpoint")->required();
    predict->add_option("manifest", pred_manifest, "Dataset manifest")->required();
    predict->add_option("--predictions-out", pred_out, "Predictions path (CSV)");

    CLI11_PARSE(app, argc, argv);

    std::string error;
    if (!materialize_config(g, error)) {
        std::cerr << "error: " << error << "\n";
        return 2;
    }
    const char* cfg = g.materialized.c_str();
    char result[kResultCap];
    result[0] = '\0';

    if (fit->parsed()) {
        if (!g.out.empty()) fit_out = g.out;
        // The fit path goes through the model handle so the CLI stays on
        // the public surface.
        sst_burst_model* model = nullptr;
        double threshold = fit_auto ? 0.0 : fit_threshold;
        sst_status st =
            sst_burst_model_fit(fit_dir.c_str(), threshold, fit_percentile, fit_per_flow, &model);
        if (st != SST_OK) return fail(st);
        st = sst_burst_model_save(model, fit_out.c_str());
        sst_burst_model_free(model);
        if (st != SST_OK) return fail(st);
        json rec = {{"cmd", "fit"}, {"model", fit_out}};
        return print_result(rec.dump().c_str());
    }
    if (simulate->parsed()) {
        if (!g.out.empty()) sim_out = g.out;
        sst_status st = sst_simulate(cfg, sim_out.c_str(), result, kResultCap);
        if (st == SST_OK) return print_result(result);
        // Partial failure still printed the record location if any.
        std::cerr << "error: " << sst_last_error() << "\n";
        if (result[0]) std::cout << result << "\n";
        return status_to_exit(st);
    }
    if (featurize->parsed()) {
        if (!g.out.empty()) feat_out = g.out;
        sst_status st =
            sst_featurize(cfg, feat_manifest.c_str(), feat_out.c_str(), result, kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    if (train->parsed()) {
        if (!g.out.empty()) train_out = g.out;
        sst_status st =
            sst_train(cfg, train_manifest.c_str(), train_out.c_str(), result, kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    if (score->parsed()) {
        if (!g.out.empty()) score_out = g.out;
        if (!score_mode.empty()) {
            std::ifstream in(g.materialized);
            json j;
            in >> j;
            j["eval"]["mode"] = score_mode;
            std::string tmp = g.materialized + ".score.json";
            std::ofstream out(tmp, std::ios::trunc);
            out << j.dump(2) << '\n';
            g.materialized = tmp;
            cfg = g.materialized.c_str();
        }
        sst_status st = sst_score(cfg, score_ckpt.c_str(), score_manifest.c_str(),
                                  score_out.c_str(), result, kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    if (evaluate->parsed()) {
        if (!g.out.empty()) eval_report = g.out;
        sst_status st = sst_evaluate(eval_taus.c_str(), eval_scores.c_str(), eval_links.c_str(),
                                     eval_report.c_str(), eval_roc.c_str(), result, kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    if (obfuscate->parsed()) {
        if (!g.out.empty()) obf_out = g.out;
        // Flag overrides ride on the materialized config.
        if (obf_overhead >= 0.0 || !obf_profile.empty()) {
            std::ifstream in(g.materialized);
            json j;
            in >> j;
            if (obf_overhead >= 0.0) j["obfuscation"]["pad_overhead_pct"] = obf_overhead;
            if (!obf_profile.empty()) j["obfuscation"]["delay_profile"] = obf_profile;
            std::string tmp = g.materialized + ".obf.json";
            std::ofstream out(tmp, std::ios::trunc);
            out << j.dump(2) << '\n';
            g.materialized = tmp;
            cfg = g.materialized.c_str();
        }
        sst_status st = sst_obfuscate(cfg, obf_manifest.c_str(), obf_out.c_str(), result,
                                      kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    if (predict->parsed()) {
        if (!g.out.empty()) pred_out = g.out;
        sst_status st = sst_predict_length(cfg, pred_ckpt.c_str(), pred_manifest.c_str(),
                                           pred_out.c_str(), result, kResultCap);
        return st == SST_OK ? print_result(result) : fail(st);
    }
    return 2;
}
