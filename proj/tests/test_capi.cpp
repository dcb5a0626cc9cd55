#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sst.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sst_capi_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_trace_csv(const std::string& path, int bursts) {
    std::ofstream out(path);
    out << "timestamp_s,direction,size_bytes\n";
    double t = 0.0;
    for (int b = 0; b < bursts; ++b) {
        for (int p = 0; p < 4; ++p) {
            out << t << ",1,1000\n";
            t += 0.001;
        }
        out << t << ",-1,200\n";
        t += 0.8;
    }
}

void write_config(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2);
}

}  // namespace

TEST_CASE("trace handles load, expose and save packets") {
    TempDir tmp;
    write_trace_csv(tmp.file("t.csv"), 2);

    sst_trace* trace = nullptr;
    REQUIRE(sst_trace_load(tmp.file("t.csv").c_str(), "csv", &trace) == SST_OK);
    REQUIRE(trace != nullptr);
    CHECK(sst_trace_packet_count(trace) == 10);

    double ts[4];
    int dirs[4];
    int64_t sizes[4];
    CHECK(sst_trace_packets(trace, ts, dirs, sizes, 4) == 4);
    CHECK(ts[0] == 0.0);
    CHECK(dirs[0] == 1);
    CHECK(sizes[0] == 1000);

    CHECK(sst_trace_save(trace, tmp.file("copy.jsonl").c_str(), "jsonl") == SST_OK);
    sst_trace* back = nullptr;
    REQUIRE(sst_trace_load(tmp.file("copy.jsonl").c_str(), "jsonl", &back) == SST_OK);
    CHECK(sst_trace_packet_count(back) == 10);
    sst_trace_free(back);
    sst_trace_free(trace);
}

TEST_CASE("errors set a status and message") {
    sst_trace* trace = nullptr;
    CHECK(sst_trace_load("/nonexistent/file.csv", "csv", &trace) == SST_ERR_PARSE);
    CHECK(std::string(sst_last_error()).find("nonexistent") != std::string::npos);
    CHECK(sst_trace_load(nullptr, "csv", &trace) == SST_ERR_INVALID);
}

TEST_CASE("full pipeline through the shared library surface") {
    TempDir tmp;

    // Burst model from a small trace corpus.
    fs::create_directories(tmp.file("corpus"));
    for (int i = 0; i < 3; ++i)
        write_trace_csv(tmp.file("corpus/flow" + std::to_string(i) + ".csv"), 12 + i);
    sst_burst_model* model = nullptr;
    REQUIRE(sst_burst_model_fit(tmp.file("corpus").c_str(), 0.0065, 0.97, 0, &model) == SST_OK);
    REQUIRE(sst_burst_model_save(model, tmp.file("model.json").c_str()) == SST_OK);
    sst_burst_model_free(model);

    json cfg = {
        {"dataset",
         {{"name", "capi"},
          {"protocol_mode", "socat"},
          {"n_chains", 12},
          {"base_seed", 5},
          {"burst_model", tmp.file("model.json")},
          {"stones_min", 1},
          {"stones_max", 2}}},
        {"features", {{"dt_s", 0.03}, {"bins", 300}, {"packet_max_len", 128}}},
        {"train",
         {{"epochs", 2},
          {"batch_size", 6},
          {"workers", 1},
          {"val_fraction", 0.2},
          {"fen",
           {{"depth", 1},
            {"hidden_dim", 8},
            {"feature_dim", 8},
            {"head_dim", 4},
            {"window_kernel", 10},
            {"window_stride", 5}}},
          {"head", {{"epochs", 5}, {"hidden", 16}}}}},
        {"eval", {{"mode", "network"}, {"taus", {1e-2}}}},
        {"obfuscation", {{"pad_overhead_pct", 50.0}, {"delay_profile", "light_v1"}}}};
    write_config(tmp.file("config.json"), cfg);

    char result[4096];

    REQUIRE(sst_simulate(tmp.file("config.json").c_str(), tmp.file("data").c_str(), result,
                         sizeof result) == SST_OK);
    json sim = json::parse(result);
    CHECK(sim["chains_ok"] == 12);
    std::string manifest = sim["manifest"];

    REQUIRE(sst_featurize(tmp.file("config.json").c_str(), manifest.c_str(),
                          tmp.file("features").c_str(), result, sizeof result) == SST_OK);

    REQUIRE(sst_train(tmp.file("config.json").c_str(), manifest.c_str(),
                      tmp.file("model.sstc").c_str(), result, sizeof result) == SST_OK);
    json train = json::parse(result);
    CHECK(train["task"] == "correlator");

    REQUIRE(sst_score(tmp.file("config.json").c_str(), tmp.file("model.sstc").c_str(),
                      manifest.c_str(), tmp.file("scores.csv").c_str(), result,
                      sizeof result) == SST_OK);

    REQUIRE(sst_evaluate("1e-2,1e-3", tmp.file("scores.csv").c_str(), "",
                         tmp.file("report.json").c_str(), tmp.file("roc.csv").c_str(), result,
                         sizeof result) == SST_OK);
    std::ifstream rin(tmp.file("report.json"));
    json report;
    rin >> report;
    CHECK(report["thresholds"].size() == 2);
    CHECK(report.contains("auc"));

    REQUIRE(sst_obfuscate(tmp.file("config.json").c_str(), manifest.c_str(),
                          tmp.file("obf").c_str(), result, sizeof result) == SST_OK);
    json obf = json::parse(result);
    CHECK(obf["pad_overhead_pct"] == 50.0);

    // Pair scoring through the model handle.
    sst_model* bundle = nullptr;
    REQUIRE(sst_model_load(tmp.file("model.sstc").c_str(), &bundle) == SST_OK);
    sst_trace* a = nullptr;
    REQUIRE(sst_trace_load(tmp.file("data/chain_000000/attacker_egress.csv").c_str(), "csv",
                           &a) == SST_OK);
    sst_trace* b = nullptr;
    REQUIRE(sst_trace_load(tmp.file("data/chain_000000/target_ingress.csv").c_str(), "csv",
                           &b) == SST_OK);
    double score = -1.0;
    REQUIRE(sst_correlation_score(bundle, a, b, &score) == SST_OK);
    CHECK(score > 0.0);
    CHECK(score < 1.0);
    sst_trace_free(a);
    sst_trace_free(b);
    sst_model_free(bundle);
}

TEST_CASE("chainlen task trains and predicts through the C surface") {
    TempDir tmp;
    fs::create_directories(tmp.file("corpus"));
    write_trace_csv(tmp.file("corpus/flow.csv"), 10);
    sst_burst_model* model = nullptr;
    REQUIRE(sst_burst_model_fit(tmp.file("corpus").c_str(), 0.0065, 0.97, 0, &model) == SST_OK);
    REQUIRE(sst_burst_model_save(model, tmp.file("model.json").c_str()) == SST_OK);
    sst_burst_model_free(model);

    json cfg = {{"dataset",
                 {{"name", "capilen"},
                  {"protocol_mode", "ssh"},
                  {"n_chains", 10},
                  {"base_seed", 11},
                  {"burst_model", tmp.file("model.json")}}},
                {"features", {{"packet_max_len", 128}}},
                {"train",
                 {{"task", "chainlen"},
                  {"chainlen",
                   {{"epochs", 2}, {"batch_size", 5}, {"channels", {4, 8}}, {"mlp_hidden", 8}}}}}};
    write_config(tmp.file("config.json"), cfg);

    char result[4096];
    REQUIRE(sst_simulate(tmp.file("config.json").c_str(), tmp.file("data").c_str(), result,
                         sizeof result) == SST_OK);
    std::string manifest = json::parse(result)["manifest"];

    REQUIRE(sst_train(tmp.file("config.json").c_str(), manifest.c_str(),
                      tmp.file("len.sstc").c_str(), result, sizeof result) == SST_OK);
    CHECK(json::parse(result)["task"] == "chainlen");

    REQUIRE(sst_predict_length(tmp.file("config.json").c_str(), tmp.file("len.sstc").c_str(),
                               manifest.c_str(), tmp.file("preds.csv").c_str(), result,
                               sizeof result) == SST_OK);
    json rec = json::parse(result);
    CHECK(rec.contains("avg_accuracy"));
}

TEST_CASE("config errors surface as SST_ERR_CONFIG") {
    TempDir tmp;
    write_config(tmp.file("bad.json"), {{"train", {{"bogus_key", 1}}}});
    char result[256];
    CHECK(sst_simulate(tmp.file("bad.json").c_str(), tmp.file("out").c_str(), result,
                       sizeof result) == SST_ERR_CONFIG);
    CHECK(std::string(sst_last_error()).find("bogus_key") != std::string::npos);
}
