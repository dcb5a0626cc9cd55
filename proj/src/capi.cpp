#include "sst.h"

#include <cstring>
#include <string>

#include "sst/config.hpp"
#include "sst/features.hpp"
#include "sst/pipeline.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

void write_result(const json& record, char* out, size_t cap) {
    if (!out || cap == 0) return;
    std::string s = record.dump();
    size_t n = std::min(cap - 1, s.size());
    std::memcpy(out, s.data(), n);
    out[n] = '\0';
}

sst::ExperimentConfig config_from_path(const char* path) {
    if (!path || !*path) return sst::ExperimentConfig{};
    return sst::load_experiment_config(path);
}

template <typename Fn>
sst_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SST_OK;
    } catch (const sst::ConfigError& e) {
        set_error(e.what());
        return SST_ERR_CONFIG;
    } catch (const sst::TraceError& e) {
        set_error(e.what());
        return SST_ERR_PARSE;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return SST_ERR_INVALID;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SST_ERR_INTERNAL;
    }
}

std::vector<double> parse_taus(const char* taus) {
    std::vector<double> out;
    std::string s = taus ? taus : "";
    size_t at = 0;
    while (at < s.size()) {
        size_t comma = s.find(',', at);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(std::stod(s.substr(at, comma - at)));
        at = comma + 1;
    }
    if (out.empty()) out = {1e-3, 1e-4, 1e-5};
    return out;
}

}  // namespace

struct sst_trace {
    sst::Trace trace;
};

struct sst_burst_model {
    sst::BurstModel model;
};

struct sst_model {
    sst::LoadedCorrelator correlator;
    sst::FeatureConfig features;
};

extern "C" {

const char* sst_version(void) { return "1.0.0"; }

const char* sst_last_error(void) { return g_last_error.c_str(); }

sst_status sst_trace_load(const char* path, const char* format, sst_trace** out) {
    return guarded([&] {
        if (!path || !format || !out) throw std::invalid_argument("sst_trace_load: null argument");
        auto* handle = new sst_trace{sst::load_trace(path, sst::trace_format_from_string(format))};
        *out = handle;
    });
}

sst_status sst_trace_save(const sst_trace* trace, const char* path, const char* format) {
    return guarded([&] {
        if (!trace || !path || !format)
            throw std::invalid_argument("sst_trace_save: null argument");
        sst::save_trace(trace->trace, path, sst::trace_format_from_string(format));
    });
}

size_t sst_trace_packet_count(const sst_trace* trace) {
    return trace ? trace->trace.packets.size() : 0;
}

size_t sst_trace_packets(const sst_trace* trace, double* timestamps, int* directions,
                         int64_t* sizes, size_t cap) {
    if (!trace) return 0;
    size_t n = std::min(cap, trace->trace.packets.size());
    for (size_t i = 0; i < n; ++i) {
        const auto& p = trace->trace.packets[i];
        if (timestamps) timestamps[i] = p.t;
        if (directions) directions[i] = p.dir;
        if (sizes) sizes[i] = p.size;
    }
    return n;
}

void sst_trace_free(sst_trace* trace) { delete trace; }

sst_status sst_burst_model_fit(const char* trace_dir, double gap_threshold, double percentile,
                               int per_flow, sst_burst_model** out) {
    return guarded([&] {
        if (!trace_dir || !out) throw std::invalid_argument("sst_burst_model_fit: null argument");
        *out = new sst_burst_model{
            sst::fit_burst_model_from_dir(trace_dir, gap_threshold, percentile, per_flow != 0)};
    });
}

sst_status sst_burst_model_load(const char* path, sst_burst_model** out) {
    return guarded([&] {
        if (!path || !out) throw std::invalid_argument("sst_burst_model_load: null argument");
        *out = new sst_burst_model{sst::load_burst_model(path)};
    });
}

sst_status sst_burst_model_save(const sst_burst_model* model, const char* path) {
    return guarded([&] {
        if (!model || !path) throw std::invalid_argument("sst_burst_model_save: null argument");
        sst::save_burst_model(model->model, path);
    });
}

void sst_burst_model_free(sst_burst_model* model) { delete model; }

sst_status sst_simulate(const char* config_json, const char* out_dir, char* result_out,
                        size_t result_cap) {
    return guarded([&] {
        if (!config_json || !out_dir) throw std::invalid_argument("sst_simulate: null argument");
        json rec = sst::run_simulate(config_from_path(config_json), out_dir);
        write_result(rec, result_out, result_cap);
        if (rec.at("success_fraction").get<double>() < 0.99)
            throw std::runtime_error("simulate: more than 1% of chains failed");
    });
}

sst_status sst_featurize(const char* config_json, const char* manifest, const char* out_dir,
                         char* result_out, size_t result_cap) {
    return guarded([&] {
        if (!manifest || !out_dir) throw std::invalid_argument("sst_featurize: null argument");
        write_result(sst::run_featurize(config_from_path(config_json), manifest, out_dir),
                     result_out, result_cap);
    });
}

sst_status sst_train(const char* config_json, const char* manifest, const char* out_checkpoint,
                     char* result_out, size_t result_cap) {
    return guarded([&] {
        if (!config_json || !manifest || !out_checkpoint)
            throw std::invalid_argument("sst_train: null argument");
        write_result(sst::run_train(config_from_path(config_json), manifest, out_checkpoint),
                     result_out, result_cap);
    });
}

sst_status sst_score(const char* config_json, const char* checkpoint, const char* manifest,
                     const char* out_csv, char* result_out, size_t result_cap) {
    return guarded([&] {
        if (!checkpoint || !manifest || !out_csv)
            throw std::invalid_argument("sst_score: null argument");
        write_result(
            sst::run_score(config_from_path(config_json), checkpoint, manifest, out_csv),
            result_out, result_cap);
    });
}

sst_status sst_evaluate(const char* taus, const char* scores_csv, const char* links_csv,
                        const char* out_report, const char* out_roc_csv, char* result_out,
                        size_t result_cap) {
    return guarded([&] {
        if (!scores_csv || !out_report)
            throw std::invalid_argument("sst_evaluate: null argument");
        write_result(sst::run_evaluate(parse_taus(taus), scores_csv,
                                       links_csv ? links_csv : "", out_report,
                                       out_roc_csv ? out_roc_csv : ""),
                     result_out, result_cap);
    });
}

sst_status sst_obfuscate(const char* config_json, const char* manifest, const char* out_dir,
                         char* result_out, size_t result_cap) {
    return guarded([&] {
        if (!manifest || !out_dir) throw std::invalid_argument("sst_obfuscate: null argument");
        write_result(sst::run_obfuscate(config_from_path(config_json), manifest, out_dir),
                     result_out, result_cap);
    });
}

sst_status sst_predict_length(const char* config_json, const char* checkpoint,
                              const char* manifest, const char* out_csv, char* result_out,
                              size_t result_cap) {
    return guarded([&] {
        if (!checkpoint || !manifest || !out_csv)
            throw std::invalid_argument("sst_predict_length: null argument");
        write_result(sst::run_predict_length(config_from_path(config_json), checkpoint, manifest,
                                             out_csv),
                     result_out, result_cap);
    });
}

sst_status sst_model_load(const char* checkpoint, sst_model** out) {
    return guarded([&] {
        if (!checkpoint || !out) throw std::invalid_argument("sst_model_load: null argument");
        auto* handle = new sst_model{sst::load_correlator(checkpoint), sst::FeatureConfig{}};
        handle->features.bins = handle->correlator.bundle.fen.config().input_len;
        *out = handle;
    });
}

void sst_model_free(sst_model* model) { delete model; }

sst_status sst_correlation_score(const sst_model* model, const sst_trace* a, const sst_trace* b,
                                 double* score_out) {
    return guarded([&] {
        if (!model || !a || !b || !score_out)
            throw std::invalid_argument("sst_correlation_score: null argument");
        const auto& fc = model->correlator.bundle.fen.config();
        sst::IntervalTensor ta =
            sst::interval_features(a->trace, model->features.dt, fc.input_len, 0.0);
        sst::IntervalTensor tb =
            sst::interval_features(b->trace, model->features.dt, fc.input_len, 0.0);
        sst::nn::Mat ea = sst::nn::fen_embed(model->correlator.bundle.fen_params,
                                             model->correlator.bundle.fen, ta.data);
        sst::nn::Mat eb = sst::nn::fen_embed(model->correlator.bundle.fen_params,
                                             model->correlator.bundle.fen, tb.data);
        *score_out = sst::nn::correlation_score(model->correlator.bundle, ea, eb);
    });
}

}  // extern "C"
