#include "sst/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sst/features.hpp"
#include "sst/nn/checkpoint.hpp"
#include "sst/nn/losses.hpp"
#include "sst/obfuscate.hpp"

namespace sst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double delay_percentile(std::vector<double>& delays, double percentile) {
    if (delays.empty()) return 0.0065;
    std::sort(delays.begin(), delays.end());
    size_t idx = static_cast<size_t>(percentile * (delays.size() - 1));
    return delays[idx];
}

}  // namespace

BurstModel fit_burst_model_from_dir(const std::string& trace_dir, double gap_threshold,
                                    double percentile, bool per_flow, int* n_traces,
                                    double* used_threshold) {
    if (!fs::is_directory(trace_dir))
        throw std::invalid_argument("fit: not a directory: " + trace_dir);

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".csv" || ext == ".jsonl") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());

    std::vector<Trace> traces;
    for (const auto& file : files) {
        TraceFormat fmt =
            fs::path(file).extension() == ".csv" ? TraceFormat::Csv : TraceFormat::Jsonl;
        Trace trace = load_trace(file, fmt);
        trace.capture_point = fs::path(file).filename().string();
        traces.push_back(std::move(trace));
    }
    if (traces.empty()) throw std::runtime_error("fit: no parsable traces in " + trace_dir);

    // Threshold <= 0 derives it from the inter-packet delay percentile,
    // pooled across flows by default.
    double pooled_threshold = gap_threshold;
    if (gap_threshold <= 0.0 && !per_flow) {
        std::vector<double> delays;
        for (const auto& t : traces)
            for (size_t i = 1; i < t.packets.size(); ++i)
                delays.push_back(t.packets[i].t - t.packets[i - 1].t);
        pooled_threshold = delay_percentile(delays, percentile);
    }

    std::vector<BurstSequence> sequences;
    for (const auto& t : traces) {
        double threshold = pooled_threshold;
        if (gap_threshold <= 0.0 && per_flow) {
            std::vector<double> delays;
            for (size_t i = 1; i < t.packets.size(); ++i)
                delays.push_back(t.packets[i].t - t.packets[i - 1].t);
            threshold = delay_percentile(delays, percentile);
        }
        if (threshold <= 0.0) threshold = 0.0065;
        sequences.push_back(parse_bursts(t, threshold));
    }

    if (n_traces) *n_traces = static_cast<int>(traces.size());
    if (used_threshold) *used_threshold = pooled_threshold;
    return fit_burst_model(sequences);
}

nlohmann::json run_fit(const std::string& trace_dir, double gap_threshold,
                       const std::string& out_path, double percentile, bool per_flow) {
    int n = 0;
    double threshold = gap_threshold;
    BurstModel model =
        fit_burst_model_from_dir(trace_dir, gap_threshold, percentile, per_flow, &n, &threshold);
    save_burst_model(model, out_path);
    return {{"cmd", "fit"},
            {"traces", n},
            {"gap_threshold_s", threshold},
            {"per_flow", per_flow},
            {"model", out_path}};
}

nlohmann::json run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.burst_model_path.empty())
        throw ConfigError("dataset.burst_model: required for simulate");
    BurstModel model = load_burst_model(cfg.burst_model_path);
    DatasetManifest manifest = generate_dataset(cfg.dataset, model, out_dir);
    std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    save_manifest(manifest, manifest_path);

    double ok = static_cast<double>(manifest.chains.size());
    double frac = manifest.n_chains > 0 ? ok / manifest.n_chains : 0.0;
    return {{"cmd", "simulate"},
            {"manifest", manifest_path},
            {"chains_ok", manifest.chains.size()},
            {"chains_failed", manifest.failures.size()},
            {"success_fraction", frac}};
}

std::vector<nn::PairExample> build_pair_examples(const DatasetManifest& manifest, double dt,
                                                 int bins) {
    std::vector<nn::PairExample> examples;
    examples.reserve(manifest.chains.size());
    for (const auto& chain : manifest.chains) {
        nn::PairExample ex;
        Trace anchor = load_capture(manifest, chain, "attacker_egress");
        Trace positive = load_capture(manifest, chain, "target_ingress");
        ex.anchor = interval_features(anchor, dt, bins, 0.0).data;
        ex.positive = interval_features(positive, dt, bins, 0.0).data;
        ex.label = Eigen::Vector2d(chain.label_up, chain.label_down);
        examples.push_back(std::move(ex));
    }
    return examples;
}

std::vector<nn::ChainLenExample> build_chainlen_examples(const DatasetManifest& manifest,
                                                         int max_len) {
    std::vector<nn::ChainLenExample> examples;
    examples.reserve(manifest.chains.size());
    for (const auto& chain : manifest.chains) {
        nn::ChainLenExample ex;
        std::string point = "stone" + std::to_string(chain.monitored_stone) + "_ingress";
        Trace trace = load_capture(manifest, chain, point);
        ex.tensor = packet_features(trace, max_len).data;
        ex.label = Eigen::Vector2d(chain.label_up, chain.label_down);
        examples.push_back(std::move(ex));
    }
    return examples;
}

nlohmann::json run_featurize(const ExperimentConfig& cfg, const std::string& manifest_path,
                             const std::string& out_dir) {
    DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out_dir);
    json index;
    index["dt_s"] = cfg.features.dt;
    index["bins"] = cfg.features.bins;
    index["packet_max_len"] = cfg.features.packet_max_len;
    index["chains"] = json::array();
    for (const auto& chain : manifest.chains) {
        fs::create_directories(fs::path(out_dir) / chain.chain_id);
        json jc;
        jc["chain_id"] = chain.chain_id;
        for (const char* point : {"attacker_egress", "target_ingress"}) {
            Trace t = load_capture(manifest, chain, point);
            IntervalTensor tensor =
                interval_features(t, cfg.features.dt, cfg.features.bins, 0.0);
            std::string rel = chain.chain_id + "/" + point + ".sstf";
            save_interval_tensor(tensor, (fs::path(out_dir) / rel).string());
            jc[point] = rel;
        }
        std::string mon = "stone" + std::to_string(chain.monitored_stone) + "_ingress";
        Trace t = load_capture(manifest, chain, mon);
        PacketTensor pt = packet_features(t, cfg.features.packet_max_len);
        std::string rel = chain.chain_id + "/monitored_packets.sstf";
        save_feature_tensor((fs::path(out_dir) / rel).string(), pt.data, kPacketChannels,
                            pt.max_len, 0.0);
        jc["monitored_packets"] = rel;
        index["chains"].push_back(jc);
    }
    std::string index_path = (fs::path(out_dir) / "features.json").string();
    std::ofstream out(index_path, std::ios::trunc);
    out << index.dump(2) << '\n';
    return {{"cmd", "featurize"}, {"index", index_path}, {"chains", manifest.chains.size()}};
}

namespace {

json train_log_to_json(const std::vector<nn::EpochLog>& log) {
    json out = json::array();
    for (const auto& e : log)
        out.push_back({{"epoch", e.epoch},
                       {"triplet", e.triplet},
                       {"orth", e.orth},
                       {"cov", e.cov},
                       {"chain_mse", e.chain_mse},
                       {"total", e.total},
                       {"val_auc", e.val_auc}});
    return out;
}

}  // namespace

nlohmann::json run_train(const ExperimentConfig& cfg, const std::string& manifest_path,
                         const std::string& out_checkpoint, bool quiet) {
    DatasetManifest manifest = load_manifest(manifest_path);
    auto log_epoch = [&](const nn::EpochLog& e) {
        if (quiet) return;
        json j = {{"event", "epoch"}, {"epoch", e.epoch},     {"triplet", e.triplet},
                  {"orth", e.orth},   {"cov", e.cov},         {"chain_mse", e.chain_mse},
                  {"total", e.total}, {"val_auc", e.val_auc}};
        std::cout << j.dump() << "\n";
    };

    if (cfg.task == TrainTask::ChainLen) {
        auto examples = build_chainlen_examples(manifest, cfg.chainlen.net.max_len);
        auto log_mse = [&](const nn::EpochLog& e) {
            if (quiet) return;
            json j = {{"event", "epoch"}, {"epoch", e.epoch}, {"mse", e.total}};
            std::cout << j.dump() << "\n";
        };
        auto result = train_chainlen(examples, cfg.chainlen, log_mse);
        json meta;
        meta["kind"] = "chainlen";
        meta["config"] = chainlen_config_to_json(result.net.config());
        json log = json::array();
        for (size_t i = 0; i < result.epoch_mse.size(); ++i)
            log.push_back({{"epoch", i}, {"mse", result.epoch_mse[i]}});
        meta["train_log"] = log;
        nn::save_checkpoint(out_checkpoint, meta, {&result.params});
        return {{"cmd", "train"},
                {"task", "chainlen"},
                {"checkpoint", out_checkpoint},
                {"diverged", result.diverged},
                {"epochs", result.epoch_mse.size()}};
    }

    auto examples = build_pair_examples(manifest, cfg.features.dt, cfg.features.bins);
    nn::FenTrainConfig train_cfg = cfg.train;

    // Manifest split tags take precedence over the val_fraction split:
    // validation chains are moved to the tail, which is where the
    // trainer draws them from.
    bool tagged = false;
    for (const auto& c : manifest.chains)
        if (c.split) tagged = true;
    if (tagged) {
        std::vector<nn::PairExample> train_part, val_part;
        for (size_t i = 0; i < manifest.chains.size(); ++i) {
            const auto& split = manifest.chains[i].split;
            if (split && *split == "val")
                val_part.push_back(std::move(examples[i]));
            else
                train_part.push_back(std::move(examples[i]));
        }
        size_t n_val = val_part.size();
        examples = std::move(train_part);
        examples.insert(examples.end(), std::make_move_iterator(val_part.begin()),
                        std::make_move_iterator(val_part.end()));
        train_cfg.val_fraction =
            examples.empty() ? 0.0 : static_cast<double>(n_val) / examples.size();
    }
    auto result = nn::train_fen(examples, train_cfg, log_epoch);

    // Head training on frozen embeddings of the training split.
    std::vector<nn::Mat> anchors, positives;
    for (const auto& ex : examples) {
        anchors.push_back(nn::fen_embed(result.params, result.fen, ex.anchor));
        positives.push_back(nn::fen_embed(result.params, result.fen, ex.positive));
    }
    auto head_result = nn::train_head(anchors, positives, cfg.head, nullptr);

    json meta;
    meta["kind"] = "correlator";
    meta["fen_config"] = fen_config_to_json(result.fen.config());
    meta["head_config"] = {{"input_dim", head_result.head.config().input_dim},
                           {"hidden_dim", head_result.head.config().hidden_dim}};
    meta["train_log"] = train_log_to_json(result.log);
    json hlog = json::array();
    for (size_t i = 0; i < head_result.epoch_loss.size(); ++i)
        hlog.push_back({{"epoch", i}, {"bce", head_result.epoch_loss[i]}});
    meta["head_log"] = hlog;
    nn::save_checkpoint(out_checkpoint, meta, {&result.params, &head_result.params});

    double final_val = result.log.empty() ? 0.0 : result.log.back().val_auc;
    return {{"cmd", "train"},
            {"task", "correlator"},
            {"checkpoint", out_checkpoint},
            {"diverged", result.diverged},
            {"epochs", result.log.size()},
            {"final_val_auc", final_val},
            {"head_train_accuracy", head_result.train_accuracy}};
}

LoadedCorrelator load_correlator(const std::string& checkpoint_path) {
    json meta = nn::read_checkpoint_meta(checkpoint_path);
    if (meta.value("kind", "") != "correlator")
        throw std::runtime_error("not a correlator checkpoint: " + checkpoint_path);
    LoadedCorrelator lc;
    nn::FenConfig fc = fen_config_from_json(meta.at("fen_config"), "checkpoint.fen_config");
    Rng dummy(0);
    lc.bundle.fen = nn::Fen(fc, lc.bundle.fen_params, dummy);
    nn::HeadConfig hc;
    hc.input_dim = meta.at("head_config").at("input_dim").get<int>();
    hc.hidden_dim = meta.at("head_config").at("hidden_dim").get<int>();
    Rng dummy2(0);
    lc.bundle.head = nn::SimilarityHead(hc, lc.bundle.head_params, dummy2);
    nn::load_checkpoint(checkpoint_path, {&lc.bundle.fen_params, &lc.bundle.head_params});
    lc.meta = std::move(meta);
    return lc;
}

LoadedChainLen load_chainlen(const std::string& checkpoint_path) {
    json meta = nn::read_checkpoint_meta(checkpoint_path);
    if (meta.value("kind", "") != "chainlen")
        throw std::runtime_error("not a chainlen checkpoint: " + checkpoint_path);
    LoadedChainLen lc;
    nn::ChainLenConfig cc = chainlen_config_from_json(meta.at("config"), "checkpoint.config");
    Rng dummy(0);
    lc.net = nn::ChainLenNet(cc, lc.params, dummy);
    nn::load_checkpoint(checkpoint_path, {&lc.params});
    lc.meta = std::move(meta);
    return lc;
}

nlohmann::json run_score(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                         const std::string& manifest_path, const std::string& out_csv) {
    DatasetManifest manifest = load_manifest(manifest_path);
    LoadedCorrelator lc = load_correlator(checkpoint_path);
    // Exhaustive negatives up to 1000 chains, sampled (1000 per
    // positive) beyond that unless the config pins a count.
    std::optional<int> neg = cfg.eval.neg_per_pos;
    if (!neg && manifest.chains.size() > 1000) neg = 1000;
    PairPopulation pop = make_pairs(manifest, cfg.eval.mode, neg, cfg.eval.seed);

    // Embed each referenced capture once.
    std::map<std::pair<int, std::string>, nn::Mat> embeddings;
    auto embed_of = [&](const TraceRef& ref) -> const nn::Mat& {
        auto key = std::make_pair(ref.chain, ref.point);
        auto it = embeddings.find(key);
        if (it == embeddings.end()) {
            Trace t = load_capture(manifest, manifest.chains[ref.chain], ref.point);
            IntervalTensor tensor = interval_features(t, cfg.features.dt, cfg.features.bins, 0.0);
            it = embeddings
                     .emplace(key, nn::fen_embed(lc.bundle.fen_params, lc.bundle.fen, tensor.data))
                     .first;
        }
        return it->second;
    };

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write scores: " + out_csv);
    out << "a_chain,a_point,b_chain,b_point,label,score\n";
    out.precision(10);
    for (auto& pair : pop.pairs) {
        pair.score = nn::correlation_score(lc.bundle, embed_of(pair.a), embed_of(pair.b));
        out << manifest.chains[pair.a.chain].chain_id << ',' << pair.a.point << ','
            << manifest.chains[pair.b.chain].chain_id << ',' << pair.b.point << ','
            << (pair.correlated ? 1 : 0) << ',' << pair.score << '\n';
    }

    // Per-chain link scores (host-mode stone pairs) for reconstruction.
    std::string links_csv;
    if (cfg.eval.mode == PairMode::Host) {
        links_csv = out_csv + ".links.csv";
        std::ofstream lout(links_csv, std::ios::trunc);
        lout << "chain_id,link,score\n";
        lout.precision(10);
        for (size_t c = 0; c < manifest.chains.size(); ++c) {
            int stones = manifest.chains[c].links - 1;
            for (int s = 1; s <= stones; ++s) {
                TraceRef a{static_cast<int>(c), "stone" + std::to_string(s) + "_ingress"};
                TraceRef b{static_cast<int>(c), "stone" + std::to_string(s) + "_egress"};
                double score = nn::correlation_score(lc.bundle, embed_of(a), embed_of(b));
                lout << manifest.chains[c].chain_id << ',' << s << ',' << score << '\n';
            }
        }
    }

    json rec = {{"cmd", "score"},
                {"mode", pair_mode_to_string(cfg.eval.mode)},
                {"pairs", pop.pairs.size()},
                {"scores", out_csv}};
    if (!links_csv.empty()) rec["links"] = links_csv;
    return rec;
}

std::vector<ScoreRow> read_score_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scores: " + path);
    std::vector<ScoreRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        ScoreRow row;
        std::string label, score;
        std::getline(ss, row.a_chain, ',');
        std::getline(ss, row.a_point, ',');
        std::getline(ss, row.b_chain, ',');
        std::getline(ss, row.b_point, ',');
        std::getline(ss, label, ',');
        std::getline(ss, score, ',');
        row.label = std::stoi(label);
        row.score = std::stod(score);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json run_evaluate(const std::vector<double>& taus, const std::string& scores_csv,
                            const std::string& links_csv, const std::string& out_report,
                            const std::string& out_roc_csv) {
    auto rows = read_score_csv(scores_csv);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& r : rows) {
        scores.push_back(r.score);
        labels.push_back(r.label);
    }
    RocCurve roc = roc_curve(scores, labels);

    json report;
    report["scores"] = scores_csv;
    report["positives"] = roc.positives;
    report["negatives"] = roc.negatives;
    report["auc"] = pauc(roc, 1.0, false);
    report["thresholds"] = json::array();
    for (double tau : taus)
        report["thresholds"].push_back({{"tau", tau},
                                        {"max_tpr", max_tpr_at_fpr(roc, tau)},
                                        {"pauc", pauc(roc, tau, true)},
                                        {"pauc_raw", pauc(roc, tau, false)}});

    json roc_json;
    roc_json["fpr"] = json::array();
    roc_json["tpr"] = json::array();
    for (const auto& p : roc.points) {
        roc_json["fpr"].push_back(p.fpr);
        roc_json["tpr"].push_back(p.tpr);
    }
    report["roc"] = roc_json;

    if (!links_csv.empty()) {
        std::ifstream in(links_csv);
        if (!in) throw std::runtime_error("cannot open links: " + links_csv);
        std::map<std::string, std::vector<double>> per_chain;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (header) {
                header = false;
                continue;
            }
            std::stringstream ss(line);
            std::string chain, link, score;
            std::getline(ss, chain, ',');
            std::getline(ss, link, ',');
            std::getline(ss, score, ',');
            per_chain[chain].push_back(std::stod(score));
        }
        std::vector<std::vector<double>> link_scores;
        for (auto& [chain, ls] : per_chain) link_scores.push_back(ls);
        ChainReport cr = chain_trace_accuracy(scores, labels, link_scores, taus);
        json jcr = json::array();
        for (const auto& row : cr.rows)
            jcr.push_back({{"tau", row.tau},
                           {"threshold", row.threshold},
                           {"avg_tpr_mean", row.avg_tpr_mean},
                           {"avg_tpr_std", row.avg_tpr_std},
                           {"chain_accuracy", row.chain_accuracy}});
        report["chain_report"] = jcr;
    }

    if (!out_roc_csv.empty()) {
        std::ofstream out(out_roc_csv, std::ios::trunc);
        out << "fpr,tpr\n";
        out.precision(12);
        for (const auto& p : roc.points) out << p.fpr << ',' << p.tpr << '\n';
    }
    std::ofstream out(out_report, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + out_report);
    out << report.dump(2) << '\n';

    return {{"cmd", "evaluate"}, {"report", out_report}, {"auc", report["auc"]}};
}

nlohmann::json run_obfuscate(const ExperimentConfig& cfg, const std::string& manifest_path,
                             const std::string& out_dir) {
    DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out_dir);
    DelayProfile profile = delay_profile_from_string(cfg.obfuscation.delay_profile);
    TraceFormat fmt = manifest.format == "csv" ? TraceFormat::Csv : TraceFormat::Jsonl;
    const char* ext = fmt == TraceFormat::Csv ? ".csv" : ".jsonl";

    DatasetManifest out_manifest = manifest;
    out_manifest.root_dir = out_dir;
    for (size_t c = 0; c < manifest.chains.size(); ++c) {
        const auto& chain = manifest.chains[c];
        Rng rng(cfg.obfuscation.seed ^ chain.seed);
        fs::create_directories(fs::path(out_dir) / chain.chain_id);
        ManifestChain& out_chain = out_manifest.chains[c];
        out_chain.captures.clear();
        for (const auto& [point, rel] : chain.captures) {
            Trace t = load_capture(manifest, chain, point);
            bool target = cfg.obfuscation.obfuscate_all_captures || point == "attacker_egress";
            if (target) {
                if (cfg.obfuscation.pad_overhead_pct > 0.0) {
                    PaddingPlan plan = plan_padding(t, cfg.obfuscation.pad_overhead_pct, rng);
                    t = apply_padding(t, plan);
                }
                if (profile.p_delay > 0.0) t = apply_delays(t, profile, rng);
            }
            std::string out_rel = chain.chain_id + "/" + point + ext;
            save_trace(t, (fs::path(out_dir) / out_rel).string(), fmt);
            out_chain.captures.emplace_back(point, out_rel);
        }
    }
    std::string out_path = (fs::path(out_dir) / "manifest.json").string();
    save_manifest(out_manifest, out_path);
    return {{"cmd", "obfuscate"},
            {"manifest", out_path},
            {"pad_overhead_pct", cfg.obfuscation.pad_overhead_pct},
            {"delay_profile", cfg.obfuscation.delay_profile}};
}

nlohmann::json run_predict_length(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                  const std::string& manifest_path, const std::string& out_csv) {
    DatasetManifest manifest = load_manifest(manifest_path);
    LoadedChainLen lc = load_chainlen(checkpoint_path);
    auto examples = build_chainlen_examples(manifest, lc.net.config().max_len);

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write predictions: " + out_csv);
    out << "chain_id,pred_up,pred_down,label_up,label_down\n";
    out.precision(10);
    std::vector<std::pair<double, double>> preds;
    std::vector<std::pair<int, int>> labels;
    for (size_t i = 0; i < examples.size(); ++i) {
        Eigen::Vector2d p = nn::chainlen_predict(lc.params, lc.net, examples[i].tensor);
        preds.emplace_back(p(0), p(1));
        labels.emplace_back(manifest.chains[i].label_up, manifest.chains[i].label_down);
        out << manifest.chains[i].chain_id << ',' << p(0) << ',' << p(1) << ','
            << manifest.chains[i].label_up << ',' << manifest.chains[i].label_down << '\n';
    }
    ChainLenAccuracy acc = chainlen_accuracy(preds, labels);
    return {{"cmd", "predict-length"},
            {"predictions", out_csv},
            {"up_accuracy", acc.up},
            {"down_accuracy", acc.down},
            {"avg_accuracy", acc.avg}};
}

}  // namespace sst
