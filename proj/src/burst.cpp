#include "sst/burst.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sst {

using nlohmann::json;

void EmpiricalDistribution::validate() const {
    if (values.empty()) throw std::invalid_argument("empirical distribution must be nonempty");
    if (!std::is_sorted(values.begin(), values.end()))
        throw std::invalid_argument("empirical distribution values must be sorted");
    if (!weights.empty()) {
        if (weights.size() != values.size())
            throw std::invalid_argument("weights must match values");
        double total = 0.0;
        for (double w : weights) {
            if (w <= 0.0) throw std::invalid_argument("weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("weights must sum to 1");
    }
}

double EmpiricalDistribution::sample(Rng& rng) const {
    if (weights.empty()) {
        size_t i = static_cast<size_t>(rng.uniform() * values.size());
        if (i >= values.size()) i = values.size() - 1;
        return values[i];
    }
    double u = rng.uniform();
    double cum = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        cum += weights[i];
        if (u < cum) return values[i];
    }
    return values.back();
}

EmpiricalDistribution make_empirical(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    EmpiricalDistribution d;
    d.values = std::move(values);
    d.validate();
    return d;
}

BurstSequence parse_bursts(const Trace& trace, double gap_threshold) {
    if (trace.empty()) throw std::invalid_argument("parse_bursts: empty trace");
    if (!(gap_threshold > 0.0)) throw std::invalid_argument("parse_bursts: gap_threshold must be > 0");

    BurstSequence seq;
    seq.source_trace_id = trace.capture_point;

    Burst cur;
    cur.start = trace.packets.front().t;
    double last_t = trace.packets.front().t;
    double burst_last_t = last_t;
    bool first = true;

    auto add_packet = [&](const PacketRecord& p) {
        if (p.dir > 0)
            cur.up_bytes += p.size;
        else
            cur.down_bytes += p.size;
        burst_last_t = p.t;
    };

    for (const auto& p : trace.packets) {
        if (!first && p.t - last_t > gap_threshold) {
            cur.gap_after = p.t - burst_last_t;
            seq.bursts.push_back(cur);
            cur = Burst{};
            cur.start = p.t;
        }
        add_packet(p);
        last_t = p.t;
        first = false;
    }
    cur.gap_after = 0.0;
    seq.bursts.push_back(cur);
    return seq;
}

BurstModel fit_burst_model(const std::vector<BurstSequence>& sequences) {
    if (sequences.empty()) throw std::invalid_argument("fit_burst_model: no sequences");
    std::vector<double> counts, gaps, ups, downs;
    for (const auto& seq : sequences) {
        counts.push_back(static_cast<double>(seq.bursts.size()));
        for (size_t i = 0; i < seq.bursts.size(); ++i) {
            const Burst& b = seq.bursts[i];
            ups.push_back(static_cast<double>(b.up_bytes));
            downs.push_back(static_cast<double>(b.down_bytes));
            if (i + 1 < seq.bursts.size()) gaps.push_back(b.gap_after);
        }
    }
    if (gaps.empty()) gaps.push_back(0.0);  // all sequences single-burst

    BurstModel model;
    model.burst_count_dist = make_empirical(std::move(counts));
    model.inter_burst_gap_dist = make_empirical(std::move(gaps));
    model.up_bytes_dist = make_empirical(std::move(ups));
    model.down_bytes_dist = make_empirical(std::move(downs));
    return model;
}

BurstSchedule sample_burst_schedule(const BurstModel& model, Rng& rng) {
    int64_t j = std::llround(model.burst_count_dist.sample(rng));
    if (j < 1) j = 1;

    BurstSchedule schedule;
    double start = 0.0;
    for (int64_t i = 0; i < j; ++i) {
        Burst b;
        b.start = start;
        for (int attempt = 0; attempt < 256; ++attempt) {
            b.up_bytes = std::llround(model.up_bytes_dist.sample(rng));
            b.down_bytes = std::llround(model.down_bytes_dist.sample(rng));
            if (b.up_bytes < 0) b.up_bytes = 0;
            if (b.down_bytes < 0) b.down_bytes = 0;
            if (b.up_bytes > 0 || b.down_bytes > 0) break;
        }
        if (b.up_bytes == 0 && b.down_bytes == 0)
            throw std::runtime_error("sample_burst_schedule: byte distributions contain only zeros");
        b.gap_after = std::max(0.0, model.inter_burst_gap_dist.sample(rng));
        schedule.bursts.push_back(b);
        start += b.gap_after;
    }
    schedule.bursts.back().gap_after = 0.0;
    return schedule;
}

void save_burst_model(const BurstModel& model, const std::string& path) {
    json j;
    j["burst_count"] = model.burst_count_dist.values;
    j["inter_burst_gap_s"] = model.inter_burst_gap_dist.values;
    j["up_bytes"] = model.up_bytes_dist.values;
    j["down_bytes"] = model.down_bytes_dist.values;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write burst model: " + path);
    out << j.dump(2) << '\n';
}

BurstModel load_burst_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open burst model: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("bad burst model file " + path + ": " + e.what());
    }
    auto arr = [&](const char* key) {
        if (!j.contains(key)) throw std::runtime_error("burst model missing key: " + std::string(key));
        return make_empirical(j.at(key).get<std::vector<double>>());
    };
    BurstModel model;
    model.burst_count_dist = arr("burst_count");
    model.inter_burst_gap_dist = arr("inter_burst_gap_s");
    model.up_bytes_dist = arr("up_bytes");
    model.down_bytes_dist = arr("down_bytes");
    return model;
}

}  // namespace sst
