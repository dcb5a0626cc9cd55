#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sst/rng.hpp"
#include "sst/trace.hpp"

namespace sst {

// One request/response exchange: the client pushes up_bytes toward the
// target, the target answers with down_bytes, then the link idles for
// gap_after seconds.
struct Burst {
    double start = 0.0;
    int64_t up_bytes = 0;
    int64_t down_bytes = 0;
    double gap_after = 0.0;
};

struct BurstSequence {
    std::vector<Burst> bursts;
    std::string source_trace_id;
};

// Values observed in real traffic; sampling draws directly from them
// (bootstrap), never extrapolating beyond the observed support.
struct EmpiricalDistribution {
    std::vector<double> values;    // sorted ascending
    std::vector<double> weights;   // empty = uniform; else positive, sums to 1

    void validate() const;
    double sample(Rng& rng) const;
    double min() const { return values.front(); }
    double max() const { return values.back(); }
};

EmpiricalDistribution make_empirical(std::vector<double> values);

struct BurstModel {
    EmpiricalDistribution burst_count_dist;
    EmpiricalDistribution inter_burst_gap_dist;
    EmpiricalDistribution up_bytes_dist;
    EmpiricalDistribution down_bytes_dist;
};

struct BurstSchedule {
    std::vector<Burst> bursts;
};

// Splits a trace into bursts: a new burst begins at every packet whose
// delay since the previous packet exceeds gap_threshold. Per burst,
// up_bytes/down_bytes sum the packet sizes by direction; gap_after is
// the time from the burst's last packet to the next burst's first
// packet (0 for the final burst).
BurstSequence parse_bursts(const Trace& trace, double gap_threshold);

// Pools the four statistics over all sequences into empirical
// distributions. Inter-burst gaps exclude the final burst's zero gap.
BurstModel fit_burst_model(const std::vector<BurstSequence>& sequences);

// Draws J from burst_count_dist, then (N, M, Z) per burst. Burst start
// times are provisional (cumulative gaps only); the simulator assigns
// real times once burst durations are known.
BurstSchedule sample_burst_schedule(const BurstModel& model, Rng& rng);

// Model file: JSON document with four arrays of 64-bit reals under
// keys burst_count, inter_burst_gap_s, up_bytes, down_bytes.
void save_burst_model(const BurstModel& model, const std::string& path);
BurstModel load_burst_model(const std::string& path);

}  // namespace sst
