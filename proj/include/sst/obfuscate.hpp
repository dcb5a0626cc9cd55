#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sst/rng.hpp"
#include "sst/trace.hpp"

namespace sst {

// Varying-rate chaff: the dummy budget is spread unevenly over K
// temporal segments via a Dirichlet draw, then placed by a Poisson
// process within each segment.
struct PaddingPlan {
    int64_t n_dummy = 0;                 // target count before segment-end discards
    int segments = 0;                    // K in [5, 15]
    std::vector<double> weights;         // Dirichlet(1,...,1)
    std::vector<int64_t> segment_counts; // sums to n_dummy exactly
    std::vector<double> segment_rates;   // n_k / T_k
    std::vector<PacketRecord> dummies;   // records to inject, dummy flag set
};

struct DelayProfile {
    double p_delay = 0.0;
    double d_max = 1.0;
};

// Named presets from lightest to heaviest.
DelayProfile delay_profile_light_v1();  // (0.25, 1.0 s)
DelayProfile delay_profile_light_v2();  // (0.50, 0.5 s)
DelayProfile delay_profile_heavy();     // (0.75, 1.0 s)
DelayProfile delay_profile_from_string(const std::string& name);

// Builds a chaff plan for the trace. The dummy count is drawn from
// normal(overhead/100 * packet count, 0.1 * mean) clamped at zero;
// dummy sizes are resampled from the flow's own per-direction size
// multiset and directions follow the flow's upstream fraction.
PaddingPlan plan_padding(const Trace& trace, double overhead_pct, Rng& rng);

// Merge-sorts the dummies into the trace; original packets are
// untouched and keep dummy=false.
Trace apply_padding(const Trace& trace, const PaddingPlan& plan);

// Independently delays each packet with probability p_delay by
// uniform(0, d_max), then re-sorts. Sizes and directions unchanged.
Trace apply_delays(const Trace& trace, const DelayProfile& profile, Rng& rng);

// Drops records flagged as chaff, recovering the pre-padding trace.
Trace strip_dummies(const Trace& trace);

}  // namespace sst
