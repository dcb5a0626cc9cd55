#include "sst/obfuscate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sst {

DelayProfile delay_profile_light_v1() { return {0.25, 1.0}; }
DelayProfile delay_profile_light_v2() { return {0.50, 0.5}; }
DelayProfile delay_profile_heavy() { return {0.75, 1.0}; }

DelayProfile delay_profile_from_string(const std::string& name) {
    if (name == "light_v1") return delay_profile_light_v1();
    if (name == "light_v2") return delay_profile_light_v2();
    if (name == "heavy") return delay_profile_heavy();
    if (name == "none") return {0.0, 1.0};
    throw std::invalid_argument("unknown delay profile: " + name);
}

PaddingPlan plan_padding(const Trace& trace, double overhead_pct, Rng& rng) {
    if (trace.empty()) throw std::invalid_argument("plan_padding: empty trace");
    if (!(overhead_pct > 0.0)) throw std::invalid_argument("plan_padding: overhead must be > 0");
    double duration = trace.duration();
    if (!(duration > 0.0)) throw std::invalid_argument("plan_padding: zero-duration trace");

    PaddingPlan plan;
    double mean = overhead_pct / 100.0 * static_cast<double>(trace.size());
    plan.n_dummy = std::max<int64_t>(0, std::llround(rng.normal(mean, 0.1 * mean)));
    plan.segments = static_cast<int>(rng.uniform_int(5, 15));
    plan.weights = rng.dirichlet_uniform(plan.segments);

    // Rounded counts; the residual lands on the final segment. If
    // rounding overshoots, take the deficit back from the largest bins.
    plan.segment_counts.resize(plan.segments, 0);
    int64_t assigned = 0;
    for (int k = 0; k + 1 < plan.segments; ++k) {
        plan.segment_counts[k] = std::llround(plan.weights[k] * static_cast<double>(plan.n_dummy));
        assigned += plan.segment_counts[k];
    }
    int64_t residual = plan.n_dummy - assigned;
    while (residual < 0) {
        auto it = std::max_element(plan.segment_counts.begin(), plan.segment_counts.end() - 1);
        if (*it == 0) break;
        --*it;
        ++residual;
    }
    plan.segment_counts[plan.segments - 1] = residual;

    // Size multisets and direction split of the original flow.
    std::vector<int64_t> up_sizes, down_sizes;
    for (const auto& p : trace.packets)
        (p.dir > 0 ? up_sizes : down_sizes).push_back(p.size);
    double up_fraction = static_cast<double>(up_sizes.size()) / static_cast<double>(trace.size());

    double t0 = trace.packets.front().t;
    double seg_len = duration / plan.segments;
    plan.segment_rates.resize(plan.segments, 0.0);
    for (int k = 0; k < plan.segments; ++k) {
        int64_t n_k = plan.segment_counts[k];
        if (n_k <= 0) continue;
        double rate = static_cast<double>(n_k) / seg_len;
        plan.segment_rates[k] = rate;
        double seg_start = t0 + k * seg_len;
        double seg_end = seg_start + seg_len;
        double cursor = seg_start;
        for (int64_t i = 0; i < n_k; ++i) {
            cursor += rng.exponential(1.0 / rate);
            if (cursor > seg_end) break;  // discarded
            PacketRecord rec;
            rec.t = cursor;
            bool up = rng.uniform() < up_fraction;
            if (up && up_sizes.empty()) up = false;
            if (!up && down_sizes.empty()) up = true;
            const auto& pool = up ? up_sizes : down_sizes;
            rec.dir = up ? +1 : -1;
            rec.size = pool[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
            rec.dummy = true;
            plan.dummies.push_back(rec);
        }
    }
    return plan;
}

Trace apply_padding(const Trace& trace, const PaddingPlan& plan) {
    Trace out;
    out.capture_point = trace.capture_point;
    out.packets.reserve(trace.size() + plan.dummies.size());
    out.packets = trace.packets;
    out.packets.insert(out.packets.end(), plan.dummies.begin(), plan.dummies.end());
    finalize_trace(out);
    return out;
}

Trace apply_delays(const Trace& trace, const DelayProfile& profile, Rng& rng) {
    if (profile.p_delay < 0.0 || profile.p_delay > 1.0)
        throw std::invalid_argument("apply_delays: p_delay must be in [0, 1]");
    if (!(profile.d_max > 0.0)) throw std::invalid_argument("apply_delays: d_max must be > 0");

    Trace out;
    out.capture_point = trace.capture_point;
    out.packets = trace.packets;
    for (auto& p : out.packets)
        if (rng.uniform() < profile.p_delay) p.t += rng.uniform(0.0, profile.d_max);
    finalize_trace(out);
    return out;
}

Trace strip_dummies(const Trace& trace) {
    Trace out;
    out.capture_point = trace.capture_point;
    for (const auto& p : trace.packets)
        if (!p.dummy) out.packets.push_back(p);
    return out;
}

}  // namespace sst
