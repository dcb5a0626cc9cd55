#include "sst/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace sst {

namespace {
constexpr double kIntraBurstGapMean = 0.001;  // strictly below the burst threshold
constexpr double kCoalesceWindow = 1e-4;      // stream re-segmentation coalescing
constexpr int64_t kIcmpReplySize = 64;
}  // namespace

Protocol protocol_from_string(const std::string& s) {
    if (s == "ssh") return Protocol::Ssh;
    if (s == "socat") return Protocol::Socat;
    if (s == "icmp") return Protocol::Icmp;
    if (s == "dns") return Protocol::Dns;
    throw std::invalid_argument("unknown protocol: " + s);
}

std::string protocol_to_string(Protocol p) {
    switch (p) {
        case Protocol::Ssh: return "ssh";
        case Protocol::Socat: return "socat";
        case Protocol::Icmp: return "icmp";
        case Protocol::Dns: return "dns";
    }
    return "?";
}

void ProtocolModel::validate() const {
    if (ssh_record_overhead <= 0 || ssh_block_align <= 0 || icmp_chunk_size <= 0 ||
        icmp_per_chunk_overhead <= 0 || dns_query_payload <= 0 || dns_response_payload <= 0 ||
        dns_query_overhead <= 0)
        throw std::invalid_argument("protocol model: byte parameters must be positive");
    if (!(dns_poll_period > 0.0))
        throw std::invalid_argument("protocol model: poll period must be positive");
}

void ChainConfig::validate() const {
    if (links() < 2 || links() > 4)
        throw std::invalid_argument("chain config: need 2..4 links (1..3 stepping stones)");
    if (wan_link_index != 0)
        throw std::invalid_argument("chain config: the first link must be the WAN link");
    if (monitored_stone < 1 || monitored_stone > stones())
        throw std::invalid_argument("chain config: monitored stone out of range");
    for (const auto& h : hops) {
        if (h.propagation_delay < 0 || h.jitter_std < 0 || h.per_hop_processing_delay < 0)
            throw std::invalid_argument("chain config: delays must be >= 0");
        if (h.mtu_payload < 64) throw std::invalid_argument("chain config: mtu_payload < 64");
    }
}

const Trace& ChainSample::capture(const std::string& point) const {
    for (const auto& [name, trace] : captures)
        if (name == point) return trace;
    throw std::out_of_range("no capture point: " + point);
}

const Trace& ChainSample::monitored_ingress() const {
    return capture("stone" + std::to_string(config.monitored_stone) + "_ingress");
}

std::string capture_point_name(int index, int links) {
    int count = 2 * links;
    if (index == 0) return "attacker_egress";
    if (index == count - 1) return "target_ingress";
    int stone = (index + 1) / 2;
    return "stone" + std::to_string(stone) + (index % 2 == 1 ? "_ingress" : "_egress");
}

Trace synthesize_endpoint_traffic(const BurstSchedule& schedule, Rng& rng, int64_t mtu_payload) {
    if (schedule.bursts.empty())
        throw std::invalid_argument("synthesize_endpoint_traffic: empty schedule");

    Trace trace;
    trace.capture_point = "attacker_egress";
    double t = 0.0;

    auto emit_stream = [&](double start, int64_t bytes, int dir) {
        double cursor = start;
        int64_t remaining = bytes;
        bool first = true;
        while (remaining > 0) {
            if (!first) cursor += rng.exponential(kIntraBurstGapMean);
            int64_t sz = std::min(remaining, mtu_payload);
            trace.packets.push_back({cursor, dir, sz, false});
            remaining -= sz;
            first = false;
        }
        return cursor;  // time of the last packet (start if none emitted)
    };

    for (const auto& burst : schedule.bursts) {
        double last_up = emit_stream(t, burst.up_bytes, +1);
        // Response begins one RTT placeholder (0 s) after the last
        // upstream packet; hop delays materialize the real lag.
        double last_down = emit_stream(last_up, burst.down_bytes, -1);
        t = std::max(last_up, last_down) + burst.gap_after;
    }
    finalize_trace(trace);
    return trace;
}

namespace {

// Per-direction byte-stream re-segmentation. Full segments leave at
// the arrival timestamp; a partial tail is held only while the next
// same-direction packet is within the coalescing window.
void resegment_stream(const std::vector<PacketRecord>& in, int dir, int64_t mtu,
                      std::vector<PacketRecord>& out) {
    int64_t buffer = 0;
    size_t n = in.size();
    for (size_t i = 0; i < n; ++i) {
        if (in[i].dir != dir) continue;
        buffer += in[i].size;
        double t = in[i].t;
        while (buffer >= mtu) {
            out.push_back({t, dir, mtu, false});
            buffer -= mtu;
        }
        if (buffer > 0) {
            // Find the next packet in this direction.
            size_t j = i + 1;
            while (j < n && in[j].dir != dir) ++j;
            bool hold = j < n && in[j].t - t < kCoalesceWindow;
            if (!hold) {
                out.push_back({t, dir, buffer, false});
                buffer = 0;
            }
        }
    }
}

std::vector<PacketRecord> transform_socat(const std::vector<PacketRecord>& in, int64_t mtu) {
    std::vector<PacketRecord> out;
    out.reserve(in.size());
    resegment_stream(in, +1, mtu, out);
    resegment_stream(in, -1, mtu, out);
    return out;
}

std::vector<PacketRecord> transform_ssh(const std::vector<PacketRecord>& in,
                                        const ProtocolModel& proto) {
    std::vector<PacketRecord> out;
    out.reserve(in.size());
    for (const auto& p : in) {
        int64_t aligned =
            (p.size + proto.ssh_block_align - 1) / proto.ssh_block_align * proto.ssh_block_align;
        out.push_back({p.t, p.dir, aligned + proto.ssh_record_overhead, false});
    }
    return out;
}

std::vector<PacketRecord> transform_icmp(const std::vector<PacketRecord>& in,
                                         const ProtocolModel& proto, double reply_delay) {
    std::vector<PacketRecord> out;
    out.reserve(in.size() * 2);
    for (const auto& p : in) {
        int64_t remaining = p.size;
        while (remaining > 0) {
            int64_t chunk = std::min(remaining, proto.icmp_chunk_size);
            out.push_back({p.t, p.dir, chunk + proto.icmp_per_chunk_overhead, false});
            if (p.dir > 0) out.push_back({p.t + reply_delay, -1, kIcmpReplySize, false});
            remaining -= chunk;
        }
    }
    return out;
}

// Polling tunnel: arrivals are queued per direction and drained only
// at poll ticks. Every tick emits one query and one response whether
// or not data is waiting; the payload actually carried is bounded by
// the per-message capacity, the rest stays queued for later ticks.
std::vector<PacketRecord> transform_dns(const std::vector<PacketRecord>& in,
                                        const ProtocolModel& proto) {
    std::vector<PacketRecord> out;
    if (in.empty()) return out;
    double t0 = in.front().t;
    double t_last = in.back().t;

    size_t next = 0;
    int64_t queue_up = 0, queue_down = 0;
    double tick = t0;
    int64_t guard = 0;
    while (true) {
        while (next < in.size() && in[next].t <= tick) {
            if (in[next].dir > 0)
                queue_up += in[next].size;
            else
                queue_down += in[next].size;
            ++next;
        }
        int64_t carried_up = std::min(queue_up, proto.dns_query_payload);
        int64_t carried_down = std::min(queue_down, proto.dns_response_payload);
        queue_up -= carried_up;
        queue_down -= carried_down;
        out.push_back({tick, +1, proto.dns_query_overhead + carried_up, false});
        out.push_back({tick, -1, proto.dns_query_overhead + carried_down, false});
        bool drained = next >= in.size() && queue_up == 0 && queue_down == 0;
        if (drained && tick >= t_last) break;
        tick += proto.dns_poll_period;
        if (++guard > 10'000'000)
            throw std::runtime_error("dns transform: poll loop failed to drain");
    }
    return out;
}

}  // namespace

Trace relay_hop(const Trace& trace, const HopSpec& hop, const ProtocolModel& proto, Rng& rng) {
    if (trace.empty()) throw std::invalid_argument("relay_hop: empty trace");
    proto.validate();

    std::vector<PacketRecord> delayed;
    delayed.reserve(trace.packets.size());
    for (const auto& p : trace.packets) {
        double jitter = hop.jitter_std > 0.0 ? std::abs(rng.normal(0.0, hop.jitter_std)) : 0.0;
        delayed.push_back(
            {p.t + hop.propagation_delay + jitter + hop.per_hop_processing_delay, p.dir, p.size,
             p.dummy});
    }
    std::stable_sort(delayed.begin(), delayed.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.t < b.t; });

    std::vector<PacketRecord> shaped;
    switch (hop.protocol) {
        case Protocol::Ssh: shaped = transform_ssh(delayed, proto); break;
        case Protocol::Socat: shaped = transform_socat(delayed, hop.mtu_payload); break;
        case Protocol::Icmp: shaped = transform_icmp(delayed, proto, hop.propagation_delay); break;
        case Protocol::Dns: shaped = transform_dns(delayed, proto); break;
    }

    Trace out;
    out.capture_point = trace.capture_point;
    out.packets = std::move(shaped);
    finalize_trace(out);
    return out;
}

ChainSample simulate_chain(const ChainConfig& config, const BurstModel& model,
                           const ProtocolModel& proto, Rng& rng) {
    config.validate();

    ChainSample sample;
    sample.config = config;
    int links = config.links();
    int stones = config.stones();

    BurstSchedule schedule = sample_burst_schedule(model, rng);
    Trace current = synthesize_endpoint_traffic(schedule, rng, config.hops[0].mtu_payload);
    current.capture_point = capture_point_name(0, links);
    sample.captures.emplace_back(current.capture_point, current);

    // First transit carries the attacker-side encapsulation.
    current = relay_hop(current, config.hops[0], proto, rng);
    current.capture_point = capture_point_name(1, links);
    sample.captures.emplace_back(current.capture_point, current);

    for (int stone = 1; stone <= stones; ++stone) {
        const HopSpec& next_link = config.hops[stone];

        HopSpec stone_hop;  // relay process: processing delay + re-encapsulation
        stone_hop.protocol = next_link.protocol;
        stone_hop.propagation_delay = 0.0;
        stone_hop.jitter_std = 0.0;
        stone_hop.mtu_payload = next_link.mtu_payload;
        stone_hop.per_hop_processing_delay = next_link.per_hop_processing_delay;
        current = relay_hop(current, stone_hop, proto, rng);
        current.capture_point = capture_point_name(2 * stone, links);
        sample.captures.emplace_back(current.capture_point, current);

        HopSpec transit = next_link;  // wire only: delay, jitter, MTU re-segmentation
        transit.protocol = Protocol::Socat;
        transit.per_hop_processing_delay = 0.0;
        current = relay_hop(current, transit, proto, rng);
        current.capture_point = capture_point_name(2 * stone + 1, links);
        sample.captures.emplace_back(current.capture_point, current);
    }

    sample.label_up_hosts = config.monitored_stone;
    sample.label_down_hosts = stones - config.monitored_stone + 1;
    return sample;
}

}  // namespace sst
