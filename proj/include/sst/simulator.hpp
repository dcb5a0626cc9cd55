#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sst/burst.hpp"
#include "sst/rng.hpp"
#include "sst/trace.hpp"

namespace sst {

enum class Protocol { Ssh, Socat, Icmp, Dns };

Protocol protocol_from_string(const std::string& s);
std::string protocol_to_string(Protocol p);

// One link of the chain. propagation/jitter model the wire, the
// processing delay models the relay process at the receiving end.
struct HopSpec {
    Protocol protocol = Protocol::Socat;
    double propagation_delay = 0.0;
    double jitter_std = 0.0;
    int64_t mtu_payload = 1448;
    double per_hop_processing_delay = 0.0;
};

// Per-protocol encapsulation parameters. The relay transforms are
// analytic stand-ins for the real tunneling tools.
struct ProtocolModel {
    int64_t ssh_record_overhead = 32;
    int64_t ssh_block_align = 16;
    int64_t icmp_chunk_size = 1024;
    int64_t icmp_per_chunk_overhead = 28;
    double dns_poll_period = 0.5;
    int64_t dns_query_payload = 200;
    int64_t dns_response_payload = 1200;
    int64_t dns_query_overhead = 28;

    void validate() const;
};

struct ChainConfig {
    std::vector<HopSpec> hops;  // links: attacker->s1, s1->s2, ..., sN->target (2..4)
    int wan_link_index = 0;     // first link crosses the WAN
    uint64_t seed = 0;
    int monitored_stone = 1;    // 1-based; the stone hosting the defender's sensor

    int links() const { return static_cast<int>(hops.size()); }
    int stones() const { return links() - 1; }
    void validate() const;
};

struct ChainSample {
    std::string chain_id;
    ChainConfig config;
    // Ordered down the chain: attacker_egress, stone1_ingress,
    // stone1_egress, ..., target_ingress. 2 * links entries.
    std::vector<std::pair<std::string, Trace>> captures;
    int label_up_hosts = 0;    // hosts upstream of the monitored stone, attacker included
    int label_down_hosts = 0;  // hosts downstream, target included

    const Trace& capture(const std::string& point) const;
    const Trace& attacker_egress() const { return captures.front().second; }
    const Trace& target_ingress() const { return captures.back().second; }
    const Trace& monitored_ingress() const;
};

// Turns a burst schedule into the attacker-side packet stream:
// upstream bytes packetized at the MTU with exponential(1 ms)
// intra-burst gaps, the response following the last upstream packet
// of each burst, bursts separated by the schedule's gaps.
Trace synthesize_endpoint_traffic(const BurstSchedule& schedule, Rng& rng,
                                  int64_t mtu_payload = 1448);

// Delays every packet by propagation + |gaussian jitter| + processing,
// re-encapsulates per the hop's protocol, and re-sorts by timestamp.
Trace relay_hop(const Trace& trace, const HopSpec& hop, const ProtocolModel& proto, Rng& rng);

// Runs the full chain and records a capture at every point. Captures
// advance one relay_hop at a time: a link transit delivers the next
// ingress (the first transit also applies the attacker-side tunnel
// encapsulation, later transits only delay and re-segment at the MTU),
// and each stone re-encapsulates into its outgoing protocol.
ChainSample simulate_chain(const ChainConfig& config, const BurstModel& model,
                           const ProtocolModel& proto, Rng& rng);

std::string capture_point_name(int index, int links);

}  // namespace sst
