#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "sst/dataset.hpp"
#include "sst/simulator.hpp"

using namespace sst;
namespace fs = std::filesystem;

namespace {

BurstModel tiny_model() {
    BurstModel m;
    m.burst_count_dist = make_empirical({3, 5});
    m.inter_burst_gap_dist = make_empirical({0.4, 0.8, 1.2});
    m.up_bytes_dist = make_empirical({500, 2900, 8000});
    m.down_bytes_dist = make_empirical({100, 1000});
    return m;
}

BurstSchedule single_burst(int64_t up, int64_t down, double gap) {
    BurstSchedule s;
    s.bursts.push_back({0.0, up, down, gap});
    return s;
}

ChainConfig socat_chain(int stones, double delay, double jitter, double processing) {
    ChainConfig c;
    for (int i = 0; i <= stones; ++i) {
        HopSpec h;
        h.protocol = Protocol::Socat;
        h.propagation_delay = delay;
        h.jitter_std = jitter;
        h.per_hop_processing_delay = processing;
        c.hops.push_back(h);
    }
    c.monitored_stone = stones;
    return c;
}

bool traces_equal(const Trace& a, const Trace& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.packets[i].t != b.packets[i].t || a.packets[i].dir != b.packets[i].dir ||
            a.packets[i].size != b.packets[i].size)
            return false;
    return true;
}

}  // namespace

TEST_CASE("packetization splits bursts at the MTU") {
    Rng rng(1);
    Trace t = synthesize_endpoint_traffic(single_burst(2900, 100, 1.0), rng, 1448);
    std::vector<int64_t> up, down;
    for (const auto& p : t.packets) (p.dir > 0 ? up : down).push_back(p.size);
    REQUIRE(up.size() == 3);  // 1448 + 1448 + 4
    CHECK(up[0] == 1448);
    CHECK(up[1] == 1448);
    CHECK(up[2] == 4);
    REQUIRE(down.size() == 1);
    CHECK(down[0] == 100);
}

TEST_CASE("upstream-empty burst emits only the response") {
    Rng rng(2);
    Trace t = synthesize_endpoint_traffic(single_burst(0, 100, 0.0), rng, 1448);
    REQUIRE(t.size() == 1);
    CHECK(t.packets[0].dir == -1);
    CHECK(t.packets[0].size == 100);
}

TEST_CASE("synthesized bytes match the schedule totals") {
    BurstModel m = tiny_model();
    Rng rng(3);
    BurstSchedule s = sample_burst_schedule(m, rng);
    int64_t want_up = 0, want_down = 0;
    for (const auto& b : s.bursts) {
        want_up += b.up_bytes;
        want_down += b.down_bytes;
    }
    Trace t = synthesize_endpoint_traffic(s, rng, 1448);
    int64_t up = 0, down = 0;
    for (const auto& p : t.packets) (p.dir > 0 ? up : down) += p.size;
    CHECK(up == want_up);
    CHECK(down == want_down);
}

TEST_CASE("socat hop with zero jitter is a pure shift for MTU-sized packets") {
    Trace t;
    t.packets = {{1.0, 1, 1000, false}};
    HopSpec hop;
    hop.protocol = Protocol::Socat;
    hop.propagation_delay = 0.05;
    Rng rng(4);
    Trace out = relay_hop(t, hop, ProtocolModel{}, rng);
    REQUIRE(out.size() == 1);
    CHECK(out.packets[0].t == doctest::Approx(1.05));
    CHECK(out.packets[0].size == 1000);
}

TEST_CASE("ssh hop pads to the block size and adds the record overhead") {
    Trace t;
    t.packets = {{0.0, 1, 100, false}};
    HopSpec hop;
    hop.protocol = Protocol::Ssh;
    ProtocolModel proto;
    proto.ssh_block_align = 16;
    proto.ssh_record_overhead = 32;
    Rng rng(5);
    Trace out = relay_hop(t, hop, proto, rng);
    REQUIRE(out.size() == 1);
    CHECK(out.packets[0].size == 144);  // ceil(100/16)*16 + 32
}

TEST_CASE("icmp hop chunks payload and echoes replies") {
    Trace t;
    t.packets = {{0.0, 1, 2100, false}};
    HopSpec hop;
    hop.protocol = Protocol::Icmp;
    hop.propagation_delay = 0.01;
    ProtocolModel proto;  // chunk 1024, overhead 28
    Rng rng(6);
    Trace out = relay_hop(t, hop, proto, rng);
    int chunks = 0, replies = 0;
    for (const auto& p : out.packets) {
        if (p.dir > 0) {
            ++chunks;
            CHECK(p.size <= 1024 + 28);
        } else {
            ++replies;
            CHECK(p.size == 64);
        }
    }
    CHECK(chunks == 3);  // 1024 + 1024 + 52
    CHECK(replies == 3);
}

TEST_CASE("dns hop polls at least floor(duration/period) times") {
    Trace t;
    t.packets = {{0.0, 1, 50, false}, {2.0, 1, 50, false}};
    HopSpec hop;
    hop.protocol = Protocol::Dns;
    ProtocolModel proto;  // poll 0.5 s
    Rng rng(7);
    Trace out = relay_hop(t, hop, proto, rng);
    int queries = 0;
    for (const auto& p : out.packets)
        if (p.dir > 0) ++queries;
    CHECK(queries >= 4);
}

TEST_CASE("dns poll cadence is exact at zero jitter") {
    Trace t;
    t.packets = {{0.0, 1, 5000, false}, {3.0, -1, 2000, false}};
    HopSpec hop;
    hop.protocol = Protocol::Dns;
    hop.propagation_delay = 0.02;
    ProtocolModel proto;
    Rng rng(8);
    Trace out = relay_hop(t, hop, proto, rng);
    std::vector<double> query_times;
    for (const auto& p : out.packets)
        if (p.dir > 0) query_times.push_back(p.t);
    REQUIRE(query_times.size() >= 2);
    for (size_t i = 1; i < query_times.size(); ++i)
        CHECK(std::abs(query_times[i] - query_times[i - 1] - proto.dns_poll_period) < 1e-6);
}

TEST_CASE("identity chain: single socat stone with zero delays") {
    ChainConfig config = socat_chain(1, 0.0, 0.0, 0.0);
    config.seed = 12;
    Rng rng(12);
    ChainSample sample = simulate_chain(config, tiny_model(), ProtocolModel{}, rng);
    REQUIRE(sample.captures.size() == 4);
    CHECK(traces_equal(sample.attacker_egress(), sample.target_ingress()));
}

TEST_CASE("three stones give eight captures and consistent labels") {
    ChainConfig config = socat_chain(3, 0.01, 0.0, 0.0001);
    config.monitored_stone = 2;
    Rng rng(13);
    ChainSample sample = simulate_chain(config, tiny_model(), ProtocolModel{}, rng);
    CHECK(sample.captures.size() == 8);
    CHECK(sample.captures.front().first == "attacker_egress");
    CHECK(sample.captures.back().first == "target_ingress");
    CHECK(sample.label_up_hosts == 2);    // attacker + stone1
    CHECK(sample.label_down_hosts == 2);  // stone3 + target
    CHECK(sample.label_up_hosts + sample.label_down_hosts == 4);
}

TEST_CASE("captures are causal and time-sorted") {
    for (uint64_t seed : {21, 22, 23}) {
        ChainConfig config = socat_chain(2, 0.03, 0.003, 0.0002);
        Rng rng(seed);
        ChainSample sample = simulate_chain(config, tiny_model(), ProtocolModel{}, rng);
        double prev_first = -1.0;
        for (const auto& [point, trace] : sample.captures) {
            REQUIRE(!trace.empty());
            for (size_t i = 1; i < trace.size(); ++i)
                CHECK(trace.packets[i].t >= trace.packets[i - 1].t);
            CHECK(trace.packets.front().t >= prev_first);
            prev_first = trace.packets.front().t;
        }
    }
}

TEST_CASE("socat chains conserve payload bytes at every capture") {
    for (uint64_t seed : {31, 32, 33, 34}) {
        ChainConfig config = socat_chain(2, 0.04, 0.004, 0.0002);
        Rng rng(seed);
        ChainSample sample = simulate_chain(config, tiny_model(), ProtocolModel{}, rng);
        int64_t reference = sample.attacker_egress().total_bytes();
        for (const auto& [point, trace] : sample.captures)
            CHECK(trace.total_bytes() == reference);
    }
}

TEST_CASE("latency floor holds through a socat hop") {
    Rng rng(41);
    Trace in = synthesize_endpoint_traffic(single_burst(5000, 500, 0.5), rng, 1448);
    HopSpec hop;
    hop.protocol = Protocol::Socat;
    hop.propagation_delay = 0.05;
    hop.jitter_std = 0.005;
    Trace out = relay_hop(in, hop, ProtocolModel{}, rng);
    // Byte-conserving transform; first/last packet movement bounds it.
    CHECK(out.packets.front().t - in.packets.front().t >= hop.propagation_delay);
    CHECK(out.packets.back().t - in.packets.back().t >= hop.propagation_delay);
    CHECK(out.total_bytes() == in.total_bytes());
}

TEST_CASE("simulation is fully deterministic under a fixed seed") {
    ChainConfig config = socat_chain(3, 0.05, 0.005, 0.0002);
    Rng a(77), b(77);
    ChainSample sa = simulate_chain(config, tiny_model(), ProtocolModel{}, a);
    ChainSample sb = simulate_chain(config, tiny_model(), ProtocolModel{}, b);
    REQUIRE(sa.captures.size() == sb.captures.size());
    for (size_t i = 0; i < sa.captures.size(); ++i)
        CHECK(traces_equal(sa.captures[i].second, sb.captures[i].second));
}

TEST_CASE("dataset generation is deterministic and labeled") {
    fs::path dir1 = fs::temp_directory_path() / ("sst_ds1_" + std::to_string(::getpid()));
    fs::path dir2 = fs::temp_directory_path() / ("sst_ds2_" + std::to_string(::getpid()));

    DatasetConfig cfg;
    cfg.name = "unit";
    cfg.mode = ProtocolMode::Ssh;
    cfg.n_chains = 10;
    cfg.base_seed = 1234;

    BurstModel model = tiny_model();
    DatasetManifest m1 = generate_dataset(cfg, model, dir1.string());
    DatasetManifest m2 = generate_dataset(cfg, model, dir2.string());
    REQUIRE(m1.chains.size() == 10);
    CHECK(m1.failures.empty());

    for (size_t i = 0; i < m1.chains.size(); ++i) {
        const auto& c1 = m1.chains[i];
        const auto& c2 = m2.chains[i];
        CHECK(c1.seed == (cfg.base_seed ^ i));
        CHECK(c1.protocols == c2.protocols);
        CHECK(c1.label_up == c2.label_up);
        // every hop ssh in single-protocol mode
        for (const auto& p : c1.protocols) CHECK(p == "ssh");
        // monitored stone defaults to the last stone
        CHECK(c1.monitored_stone == c1.links - 1);
        CHECK(c1.label_up == c1.links - 1);
        CHECK(c1.label_down == 1);
        // capture files byte-identical across runs
        for (size_t k = 0; k < c1.captures.size(); ++k) {
            Trace t1 = load_capture(m1, c1, c1.captures[k].first);
            Trace t2 = load_capture(m2, c2, c2.captures[k].first);
            CHECK(traces_equal(t1, t2));
        }
    }

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("mixed datasets cover every protocol") {
    fs::path dir = fs::temp_directory_path() / ("sst_ds3_" + std::to_string(::getpid()));
    DatasetConfig cfg;
    cfg.mode = ProtocolMode::Mixed;
    cfg.n_chains = 200;
    cfg.base_seed = 99;
    BurstModel model;
    model.burst_count_dist = make_empirical({2});
    model.inter_burst_gap_dist = make_empirical({0.3});
    model.up_bytes_dist = make_empirical({600});
    model.down_bytes_dist = make_empirical({100});

    DatasetManifest manifest = generate_dataset(cfg, model, dir.string());
    std::map<std::string, int> chains_with;
    for (const auto& c : manifest.chains) {
        std::set<std::string> protos(c.protocols.begin(), c.protocols.end());
        for (const auto& p : protos) chains_with[p]++;
    }
    // P(protocol absent from a chain) <= (3/4)^2; with 200 chains the
    // 4-sigma lower bound is far above 30.
    for (const char* p : {"ssh", "socat", "icmp", "dns"}) CHECK(chains_with[p] >= 30);
    fs::remove_all(dir);
}

TEST_CASE("config validation rejects bad chains") {
    ChainConfig config;  // no hops
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = socat_chain(1, 0.0, 0.0, 0.0);
    config.monitored_stone = 2;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = socat_chain(1, 0.0, 0.0, 0.0);
    config.hops[0].mtu_payload = 32;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
