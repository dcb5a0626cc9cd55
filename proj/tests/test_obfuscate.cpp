#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "sst/obfuscate.hpp"

using namespace sst;

namespace {

Trace uniform_trace(Rng& rng, int n, double span) {
    Trace t;
    for (int i = 0; i < n; ++i)
        t.packets.push_back({rng.uniform(0.0, span), rng.uniform() < 0.6 ? 1 : -1,
                             static_cast<int64_t>(rng.uniform_int(40, 1500)), false});
    finalize_trace(t);
    return t;
}

}  // namespace

TEST_CASE("segment counts always sum to the dummy budget") {
    Rng data_rng(1);
    Trace t = uniform_trace(data_rng, 400, 30.0);
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        PaddingPlan plan = plan_padding(t, 80.0, rng);
        int64_t total = 0;
        for (int64_t n : plan.segment_counts) {
            CHECK(n >= 0);
            total += n;
        }
        CHECK(total == plan.n_dummy);
        CHECK(plan.segments >= 5);
        CHECK(plan.segments <= 15);
        double wsum = 0.0;
        for (double w : plan.weights) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("dummy budget tracks the target overhead") {
    Rng data_rng(3);
    Trace t = uniform_trace(data_rng, 500, 30.0);
    Rng rng(4);
    double total = 0.0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) total += static_cast<double>(plan_padding(t, 100.0, rng).n_dummy);
    // E[n_dummy] = 500; sample mean within 5%.
    CHECK(total / trials == doctest::Approx(500.0).epsilon(0.05));
}

TEST_CASE("dummy sizes come from the flow's own per-direction multiset") {
    Rng data_rng(5);
    Trace t = uniform_trace(data_rng, 300, 20.0);
    std::map<int, std::map<int64_t, int>> sizes;
    for (const auto& p : t.packets) sizes[p.dir][p.size]++;
    Rng rng(6);
    PaddingPlan plan = plan_padding(t, 120.0, rng);
    REQUIRE(!plan.dummies.empty());
    for (const auto& d : plan.dummies) {
        CHECK(d.dummy);
        CHECK(sizes[d.dir].count(d.size) == 1);
        CHECK(d.t >= t.packets.front().t);
        CHECK(d.t <= t.packets.back().t + 1e-9);
    }
}

TEST_CASE("segment-end discards stay under 5% at default parameters") {
    Rng data_rng(7);
    Trace t = uniform_trace(data_rng, 1500, 30.0);
    Rng rng(8);
    int64_t planned = 0, placed = 0;
    for (int trial = 0; trial < 500; ++trial) {
        PaddingPlan plan = plan_padding(t, 100.0, rng);
        planned += plan.n_dummy;
        placed += static_cast<int64_t>(plan.dummies.size());
    }
    double discard = 1.0 - static_cast<double>(placed) / static_cast<double>(planned);
    CHECK(discard < 0.05);
}

TEST_CASE("apply_padding keeps originals and sorts") {
    Rng data_rng(9);
    Trace t = uniform_trace(data_rng, 200, 10.0);
    Rng rng(10);
    PaddingPlan plan = plan_padding(t, 150.0, rng);
    Trace padded = apply_padding(t, plan);
    CHECK(padded.size() == t.size() + plan.dummies.size());
    for (size_t i = 1; i < padded.size(); ++i)
        CHECK(padded.packets[i].t >= padded.packets[i - 1].t);

    Trace recovered = strip_dummies(padded);
    REQUIRE(recovered.size() == t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        CHECK(recovered.packets[i].t == t.packets[i].t);
        CHECK(recovered.packets[i].size == t.packets[i].size);
    }

    PaddingPlan empty;
    Trace same = apply_padding(t, empty);
    CHECK(same.size() == t.size());
}

TEST_CASE("plan_padding rejects degenerate inputs") {
    Trace empty;
    Rng rng(11);
    CHECK_THROWS_AS(plan_padding(empty, 100.0, rng), std::invalid_argument);
    Trace point;
    point.packets = {{1.0, 1, 10, false}};
    CHECK_THROWS_AS(plan_padding(point, 100.0, rng), std::invalid_argument);
}

TEST_CASE("zero-probability profile is the identity") {
    Rng data_rng(12);
    Trace t = uniform_trace(data_rng, 100, 5.0);
    Rng rng(13);
    Trace out = apply_delays(t, {0.0, 1.0}, rng);
    REQUIRE(out.size() == t.size());
    for (size_t i = 0; i < t.size(); ++i) CHECK(out.packets[i].t == t.packets[i].t);
}

TEST_CASE("heavy profile mean delay matches p * dmax / 2") {
    Rng data_rng(14);
    Trace t = uniform_trace(data_rng, 10000, 100.0);
    Rng rng(15);
    Trace out = apply_delays(t, delay_profile_heavy(), rng);
    // Sum of added delay is order-invariant.
    double before = 0.0, after = 0.0;
    for (const auto& p : t.packets) before += p.t;
    for (const auto& p : out.packets) after += p.t;
    double mean_added = (after - before) / static_cast<double>(t.size());
    CHECK(mean_added == doctest::Approx(0.375).epsilon(0.10));
}

TEST_CASE("delays preserve the direction/size multiset and sortedness") {
    Rng data_rng(16);
    Trace t = uniform_trace(data_rng, 500, 20.0);
    Rng rng(17);
    Trace out = apply_delays(t, delay_profile_light_v2(), rng);
    REQUIRE(out.size() == t.size());
    std::multiset<std::pair<int, int64_t>> a, b;
    for (const auto& p : t.packets) a.insert({p.dir, p.size});
    for (const auto& p : out.packets) b.insert({p.dir, p.size});
    CHECK(a == b);
    for (size_t i = 1; i < out.size(); ++i)
        CHECK(out.packets[i].t >= out.packets[i - 1].t);
}

TEST_CASE("padding then delays composes and stays valid") {
    Rng data_rng(18);
    Trace t = uniform_trace(data_rng, 300, 15.0);
    Rng rng(19);
    PaddingPlan plan = plan_padding(t, 100.0, rng);
    Trace padded = apply_padding(t, plan);
    Trace out = apply_delays(padded, delay_profile_light_v1(), rng);
    CHECK(out.size() == padded.size());
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out.packets[i].size >= 1);
        CHECK((out.packets[i].dir == 1 || out.packets[i].dir == -1));
        if (i > 0) CHECK(out.packets[i].t >= out.packets[i - 1].t);
    }
}

TEST_CASE("named profiles carry the published parameters") {
    CHECK(delay_profile_light_v1().p_delay == 0.25);
    CHECK(delay_profile_light_v1().d_max == 1.0);
    CHECK(delay_profile_light_v2().p_delay == 0.50);
    CHECK(delay_profile_light_v2().d_max == 0.5);
    CHECK(delay_profile_heavy().p_delay == 0.75);
    CHECK(delay_profile_heavy().d_max == 1.0);
    CHECK_THROWS_AS(delay_profile_from_string("bogus"), std::invalid_argument);
}
