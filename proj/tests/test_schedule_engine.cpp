// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "v6drift/campaign.hpp"
#include "v6drift/engine.hpp"
#include "v6drift/schedule.hpp"
#include "v6drift/sim.hpp"

using namespace v6drift;
using namespace v6drift::test;

TEST_SUITE_BEGIN("schedule");

namespace {

std::vector<Ipv6Addr128> numbered_targets(size_t n) {
    std::vector<Ipv6Addr128> targets;
    targets.reserve(n);
    for (size_t i = 0; i < n; ++i)
        targets.push_back(Ipv6Addr128::from_halves(0x20010db800000000ULL, i));
    return targets;
}

}  // namespace

TEST_CASE("schedule is a permutation of the input") {
    auto targets = numbered_targets(10);
    VectorTargetSource source(targets);
    PermutedSchedule schedule(source, 99);
    std::vector<Ipv6Addr128> seen;
    for (ProbeSpec spec : schedule)
        seen.push_back(spec.target);
    REQUIRE(seen.size() == 10);
    auto sorted_input = targets;
    std::sort(sorted_input.begin(), sorted_input.end());
    std::sort(seen.begin(), seen.end());
    CHECK(seen == sorted_input);
}

TEST_CASE("identical inputs give identical orders, different seeds differ") {
    auto targets = numbered_targets(1000);
    VectorTargetSource source(targets);
    PermutedSchedule a(source, 1), b(source, 1), c(source, 2);
    bool differs = false;
    for (uint64_t i = 0; i < 1000; ++i) {
        REQUIRE(a.target_at(i) == b.target_at(i));
        differs |= a.target_at(i) != c.target_at(i);
    }
    CHECK(differs);
}

TEST_CASE("empty target list is an error") {
    VectorTargetSource source(std::vector<Ipv6Addr128>{});
    CHECK_THROWS_AS(PermutedSchedule(source, 1), std::invalid_argument);
}

TEST_CASE("rank_of inverts at") {
    for (uint64_t n : {1ull, 2ull, 7ull, 256ull, 1000ull, 65536ull}) {
        IndexPermutation perm(n, 77);
        uint64_t check_every = std::max<uint64_t>(1, n / 512);
        for (uint64_t i = 0; i < n; i += check_every) {
            REQUIRE(perm.at(perm.rank_of(i)) == i);
            REQUIRE(perm.rank_of(perm.at(i)) == i);
        }
    }
}

TEST_CASE("permutation covers every index exactly once") {
    for (uint64_t n : {1ull, 5ull, 64ull, 1000ull, 4097ull}) {
        IndexPermutation perm(n, 13);
        std::vector<bool> seen(n, false);
        for (uint64_t i = 0; i < n; ++i) {
            uint64_t v = perm.at(i);
            REQUIRE(v < n);
            REQUIRE(!seen[v]);
            seen[v] = true;
        }
    }
}

TEST_CASE("first scheduled element is uniform across seeds") {
    // n = 10^6; 2048 seeds; 64 equal bins over the index space. alpha = 0.01.
    const uint64_t n = 1000000;
    const int seeds = 2048;
    std::vector<uint64_t> counts(64, 0);
    for (int s = 0; s < seeds; ++s) {
        IndexPermutation perm(n, uint64_t(s) * 0x9e3779b97f4a7c15ULL + 5);
        ++counts[perm.at(0) * 64 / n];
    }
    double stat = chi_square_stat(counts, double(seeds) / 64.0);
    CHECK(stat < chi_square_critical(63));
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("engine");

namespace {

// Always answers with a fixed EUI-64 responder.
class FixedTransport : public Transport {
public:
    ProbeResult probe(Ipv6Addr128) override {
        return {addr("2001:db8::3a10:d5ff:feaa:bbcc"), ResponseClass::AddrUnreachable};
    }
};

// Throws on every third probe.
class FlakyTransport : public Transport {
public:
    ProbeResult probe(Ipv6Addr128 target) override {
        if (++calls_ % 3 == 0)
            throw std::runtime_error("socket gremlin");
        return {target, ResponseClass::EchoReply};
    }

private:
    int calls_ = 0;
};

}  // namespace

TEST_CASE("campaign emits one observation per probe at the configured pace") {
    auto targets = numbered_targets(1000);
    VectorTargetSource source(targets);
    PermutedSchedule schedule(source, 5);
    FixedTransport transport;
    CampaignOptions options;
    options.run = "r0";
    options.rate = 10000;
    std::vector<Observation> observations;
    CampaignStats stats = run_campaign(schedule, transport, options,
                                       [&](const Observation& o) { observations.push_back(o); });
    CHECK(stats.observations == 1000);
    REQUIRE(observations.size() == 1000);
    // ~0.1 s of simulated time for 1000 probes at 10k pps.
    CHECK(stats.last_ts - stats.first_ts == doctest::Approx(999.0 / 10000.0).epsilon(0.01));
    for (size_t i = 1; i < observations.size(); ++i)
        REQUIRE(observations[i].ts >= observations[i - 1].ts);
    // Stream is loss-free: targets seen == schedule.
    REQUIRE(observations[0].run == "r0");
}

TEST_CASE("send rate stays within 5% of the cap over any 1s window") {
    auto targets = numbered_targets(5000);
    VectorTargetSource source(targets);
    PermutedSchedule schedule(source, 6);
    FixedTransport transport;
    CampaignOptions options;
    options.run = "r";
    options.rate = 1000;
    std::vector<double> send_times;
    run_campaign(schedule, transport, options,
                 [&](const Observation& o) { send_times.push_back(o.ts); });
    REQUIRE(send_times.size() == 5000);
    size_t lo = 0;
    size_t max_in_window = 0;
    for (size_t hi = 0; hi < send_times.size(); ++hi) {
        while (send_times[hi] - send_times[lo] >= 1.0)
            ++lo;
        max_in_window = std::max(max_in_window, hi - lo + 1);
    }
    CHECK(double(max_in_window) <= 1000.0 * 1.05);
}

TEST_CASE("transport failures become silent observations, never aborts") {
    auto targets = numbered_targets(99);
    VectorTargetSource source(targets);
    PermutedSchedule schedule(source, 7);
    FlakyTransport transport;
    CampaignOptions options;
    options.run = "r";
    options.rate = 1e6;
    size_t silent = 0, total = 0;
    CampaignStats stats = run_campaign(schedule, transport, options, [&](const Observation& o) {
        ++total;
        if (o.cls == ResponseClass::Silent) {
            ++silent;
            CHECK(!o.responder);
        }
    });
    CHECK(total == 99);
    CHECK(stats.transport_errors == 33);
    CHECK(silent == 33);
}

TEST_CASE("concurrent issue preserves schedule order and results") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 200, 9);
    SimWorld world(std::move(config));
    SimTransport transport(world);
    GridTargetSource source({pfx("2001:db8:10::/48")}, 56, 3, 0xabc);

    auto run_with = [&](int in_flight) {
        PermutedSchedule schedule(source, 21);
        CampaignOptions options;
        options.run = "r";
        options.rate = 1e9;
        options.in_flight = in_flight;
        std::vector<Observation> out;
        run_campaign(schedule, transport, options,
                     [&](const Observation& o) { out.push_back(o); });
        return out;
    };
    auto sequential = run_with(1);
    auto parallel = run_with(16);
    REQUIRE(sequential.size() == parallel.size());
    CHECK(sequential == parallel);
}

TEST_CASE("replayed logs reproduce a byte-identical observation stream") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 100, 10);
    SimWorld world(std::move(config));
    SimTransport live(world);
    GridTargetSource source({pfx("2001:db8:10::/48")}, 56, 4, 0xdef);
    PermutedSchedule schedule(source, 33);
    CampaignOptions options;
    options.run = "replayed";
    options.rate = 12345;

    TempDir dir("replay");
    std::string original_path = dir.path() + "/a.jsonl";
    {
        ObservationLogWriter writer(original_path);
        run_campaign(schedule, live, options, [&](const Observation& o) { writer.write(o); });
    }
    ReplayTransport replay(original_path);
    std::string replayed_path = dir.path() + "/b.jsonl";
    {
        ObservationLogWriter writer(replayed_path);
        run_campaign(schedule, replay, options, [&](const Observation& o) { writer.write(o); });
    }
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string a = slurp(original_path), b = slurp(replayed_path);
    CHECK(a == b);
    CHECK(!a.empty());
    CHECK(replay.unmatched() == 0);
}

TEST_CASE("expected probes to hit") {
    CHECK(expected_probes_to_hit(46, 64) == doctest::Approx(131072.5));  // ~2^17
    CHECK(expected_probes_to_hit(56, 56) == doctest::Approx(1.0));       // pool == allocation
    CHECK(expected_probes_to_hit(48, 56) == doctest::Approx(128.5));
    CHECK_THROWS(expected_probes_to_hit(56, 48));
    CHECK_THROWS(expected_probes_to_hit(46, 65));
}

TEST_CASE("monte-carlo probes-to-hit matches the closed form within 2%") {
    // Literal simulation at /56-in-/48 scale: uniform device, permuted sweep,
    // count probes until hit.
    std::mt19937_64 rng(71);
    const uint64_t blocks = 256;
    const int trials = 10000;
    double total = 0;
    for (int t = 0; t < trials; ++t) {
        uint64_t device = rng() % blocks;
        IndexPermutation perm(blocks, rng());
        uint64_t probes = 0;
        for (uint64_t rank = 0; rank < blocks; ++rank) {
            ++probes;
            if (perm.at(rank) == device)
                break;
        }
        total += double(probes);
        // The inverse gives the same count without the walk.
        REQUIRE(perm.rank_of(device) + 1 == probes);
    }
    double mean = total / trials;
    double expected = expected_probes_to_hit(48, 56);
    CHECK(mean > expected * 0.98);
    CHECK(mean < expected * 1.02);
}

TEST_SUITE_END();
