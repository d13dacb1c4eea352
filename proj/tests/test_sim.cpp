// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "test_support.hpp"
#include "v6drift/sim.hpp"

using namespace v6drift;
using namespace v6drift::test;

TEST_SUITE_BEGIN("sim");

namespace {

// All current allocations, as (base high64, alloc_len) pairs per active CPE.
std::vector<std::pair<uint64_t, int>> allocations(const SimWorld& world) {
    std::vector<std::pair<uint64_t, int>> out;
    for (size_t i = 0; i < world.cpe_count(); ++i) {
        auto view = world.cpe(i);
        if (view.active)
            out.push_back({view.allocation->base.high64(), view.allocation->length});
    }
    return out;
}

bool pairwise_disjoint(const SimWorld& world) {
    std::vector<Ipv6Prefix> prefixes;
    for (size_t i = 0; i < world.cpe_count(); ++i) {
        auto view = world.cpe(i);
        if (view.active)
            prefixes.push_back(*view.allocation);
    }
    for (size_t i = 0; i < prefixes.size(); ++i)
        for (size_t j = i + 1; j < prefixes.size(); ++j)
            if (prefixes[i].contains(prefixes[j]) || prefixes[j].contains(prefixes[i]))
                return false;
    return true;
}

}  // namespace

TEST_CASE("exact-fit pool assigns every block disjointly") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 256, 3);
    SimWorld world(std::move(config));
    auto allocs = allocations(world);
    REQUIRE(allocs.size() == 256);
    std::set<uint64_t> bases;
    for (auto [base, len] : allocs) {
        CHECK(len == 56);
        bases.insert(base);
    }
    CHECK(bases.size() == 256);  // pigeonhole: all 256 /56 blocks taken
    CHECK(pairwise_disjoint(world));
}

TEST_CASE("overfull pool is a configuration error naming the pool") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 257, 3);
    CHECK_THROWS_WITH_AS(SimWorld(std::move(config)),
                         doctest::Contains("2001:db8:10::/48"), std::runtime_error);
}

TEST_CASE("empty world stays silent") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 0, 3);
    SimWorld world(std::move(config));
    CHECK(world.cpe_count() == 0);
    auto result = world.probe(addr("2001:db8:10:1100::1"));
    CHECK(result.cls == ResponseClass::Silent);
    CHECK(!result.responder);
}

TEST_CASE("initial placement is uniform across seeds") {
    // 1 CPE among 16 slots; 1000 seeded builds; alpha = 0.01.
    std::vector<uint64_t> counts(16, 0);
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/60", 64,
                                        {RotationKind::None, 0, 1}, 1, seed);
        SimWorld world(std::move(config));
        auto allocs = allocations(world);
        REQUIRE(allocs.size() == 1);
        uint64_t slot = allocs[0].first - pfx("2001:db8:10::/60").base.high64();
        REQUIRE(slot < 16);
        ++counts[slot];
    }
    CHECK(chi_square_stat(counts, 1000.0 / 16.0) < chi_square_critical(15));
}

TEST_CASE("probe semantics inside an allocation") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 64, 5);
    SimWorld world(std::move(config));
    auto view = world.cpe(0);
    REQUIRE(view.active);
    Ipv6Prefix alloc = *view.allocation;
    auto expected_iid = mac_to_eui64_iid(view.mac);

    SUBCASE("responder iid is the eui-64 of the mac") {
        auto result = world.probe(random_target_in(alloc, 1));
        REQUIRE(result.responder);
        CHECK(result.cls == ResponseClass::AddrUnreachable);
        CHECK(Iid64::of(*result.responder) == expected_iid);
    }

    SUBCASE("one probe per /64 of the /56 yields 256 identical responders") {
        std::set<uint128> responders;
        for (uint64_t i = 0; i < 256; ++i) {
            Ipv6Addr128 target =
                Ipv6Addr128::from_halves(alloc.base.high64() + i, mix64(i) | 1);
            auto result = world.probe(target);
            REQUIRE(result.responder);
            responders.insert(result.responder->value);
        }
        CHECK(responders.size() == 1);
        // The WAN address sits in the allocation's first /64.
        Ipv6Addr128 wan(*responders.begin());
        CHECK(wan.high64() == alloc.base.high64());
    }

    SUBCASE("probing the wan address itself echoes") {
        Ipv6Addr128 wan = Ipv6Addr128::from_halves(alloc.base.high64(), expected_iid.value);
        auto result = world.probe(wan);
        CHECK(result.cls == ResponseClass::EchoReply);
        REQUIRE(result.responder);
        CHECK(*result.responder == wan);
    }

    SUBCASE("unallocated space is silent by default") {
        // A /56 slot with no CPE exists somewhere: probe all slots, expect
        // exactly 64 responding.
        std::set<uint128> responders;
        int silent = 0;
        for (uint64_t slot = 0; slot < 256; ++slot) {
            Ipv6Addr128 target = Ipv6Addr128::from_halves(
                pfx("2001:db8:10::/48").base.high64() + (slot << 8), 0x1234);
            auto result = world.probe(target);
            if (result.cls == ResponseClass::Silent)
                ++silent;
            else
                responders.insert(result.responder->value);
        }
        CHECK(responders.size() == 64);
        CHECK(silent == 256 - 64);
    }
}

TEST_CASE("drop probability one silences a cpe; silent-drop policy too") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 0, 5);
    CpeSpec cpe;
    cpe.mac = *MacAddr::parse("38:10:d5:00:00:01");
    cpe.drop_prob = 1.0;
    config.ases[0].fleet.push_back(cpe);
    CpeSpec muted;
    muted.mac = *MacAddr::parse("38:10:d5:00:00:02");
    muted.error_class = std::nullopt;  // silent drop
    config.ases[0].fleet.push_back(muted);
    SimWorld world(std::move(config));
    for (size_t i = 0; i < 2; ++i) {
        auto view = world.cpe(i);
        for (int t = 0; t < 50; ++t) {
            auto result = world.probe(random_target_in(*view.allocation, uint64_t(t)));
            CHECK(result.cls == ResponseClass::Silent);
        }
    }
}

TEST_CASE("provider no-route policy answers for unallocated space") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 1, 5);
    config.ases[0].unallocated = UnallocatedResponse::NoRoute;
    SimWorld world(std::move(config));
    // Inside the BGP prefix but outside every pool.
    auto result = world.probe(addr("2001:db8:ffff::1"));
    CHECK(result.cls == ResponseClass::NoRoute);
    REQUIRE(result.responder);
    CHECK(!Iid64::of(*result.responder).is_eui64());
    // Outside every AS: silent.
    CHECK(world.probe(addr("2a00::1")).cls == ResponseClass::Silent);
}

TEST_CASE("daily increment wraps modulo the pool span") {
    // 4-slot pool (/62 of /64s), step one /64.
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/62", 64,
                                    {RotationKind::DailyIncrement, 1, 1}, 1, 6);
    SimWorld world(std::move(config));
    uint64_t pool_base = pfx("2001:db8:10::/62").base.high64();
    uint64_t slot = allocations(world)[0].first - pool_base;
    for (int day = 1; day <= 8; ++day) {
        world.advance_day();
        uint64_t expected = (slot + uint64_t(day)) % 4;
        REQUIRE(allocations(world)[0].first - pool_base == expected);
    }
    CHECK(world.rotation_collisions() == 0);
}

TEST_CASE("schedule none never moves anyone") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::None, 0, 1}, 100, 7);
    SimWorld world(std::move(config));
    auto before = allocations(world);
    for (int d = 0; d < 5; ++d)
        world.advance_day();
    CHECK(allocations(world) == before);
}

TEST_CASE("periodic uniform fires only on period days") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::PeriodicUniform, 0, 3}, 50, 8);
    SimWorld world(std::move(config));
    auto day0 = allocations(world);
    world.advance_day();  // day 1: no fire
    CHECK(allocations(world) == day0);
    world.advance_day();  // day 2: no fire
    CHECK(allocations(world) == day0);
    world.advance_day();  // day 3: fires
    CHECK(allocations(world) != day0);
    CHECK(pairwise_disjoint(world));
}

TEST_CASE("daily uniform range statistic approaches the pool span") {
    // One CPE re-placed uniformly among 256 slots for 7 days: compare the
    // mean observed /64 range against an independent monte-carlo oracle.
    const int kWorlds = 200;
    double sim_mean = 0;
    for (int w = 0; w < kWorlds; ++w) {
        SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                        {RotationKind::DailyUniform, 0, 1}, 1, uint64_t(w));
        SimWorld world(std::move(config));
        uint64_t lo = ~uint64_t{0}, hi = 0;
        for (int d = 0; d <= 7; ++d) {
            uint64_t base = allocations(world)[0].first;
            lo = std::min(lo, base);
            hi = std::max(hi, base);
            if (d < 7)
                world.advance_day();
        }
        sim_mean += double(hi - lo);
    }
    sim_mean /= kWorlds;

    std::mt19937_64 rng(99);
    double oracle_mean = 0;
    const int kOracleTrials = 20000;
    for (int t = 0; t < kOracleTrials; ++t) {
        uint64_t lo = ~uint64_t{0}, hi = 0;
        for (int d = 0; d < 8; ++d) {
            uint64_t slot = (rng() % 256) << 8;  // /56 slots in /64 units
            lo = std::min(lo, slot);
            hi = std::max(hi, slot);
        }
        oracle_mean += double(hi - lo);
    }
    oracle_mean /= kOracleTrials;
    // Means differ by sampling noise only: the range std is ~24*256/64,
    // se(sim_mean) ~ 24*256/sqrt(200) ~ 430. Allow 4 sigma.
    CHECK(std::fabs(sim_mean - oracle_mean) < 1800.0);
    // And the range is a large fraction of the 65280-wide span.
    CHECK(sim_mean > 0.6 * 65280.0);
}

TEST_CASE("disjoint allocations after every advance over random configs") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        int pool_len = 48 + int(rng() % 9);        // /48../56
        int alloc_len = pool_len + int(rng() % std::min(9, 65 - pool_len));
        RotationSchedule sched;
        switch (rng() % 4) {
            case 0: sched = {RotationKind::None, 0, 1}; break;
            case 1:
                sched = {RotationKind::DailyIncrement,
                         (uint64_t{1} << (64 - alloc_len)) * (1 + rng() % 3), 1};
                break;
            case 2: sched = {RotationKind::DailyUniform, 0, 1}; break;
            default: sched = {RotationKind::PeriodicUniform, 0, int(1 + rng() % 3)}; break;
        }
        uint64_t span = uint64_t{1} << (alloc_len - pool_len);
        int count = int(1 + rng() % std::min<uint64_t>(span, 48));
        SimConfig config = one_as_world(64496, "2001:db8::/32",
                                        ("2001:db8:10::/" + std::to_string(pool_len)).c_str(),
                                        alloc_len, sched, count, rng());
        // Churn: a joiner and a leaver.
        if (count >= 2) {
            config.ases[0].fleet.clear();
            FleetGenSpec gen;
            gen.count = count;
            gen.oui_mix.push_back({{0x38, 0x10, 0xd5}, 1.0});
            config.ases[0].fleet_gen = {gen};
            config.finalize();
            config.ases[0].fleet[0].join_day = 1;
            config.ases[0].fleet[1].leave_day = 2;
        }
        SimWorld world(std::move(config));
        REQUIRE(pairwise_disjoint(world));
        for (int d = 0; d < 3; ++d) {
            world.advance_day();
            REQUIRE(pairwise_disjoint(world));
            for (size_t i = 0; i < world.cpe_count(); ++i) {
                auto view = world.cpe(i);
                if (view.active)
                    REQUIRE(pfx("2001:db8:10::/48").contains(view.allocation->base));
            }
        }
    }
}

TEST_CASE("eui iid constant across rotation; privacy iid fresh per prefix") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::DailyUniform, 0, 1}, 8, 12);
    config.finalize();
    config.ases[0].fleet[1].iid_mode = IidMode::Privacy;
    SimWorld world(std::move(config));

    Iid64 eui_iid = world.cpe(0).current_iid;
    CHECK(eui_iid == mac_to_eui64_iid(world.cpe(0).mac));
    std::set<uint64_t> seen_privacy_iids;
    uint64_t prev_base = world.cpe(1).allocation->base.high64();
    seen_privacy_iids.insert(world.cpe(1).current_iid.value);
    for (int d = 0; d < 30; ++d) {
        world.advance_day();
        CHECK(world.cpe(0).current_iid == eui_iid);  // never changes
        auto view = world.cpe(1);
        CHECK(!view.current_iid.is_eui64());
        uint64_t base = view.allocation->base.high64();
        if (base != prev_base) {
            // Fresh draw on every prefix change, never repeating in the run.
            CHECK(seen_privacy_iids.insert(view.current_iid.value).second);
        } else {
            CHECK(seen_privacy_iids.count(view.current_iid.value));
        }
        prev_base = base;
    }
    CHECK(seen_privacy_iids.size() >= 25);  // daily uniform rarely keeps a slot
}

TEST_CASE("history records every assignment") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/48", 56,
                                    {RotationKind::DailyUniform, 0, 1}, 40, 19);
    SimWorld world(std::move(config));
    CHECK(world.history().size() == 40);  // one event per initial placement
    for (const AllocationEvent& event : world.history()) {
        CHECK(event.day == 0);
        CHECK(event.asn == 64496);
        CHECK(event.alloc_len == 56);
    }
    world.advance_day();
    world.advance_day();
    CHECK(world.history().size() == 120);
    // The last event per CPE matches its current allocation.
    std::map<uint32_t, uint64_t> last;
    for (const AllocationEvent& event : world.history())
        last[event.cpe] = event.alloc_base_high64;
    for (size_t i = 0; i < world.cpe_count(); ++i) {
        auto view = world.cpe(i);
        REQUIRE(view.active);
        CHECK(last.at(uint32_t(i)) == view.allocation->base.high64());
    }
}

TEST_CASE("world is a pure function of config, seed and query sequence") {
    auto make = [] {
        SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:10::/46", 56,
                                        {RotationKind::DailyUniform, 0, 1}, 120, 77);
        return SimWorld(std::move(config));
    };
    SimWorld a = make(), b = make();
    std::mt19937_64 rng(1);
    for (int d = 0; d < 4; ++d) {
        for (int q = 0; q < 2000; ++q) {
            Ipv6Addr128 target = random_target_in(pfx("2001:db8:10::/46"), rng());
            auto ra = a.probe(target);
            auto rb = b.probe(target);
            REQUIRE(ra.cls == rb.cls);
            REQUIRE(ra.responder == rb.responder);
        }
        a.advance_day();
        b.advance_day();
    }
}

TEST_CASE("hourly mode lands all moves between midnight and 0600") {
    auto make = [] {
        return one_as_world(64496, "2001:db8::/32", "2001:db8:10::/46", 56,
                            {RotationKind::DailyUniform, 0, 1}, 200, 21);
    };
    SimWorld daily(make());
    SimWorld hourly(make());
    hourly.set_hourly(true);
    CHECK_THROWS(hourly.advance_day());

    int changes_by_hour[24] = {0};
    int compared = 0;
    for (int tick = 0; tick < 24 * 3 + 6; ++tick) {
        auto before = allocations(hourly);
        hourly.advance_hour();
        if (allocations(hourly) != before)
            ++changes_by_hour[hourly.hour()];
        REQUIRE(pairwise_disjoint(hourly));
        // By 06:00 the day's staged moves have all landed: the hourly world
        // must agree with an atomic day tick.
        if (hourly.hour() == 6 && hourly.day() > compared) {
            daily.advance_day();
            CHECK(allocations(hourly) == allocations(daily));
            ++compared;
        }
    }
    CHECK(compared == 3);
    int moved_early = 0;
    for (int h = 0; h < 6; ++h)
        moved_early += changes_by_hour[h];
    CHECK(moved_early > 0);
    for (int h = 6; h < 24; ++h)
        CHECK(changes_by_hour[h] == 0);
}

TEST_CASE("pathology injection") {
    SimConfig base;
    base.seed = 5;
    for (int i = 0; i < 12; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "2001:%x::/32", 0xd00 + i);
        AsConfig as;
        as.asn = 64500 + uint32_t(i);
        as.country = i % 2 ? "DE" : "BR";
        as.bgp_prefix = pfx(buf);
        PoolConfig pool;
        std::snprintf(buf, sizeof(buf), "2001:%x:10::/48", 0xd00 + i);
        pool.prefix = pfx(buf);
        pool.alloc_len = 56;
        as.pools.push_back(pool);
        FleetGenSpec gen;
        gen.count = 3;
        gen.oui_mix.push_back({{0x38, 0x10, 0xd5}, 1.0});
        as.fleet_gen.push_back(gen);
        base.ases.push_back(as);
    }

    SUBCASE("empty spec leaves the config unchanged") {
        SimConfig copy = base;
        copy.finalize();
        SimConfig injected = inject_pathologies(copy, PathologySpec{});
        CHECK(injected.to_json_text() == copy.to_json_text());
    }

    SUBCASE("duplicate mac lands in the requested number of ases") {
        PathologySpec spec;
        spec.duplicate_mac_as_count = 12;
        SimConfig injected = inject_pathologies(base, spec);
        int hits = 0;
        for (const auto& as : injected.ases)
            for (const auto& cpe : as.fleet)
                if (cpe.mac == MacAddr{})
                    ++hits;
        CHECK(hits == 12);
        SimWorld world(std::move(injected));  // still buildable
        CHECK(world.cpe_count() == 12 * 3 + 12);
    }

    SUBCASE("more duplicates than ases is an error") {
        PathologySpec spec;
        spec.duplicate_mac_as_count = 13;
        CHECK_THROWS(inject_pathologies(base, spec));
    }

    SUBCASE("provider changer moves pools on the requested day") {
        PathologySpec spec;
        spec.provider_changer_count = 1;
        spec.change_day = 5;
        SimConfig injected = inject_pathologies(base, spec);
        const CpeSpec* changer = nullptr;
        for (const auto& cpe : injected.ases[0].fleet)
            if (cpe.provider_change)
                changer = &cpe;
        REQUIRE(changer);
        CHECK(changer->provider_change->day == 5);
        CHECK(changer->provider_change->to_asn == injected.ases[1].asn);

        SimWorld world(std::move(injected));
        MacAddr mac = changer->mac;
        auto find_asn = [&]() -> uint32_t {
            for (size_t i = 0; i < world.cpe_count(); ++i) {
                auto view = world.cpe(i);
                if (view.mac == mac && view.active)
                    return view.asn;
            }
            return 0;
        };
        CHECK(find_asn() == 64500);
        for (int d = 1; d <= 4; ++d) {
            world.advance_day();
            CHECK(find_asn() == 64500);
        }
        world.advance_day();  // day 5
        CHECK(find_asn() == 64501);
        world.advance_day();
        CHECK(find_asn() == 64501);  // never returns
    }
}

TEST_CASE("config json round trip and validation errors") {
    SimConfig config = one_as_world(64496, "2001:db8::/32", "2001:db8:100::/46", 56,
                                    {RotationKind::DailyIncrement, 256, 1}, 10, 3);
    config.finalize();
    std::string text = config.to_json_text();
    SimConfig back = SimConfig::from_json_text(text);
    CHECK(back.to_json_text() == text);

    SUBCASE("pool outside the bgp prefix") {
        SimConfig bad = config;
        bad.ases[0].pools[0].prefix = pfx("2a00:100::/46");
        CHECK_THROWS(bad.finalize());
    }
    SUBCASE("alloc smaller than pool") {
        SimConfig bad = config;
        bad.ases[0].pools[0].alloc_len = 40;
        CHECK_THROWS(bad.finalize());
    }
    SUBCASE("increment step must align to allocation span") {
        SimConfig bad = config;
        bad.ases[0].pools[0].rotation.step_64s = 100;  // /56 allocs need multiples of 256
        CHECK_THROWS(bad.finalize());
    }
    SUBCASE("single-as document is accepted") {
        SimConfig single = SimConfig::from_json_text(R"({
            "seed": 9, "asn": 64496, "bgp_prefix": "2001:db8::/32",
            "pools": [{"prefix": "2001:db8:1::/48", "alloc_len": 64, "rotation": "none"}],
            "fleet": [{"mac": "38:10:d5:aa:bb:cc"}]
        })");
        CHECK(single.ases.size() == 1);
        CHECK(single.seed == 9);
        CHECK(single.ases[0].fleet.size() == 1);
    }
}

TEST_SUITE_END();
