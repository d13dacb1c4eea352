// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"
#include "v6drift/addr.hpp"
#include "v6drift/as_table.hpp"

using namespace v6drift;
using namespace v6drift::test;

TEST_SUITE_BEGIN("addr");

TEST_CASE("eui64 iid from the documented example mac") {
    auto mac = MacAddr::parse("38:10:d5:aa:bb:cc");
    REQUIRE(mac);
    Iid64 iid = mac_to_eui64_iid(*mac);
    CHECK(iid.str() == "3a10:d5ff:feaa:bbcc");
    CHECK(iid.is_eui64());
    auto back = eui64_iid_to_mac(iid);
    REQUIRE(back);
    CHECK(back->str() == "38:10:d5:aa:bb:cc");
}

TEST_CASE("eui64 iid of the all-zero mac sets only u/l and ff:fe") {
    Iid64 iid = mac_to_eui64_iid(MacAddr{});
    CHECK(iid.str() == "0200:00ff:fe00:0000");
}

TEST_CASE("privacy-style iids are rejected by the inverse") {
    CHECK(!eui64_iid_to_mac(Iid64(0x1234'5678'9abc'def0ULL)));
    CHECK(!eui64_iid_to_mac(Iid64(0)));
    // ff:fe in the wrong position does not count.
    CHECK(!eui64_iid_to_mac(Iid64(0xfffe'0000'0000'0000ULL)));
}

TEST_CASE("mac <-> eui64 round trip on random macs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100000; ++i) {
        MacAddr mac = random_mac(rng);
        auto back = eui64_iid_to_mac(mac_to_eui64_iid(mac));
        REQUIRE(back);
        REQUIRE(*back == mac);
    }
}

TEST_CASE("address text round trip on canonical forms") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100000; ++i) {
        Ipv6Addr128 a = random_addr(rng);
        auto parsed = Ipv6Addr128::parse(a.str());
        REQUIRE(parsed);
        REQUIRE(*parsed == a);
    }
    // Sparse addresses exercise the zero-run compression.
    for (int i = 0; i < 20000; ++i) {
        uint64_t hi = (rng() % 4 == 0) ? rng() & 0xffff : 0;
        uint64_t lo = rng() & 0xff;
        Ipv6Addr128 a = Ipv6Addr128::from_halves(hi << (16 * (rng() % 4)), lo << (8 * (rng() % 8)));
        auto parsed = Ipv6Addr128::parse(a.str());
        REQUIRE(parsed);
        REQUIRE(*parsed == a);
    }
}

TEST_CASE("canonical text forms") {
    CHECK(Ipv6Addr128().str() == "::");
    CHECK(addr("::1").str() == "::1");
    CHECK(addr("1::").str() == "1::");
    CHECK(addr("2001:db8::1").str() == "2001:db8::1");
    CHECK(addr("2001:DB8::1").str() == "2001:db8::1");  // uppercase accepted
    // A single zero group is not compressed.
    CHECK(addr("2001:0:1:2:3:4:5:6").str() == "2001:0:1:2:3:4:5:6");
    // Leftmost of two equal zero runs wins.
    CHECK(addr("1:0:0:2:3:0:0:4").str() == "1::2:3:0:0:4");
    // The longer run wins regardless of position.
    CHECK(addr("1:0:0:2:0:0:0:4").str() == "1:0:0:2::4");
    // Embedded IPv4 notation parses, emits canonically.
    CHECK(addr("::ffff:192.0.2.1").str() == "::ffff:c000:201");
    CHECK(addr("64:ff9b::1.2.3.4").str() == "64:ff9b::102:304");
}

TEST_CASE("malformed addresses are rejected") {
    const char* bad[] = {"",       ":",          ":::",     "1:2:3",
                         "12345::", "2001:db8::1::2", "1:2:3:4:5:6:7:8:9",
                         "g::1",   "1:2:3:4:5:6:7:",  "::ffff:1.2.3.256",
                         "::ffff:1.2.3", "1.2.3.4"};
    for (const char* s : bad)
        CHECK_MESSAGE(!Ipv6Addr128::parse(s), s);
}

TEST_CASE("prefix parse normalizes host bits and formats back") {
    auto p = Ipv6Prefix::parse("2001:db8::1/32");
    REQUIRE(p);
    CHECK(p->base.str() == "2001:db8::");
    CHECK(p->str() == "2001:db8::/32");
    CHECK(!Ipv6Prefix::parse("2001:db8::/129"));
    CHECK(!Ipv6Prefix::parse("2001:db8::"));
    CHECK(!Ipv6Prefix::parse("2001:db8::/x"));

    Ipv6Prefix all = pfx("::/0");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i)
        CHECK(all.contains(random_addr(rng)));
    Ipv6Prefix host = pfx("2001:db8::5/128");
    CHECK(host.contains(addr("2001:db8::5")));
    CHECK(!host.contains(addr("2001:db8::4")));
}

TEST_CASE("random_target_in is deterministic and never escapes its prefix") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 10000; ++i) {
        Ipv6Addr128 base = random_addr(rng);
        int len = int(rng() % 129);
        Ipv6Prefix prefix(base, len);
        uint64_t seed = rng();
        Ipv6Addr128 t1 = random_target_in(prefix, seed);
        Ipv6Addr128 t2 = random_target_in(prefix, seed);
        REQUIRE(t1 == t2);
        REQUIRE(prefix.contains(t1));
    }
    // /64 prefix keeps its high half verbatim.
    Ipv6Prefix p64 = pfx("2001:db8:1:2::/64");
    CHECK(random_target_in(p64, 9).high64() == p64.base.high64());
}

TEST_CASE("random_target_in low bits pass a uniformity check") {
    // 10^4 draws from a /56; bucket the first IID byte. alpha = 0.01.
    Ipv6Prefix prefix = pfx("2001:db8:55:1200::/56");
    std::vector<uint64_t> counts(256, 0);
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        Ipv6Addr128 t = random_target_in(prefix, uint64_t(s));
        ++counts[t.byte(8)];
    }
    double stat = chi_square_stat(counts, double(draws) / 256.0);
    CHECK(stat < chi_square_critical(255));
}

TEST_CASE("prefix distance bit examples") {
    Ipv6Addr128 base = addr("2001:db8::");
    CHECK(prefix_distance_bits(base, base) == 0);
    CHECK(prefix_distance_bits(base, Ipv6Addr128(base.value | 0xffff)) == 0);  // low bits only
    Ipv6Addr128 plus255 = Ipv6Addr128::from_halves(base.high64() + 255, 0);
    CHECK(prefix_distance_bits(base, plus255) == 8);   // 2^8 /64s cover the range
    Ipv6Addr128 plus256 = Ipv6Addr128::from_halves(base.high64() + 256, 0);
    CHECK(prefix_distance_bits(base, plus256) == 9);
    CHECK(prefix_distance_bits(plus255, base) == 8);  // symmetric
}

TEST_CASE("prefix distance bits match a brute-force bit length") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100000; ++i) {
        int shift = int(rng() % 64);
        Ipv6Addr128 a = Ipv6Addr128::from_halves(rng() >> shift, rng());
        Ipv6Addr128 b = Ipv6Addr128::from_halves(rng() >> shift, rng());
        uint64_t hi_a = a.high64(), hi_b = b.high64();
        uint64_t diff = hi_a > hi_b ? hi_a - hi_b : hi_b - hi_a;
        // ceil(log2(diff + 1)) by doubling.
        int bits = 0;
        uint128 cover = 1;
        while (cover < uint128(diff) + 1) {
            cover <<= 1;
            ++bits;
        }
        REQUIRE(prefix_distance_bits(a, b) == bits);
    }
}

TEST_CASE("longest prefix match equals a linear scan") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        size_t n = 1 + rng() % 10000;
        std::vector<AsEntry> entries;
        PrefixToAsTable table;
        for (size_t i = 0; i < n; ++i) {
            Ipv6Prefix prefix(random_addr(rng), 16 + int(rng() % 49));
            AsEntry entry{prefix, uint32_t(rng() % 65000 + 1), "DE"};
            entries.push_back(entry);
            table.add(entry);
        }
        for (int q = 0; q < 1000; ++q) {
            // Half the queries land inside a random entry.
            Ipv6Addr128 target = (q % 2 == 0)
                                     ? random_addr(rng)
                                     : random_target_in(entries[rng() % n].prefix, rng());
            const AsEntry* best = nullptr;
            for (const AsEntry& e : entries) {
                if (e.prefix.contains(target) &&
                    (!best || e.prefix.length > best->prefix.length))
                    best = &e;
            }
            auto got = table.lookup(target);
            if (!best) {
                REQUIRE(!got);
            } else {
                REQUIRE(got);
                REQUIRE(got->prefix.length == best->prefix.length);
            }
        }
    }
}

TEST_CASE("as table csv loading") {
    std::stringstream csv;
    csv << "prefix,asn,country\n"
        << "2001:db8::/32,64496,DE\n"
        << "2001:db8:100::/46,64496,DE\n"
        << "bogus line\n"
        << "2001:db9::/32,64497,GR\n";
    PrefixToAsTable table = PrefixToAsTable::load_csv(csv);
    CHECK(table.size() == 3);
    CHECK(table.skipped_rows() == 1);
    auto hit = table.lookup(addr("2001:db8:100:1::1"));
    REQUIRE(hit);
    CHECK(hit->prefix.length == 46);  // most specific wins
    CHECK(hit->asn == 64496);
    CHECK(!table.lookup(addr("2002::1")));

    std::stringstream empty("prefix,asn,country\n");
    CHECK_THROWS(PrefixToAsTable::load_csv(empty));
}

TEST_SUITE_END();
