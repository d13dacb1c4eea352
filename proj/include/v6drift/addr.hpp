// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_ADDR_HPP
#define V6DRIFT_ADDR_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace v6drift {

using uint128 = unsigned __int128;

inline constexpr uint128 make_u128(uint64_t hi, uint64_t lo) {
    return (static_cast<uint128>(hi) << 64) | lo;
}

/// Number of bits needed to represent x (0 for x == 0).
inline constexpr int bit_width_u128(uint128 x) {
    uint64_t hi = static_cast<uint64_t>(x >> 64);
    uint64_t lo = static_cast<uint64_t>(x);
    if (hi)
        return 128 - __builtin_clzll(hi);
    return lo ? 64 - __builtin_clzll(lo) : 0;
}

/// splitmix64 finalizer; the seed mixer used throughout for deterministic draws.
inline constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// A full 128-bit IPv6 address held as one unsigned integer, most significant
/// bit first. All arithmetic works on the integer; text appears only at the
/// edges (parse/format).
struct Ipv6Addr128 {
    uint128 value = 0;

    constexpr Ipv6Addr128() = default;
    constexpr explicit Ipv6Addr128(uint128 v) : value(v) {}
    static constexpr Ipv6Addr128 from_halves(uint64_t hi, uint64_t lo) {
        return Ipv6Addr128(make_u128(hi, lo));
    }

    constexpr uint64_t high64() const { return static_cast<uint64_t>(value >> 64); }
    constexpr uint64_t low64() const { return static_cast<uint64_t>(value); }
    constexpr uint8_t byte(int i) const {  // i in [0,16), 0 = most significant
        return static_cast<uint8_t>(value >> (8 * (15 - i)));
    }

    /// Accepts any RFC 4291 text form (::, uppercase, embedded dotted quad).
    static std::optional<Ipv6Addr128> parse(std::string_view text);
    /// Canonical RFC 5952 form: lowercase, zero-run compression.
    std::string str() const;

    friend constexpr bool operator==(Ipv6Addr128 a, Ipv6Addr128 b) { return a.value == b.value; }
    friend constexpr bool operator!=(Ipv6Addr128 a, Ipv6Addr128 b) { return a.value != b.value; }
    friend constexpr bool operator<(Ipv6Addr128 a, Ipv6Addr128 b) { return a.value < b.value; }
};

/// CIDR prefix. The base always has its host bits (below 128-length) zeroed.
struct Ipv6Prefix {
    Ipv6Addr128 base;
    int length = 0;  // 0..128

    Ipv6Prefix() = default;
    /// Zeroes host bits of `addr`.
    Ipv6Prefix(Ipv6Addr128 addr, int len);

    /// "2001:db8::/32"; non-canonical bases are normalized.
    static std::optional<Ipv6Prefix> parse(std::string_view text);
    std::string str() const;

    constexpr uint128 mask() const {
        if (length == 0)
            return 0;
        return ~uint128{0} << (128 - length);
    }
    constexpr bool contains(Ipv6Addr128 a) const {
        return (a.value & mask()) == base.value;
    }
    constexpr bool contains(const Ipv6Prefix& other) const {
        return other.length >= length && contains(other.base);
    }

    friend bool operator==(const Ipv6Prefix& a, const Ipv6Prefix& b) {
        return a.length == b.length && a.base == b.base;
    }
};

/// 48-bit IEEE MAC address.
struct MacAddr {
    std::array<uint8_t, 6> bytes{};

    static std::optional<MacAddr> parse(std::string_view text);  // aa:bb:cc:dd:ee:ff or '-'
    std::string str() const;

    std::array<uint8_t, 3> oui() const { return {bytes[0], bytes[1], bytes[2]}; }
    uint32_t oui24() const {
        return (uint32_t(bytes[0]) << 16) | (uint32_t(bytes[1]) << 8) | bytes[2];
    }
    /// Universal/local bit: bit 1 of the first octet.
    bool local_bit() const { return bytes[0] & 0x02; }

    friend bool operator==(const MacAddr& a, const MacAddr& b) { return a.bytes == b.bytes; }
    friend bool operator<(const MacAddr& a, const MacAddr& b) { return a.bytes < b.bytes; }
};

/// The low 64 bits of an IPv6 address.
struct Iid64 {
    uint64_t value = 0;

    constexpr Iid64() = default;
    constexpr explicit Iid64(uint64_t v) : value(v) {}
    static constexpr Iid64 of(Ipv6Addr128 a) { return Iid64(a.low64()); }

    /// EUI-64 derived IIDs carry ff:fe as their 4th and 5th bytes.
    constexpr bool is_eui64() const {
        return ((value >> 32) & 0xff) == 0xff && ((value >> 24) & 0xff) == 0xfe;
    }
    std::string str() const;  // four hex groups, e.g. 3a10:d5ff:feaa:bbcc

    friend constexpr bool operator==(Iid64 a, Iid64 b) { return a.value == b.value; }
    friend constexpr bool operator<(Iid64 a, Iid64 b) { return a.value < b.value; }
};

/// Flip the U/L bit, insert ff:fe between the third and fourth MAC octets.
constexpr Iid64 mac_to_eui64_iid(const MacAddr& mac) {
    uint64_t v = 0;
    v |= uint64_t(mac.bytes[0] ^ 0x02) << 56;
    v |= uint64_t(mac.bytes[1]) << 48;
    v |= uint64_t(mac.bytes[2]) << 40;
    v |= uint64_t(0xff) << 32;
    v |= uint64_t(0xfe) << 24;
    v |= uint64_t(mac.bytes[3]) << 16;
    v |= uint64_t(mac.bytes[4]) << 8;
    v |= uint64_t(mac.bytes[5]);
    return Iid64(v);
}

/// Inverse of mac_to_eui64_iid; empty for non-EUI-64 IIDs (privacy addresses).
constexpr std::optional<MacAddr> eui64_iid_to_mac(Iid64 iid) {
    if (!iid.is_eui64())
        return std::nullopt;
    MacAddr mac;
    mac.bytes[0] = uint8_t(iid.value >> 56) ^ 0x02;
    mac.bytes[1] = uint8_t(iid.value >> 48);
    mac.bytes[2] = uint8_t(iid.value >> 40);
    mac.bytes[3] = uint8_t(iid.value >> 16);
    mac.bytes[4] = uint8_t(iid.value >> 8);
    mac.bytes[5] = uint8_t(iid.value);
    return mac;
}

/// Deterministic uniform draw of an address inside `prefix`: all host bits are
/// randomized from the seed, prefix bits are kept.
Ipv6Addr128 random_target_in(const Ipv6Prefix& prefix, uint64_t rng_seed);

/// ceil(log2(|high64(a) - high64(b)| + 1)): the bit span needed to cover the
/// /64 distance between two addresses. 0 when the high halves are equal.
inline constexpr int prefix_distance_bits(Ipv6Addr128 a, Ipv6Addr128 b) {
    uint64_t ha = a.high64(), hb = b.high64();
    uint64_t diff = ha > hb ? ha - hb : hb - ha;
    return diff == 0 ? 0 : 64 - __builtin_clzll(diff);
}

struct U128Hash {
    size_t operator()(uint128 v) const {
        return mix64(static_cast<uint64_t>(v >> 64) * 0x9e3779b97f4a7c15ULL ^
                     static_cast<uint64_t>(v));
    }
};
struct AddrHash {
    size_t operator()(Ipv6Addr128 a) const { return U128Hash{}(a.value); }
};
struct IidHash {
    size_t operator()(Iid64 i) const { return mix64(i.value); }
};

}  // namespace v6drift

#endif
