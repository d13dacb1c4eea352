// SPDX-License-Identifier: Apache-2.0
#include "v6drift/addr.hpp"

#include <cstdio>
#include <vector>

namespace v6drift {

namespace {

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Parses a 16-bit hex group, advancing pos. Returns -1 on failure.
int parse_group(std::string_view s, size_t& pos) {
    int v = 0, digits = 0;
    while (pos < s.size() && digits < 4) {
        int h = hex_val(s[pos]);
        if (h < 0)
            break;
        v = (v << 4) | h;
        ++pos;
        ++digits;
    }
    return digits ? v : -1;
}

// Trailing dotted-quad ("::ffff:1.2.3.4"); returns the two 16-bit groups.
bool parse_v4_tail(std::string_view s, uint16_t out[2]) {
    unsigned o[4];
    size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        if (i > 0) {
            if (pos >= s.size() || s[pos] != '.')
                return false;
            ++pos;
        }
        unsigned v = 0;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && digits < 3) {
            v = v * 10 + unsigned(s[pos] - '0');
            ++pos;
            ++digits;
        }
        if (!digits || v > 255)
            return false;
        o[i] = v;
    }
    if (pos != s.size())
        return false;
    out[0] = uint16_t((o[0] << 8) | o[1]);
    out[1] = uint16_t((o[2] << 8) | o[3]);
    return true;
}

}  // namespace

std::optional<Ipv6Addr128> Ipv6Addr128::parse(std::string_view text) {
    if (text.empty())
        return std::nullopt;

    std::vector<uint16_t> head, tail;
    bool seen_gap = false;

    size_t pos = 0;
    if (text[0] == ':') {
        if (text.size() < 2 || text[1] != ':')
            return std::nullopt;
        seen_gap = true;
        pos = 2;
    }

    auto cur = [&]() -> std::vector<uint16_t>& { return seen_gap ? tail : head; };
    while (pos < text.size()) {
        // A dotted quad can only terminate the address: it applies when the
        // current group contains a '.' before any ':'.
        size_t next_colon = text.find(':', pos);
        size_t next_dot = text.find('.', pos);
        if (next_dot != std::string_view::npos &&
            (next_colon == std::string_view::npos || next_dot < next_colon)) {
            uint16_t v4[2];
            if (!parse_v4_tail(text.substr(pos), v4))
                return std::nullopt;
            cur().push_back(v4[0]);
            cur().push_back(v4[1]);
            pos = text.size();
            break;
        }
        int g = parse_group(text, pos);
        if (g < 0)
            return std::nullopt;
        cur().push_back(uint16_t(g));
        if (pos == text.size())
            break;
        if (text[pos] != ':')
            return std::nullopt;
        ++pos;
        if (pos < text.size() && text[pos] == ':') {
            if (seen_gap)
                return std::nullopt;  // at most one "::"
            seen_gap = true;
            ++pos;
        } else if (pos == text.size()) {
            return std::nullopt;  // trailing single ':'
        }
    }

    size_t total = head.size() + tail.size();
    if (seen_gap ? total >= 8 : total != 8)
        return std::nullopt;

    uint128 v = 0;
    for (uint16_t g : head)
        v = (v << 16) | g;
    v <<= 16 * (8 - total);
    for (uint16_t g : tail)
        v = (v << 16) | g;
    return Ipv6Addr128(v);
}

std::string Ipv6Addr128::str() const {
    uint16_t g[8];
    for (int i = 0; i < 8; ++i)
        g[i] = uint16_t(value >> (16 * (7 - i)));

    // Longest run of zero groups, length >= 2, leftmost wins ties.
    int best_start = -1, best_len = 0;
    for (int i = 0; i < 8;) {
        if (g[i] != 0) {
            ++i;
            continue;
        }
        int j = i;
        while (j < 8 && g[j] == 0)
            ++j;
        if (j - i > best_len) {
            best_start = i;
            best_len = j - i;
        }
        i = j;
    }
    if (best_len < 2)
        best_start = -1;

    std::string out;
    out.reserve(40);
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        if (i == best_start) {
            out += "::";
            i += best_len - 1;
            continue;
        }
        if (!out.empty() && out.back() != ':')
            out += ':';
        std::snprintf(buf, sizeof(buf), "%x", g[i]);
        out += buf;
    }
    return out;
}

Ipv6Prefix::Ipv6Prefix(Ipv6Addr128 addr, int len) : length(len) {
    base = Ipv6Addr128(addr.value & (len == 0 ? uint128{0} : ~uint128{0} << (128 - len)));
}

std::optional<Ipv6Prefix> Ipv6Prefix::parse(std::string_view text) {
    size_t slash = text.rfind('/');
    if (slash == std::string_view::npos)
        return std::nullopt;
    auto addr = Ipv6Addr128::parse(text.substr(0, slash));
    if (!addr)
        return std::nullopt;
    std::string_view lenpart = text.substr(slash + 1);
    if (lenpart.empty() || lenpart.size() > 3)
        return std::nullopt;
    int len = 0;
    for (char c : lenpart) {
        if (c < '0' || c > '9')
            return std::nullopt;
        len = len * 10 + (c - '0');
    }
    if (len > 128)
        return std::nullopt;
    return Ipv6Prefix(*addr, len);
}

std::string Ipv6Prefix::str() const {
    return base.str() + "/" + std::to_string(length);
}

std::optional<MacAddr> MacAddr::parse(std::string_view text) {
    MacAddr mac;
    size_t pos = 0;
    for (int i = 0; i < 6; ++i) {
        if (i > 0) {
            if (pos >= text.size() || (text[pos] != ':' && text[pos] != '-'))
                return std::nullopt;
            ++pos;
        }
        if (pos + 2 > text.size())
            return std::nullopt;
        int hi = hex_val(text[pos]), lo = hex_val(text[pos + 1]);
        if (hi < 0 || lo < 0)
            return std::nullopt;
        mac.bytes[i] = uint8_t((hi << 4) | lo);
        pos += 2;
    }
    if (pos != text.size())
        return std::nullopt;
    return mac;
}

std::string MacAddr::str() const {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", bytes[0], bytes[1],
                  bytes[2], bytes[3], bytes[4], bytes[5]);
    return buf;
}

std::string Iid64::str() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04x:%04x:%04x:%04x", unsigned(value >> 48),
                  unsigned((value >> 32) & 0xffff), unsigned((value >> 16) & 0xffff),
                  unsigned(value & 0xffff));
    return buf;
}

Ipv6Addr128 random_target_in(const Ipv6Prefix& prefix, uint64_t rng_seed) {
    uint128 host = make_u128(mix64(rng_seed), mix64(rng_seed ^ 0x6a09e667f3bcc909ULL));
    uint128 host_mask = ~prefix.mask();
    return Ipv6Addr128(prefix.base.value | (host & host_mask));
}

}  // namespace v6drift
