// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_AS_TABLE_HPP
#define V6DRIFT_AS_TABLE_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "v6drift/addr.hpp"

namespace v6drift {

struct AsEntry {
    Ipv6Prefix prefix;
    uint32_t asn = 0;
    std::string country;  // ISO 3166 alpha-2
};

/// Longest-prefix-match table mapping addresses to BGP origin entries.
/// Read-only after construction.
class PrefixToAsTable {
public:
    void add(AsEntry entry);

    /// Most specific covering entry, or empty when nothing matches.
    std::optional<AsEntry> lookup(Ipv6Addr128 addr) const;

    /// CSV with header `prefix,asn,country`. Throws std::runtime_error on
    /// unusable input; bad rows are skipped and counted.
    static PrefixToAsTable load_csv(std::istream& in);
    static PrefixToAsTable load_csv_file(const std::string& path);

    size_t size() const { return count_; }
    size_t skipped_rows() const { return skipped_; }

private:
    // One bucket per populated prefix length, scanned longest-first.
    struct LengthBucket {
        int length;
        std::unordered_map<uint128, AsEntry, U128Hash> entries;
    };
    std::vector<LengthBucket> buckets_;  // sorted by length descending
    size_t count_ = 0;
    size_t skipped_ = 0;
};

}  // namespace v6drift

#endif
