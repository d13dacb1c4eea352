// SPDX-License-Identifier: Apache-2.0
#include "v6drift/as_table.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace v6drift {

void PrefixToAsTable::add(AsEntry entry) {
    auto it = std::find_if(buckets_.begin(), buckets_.end(),
                           [&](const LengthBucket& b) { return b.length == entry.prefix.length; });
    if (it == buckets_.end()) {
        buckets_.push_back({entry.prefix.length, {}});
        it = buckets_.end() - 1;
        std::sort(buckets_.begin(), buckets_.end(),
                  [](const LengthBucket& a, const LengthBucket& b) { return a.length > b.length; });
        it = std::find_if(buckets_.begin(), buckets_.end(),
                          [&](const LengthBucket& b) { return b.length == entry.prefix.length; });
    }
    uint128 key = entry.prefix.base.value;
    if (it->entries.emplace(key, std::move(entry)).second)
        ++count_;
}

std::optional<AsEntry> PrefixToAsTable::lookup(Ipv6Addr128 addr) const {
    for (const auto& bucket : buckets_) {
        uint128 mask = bucket.length == 0 ? uint128{0} : ~uint128{0} << (128 - bucket.length);
        auto it = bucket.entries.find(addr.value & mask);
        if (it != bucket.entries.end())
            return it->second;
    }
    return std::nullopt;
}

PrefixToAsTable PrefixToAsTable::load_csv(std::istream& in) {
    PrefixToAsTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (first) {
            first = false;
            if (line.rfind("prefix,", 0) == 0)
                continue;  // header
        }
        if (line.empty())
            continue;
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            ++table.skipped_;
            continue;
        }
        auto prefix = Ipv6Prefix::parse(std::string_view(line).substr(0, c1));
        if (!prefix) {
            ++table.skipped_;
            continue;
        }
        uint32_t asn = 0;
        bool ok = c2 > c1 + 1;
        for (size_t i = c1 + 1; i < c2 && ok; ++i) {
            char ch = line[i];
            if (ch < '0' || ch > '9')
                ok = false;
            else
                asn = asn * 10 + uint32_t(ch - '0');
        }
        if (!ok) {
            ++table.skipped_;
            continue;
        }
        table.add({*prefix, asn, line.substr(c2 + 1)});
    }
    if (table.count_ == 0)
        throw std::runtime_error("prefix-to-AS table: no usable rows");
    return table;
}

PrefixToAsTable PrefixToAsTable::load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return load_csv(in);
}

}  // namespace v6drift
