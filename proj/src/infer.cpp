// SPDX-License-Identifier: Apache-2.0
#include "v6drift/infer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace v6drift {

namespace {

// Lower of the two middle values for even counts: the conservative choice
// (a smaller inferred allocation/pool costs extra probes, never responses).
int lower_median(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

int range_bits(uint64_t min_high, uint64_t max_high) {
    uint64_t diff = max_high - min_high;
    return diff == 0 ? 0 : 64 - __builtin_clzll(diff);
}

Ipv6Prefix slash48_of(Ipv6Addr128 addr) {
    return Ipv6Prefix(addr, 48);
}

}  // namespace

ResponseTargetMap ResponseTargetMap::from_observations(
    std::span<const Observation> observations) {
    ResponseTargetMap m;
    for (const Observation& obs : observations) {
        if (obs.responder)
            m.add(*obs.responder, obs.target);
    }
    return m;
}

AllocationInference allocation_size(const ResponseTargetMap& m) {
    AllocationInference result;
    for (const auto& [responder, targets] : m.by_responder) {
        Iid64 iid = Iid64::of(Ipv6Addr128(responder));
        if (!iid.is_eui64())
            continue;
        for (Ipv6Addr128 target : targets) {
            uint64_t high = target.high64();
            auto [it, inserted] =
                result.per_iid.try_emplace(iid.value, IidRangeBits{0, high, high});
            if (!inserted) {
                it->second.min_high64 = std::min(it->second.min_high64, high);
                it->second.max_high64 = std::max(it->second.max_high64, high);
            }
        }
    }
    if (result.per_iid.empty())
        return result;
    std::vector<int> bits;
    bits.reserve(result.per_iid.size());
    for (auto& [iid, range] : result.per_iid) {
        range.bits = range_bits(range.min_high64, range.max_high64);
        bits.push_back(range.bits);
    }
    result.sample_count = bits.size();
    result.median_alloc_len = 64 - lower_median(std::move(bits));
    return result;
}

PoolInference rotation_pool_size(std::span<const Ipv6Addr128> responders,
                                 const PrefixToAsTable* bgp) {
    PoolInference result;
    for (Ipv6Addr128 responder : responders) {
        Iid64 iid = Iid64::of(responder);
        if (!iid.is_eui64())
            continue;
        uint64_t high = responder.high64();
        auto [it, inserted] = result.per_iid.try_emplace(iid.value, IidRangeBits{0, high, high});
        if (!inserted) {
            it->second.min_high64 = std::min(it->second.min_high64, high);
            it->second.max_high64 = std::max(it->second.max_high64, high);
        }
    }
    if (result.per_iid.empty())
        return result;
    std::vector<int> bits;
    bits.reserve(result.per_iid.size());
    for (auto& [iid, range] : result.per_iid) {
        range.bits = range_bits(range.min_high64, range.max_high64);
        bits.push_back(range.bits);
    }
    result.sample_count = bits.size();
    result.median_pool_len = 64 - lower_median(std::move(bits));

    if (bgp) {
        // Attach the most common matched BGP prefix length (ties -> longer).
        std::map<int, size_t> len_counts;
        std::set<uint128> seen;
        for (Ipv6Addr128 responder : responders) {
            if (!Iid64::of(responder).is_eui64() || !seen.insert(responder.value).second)
                continue;
            if (auto entry = bgp->lookup(responder))
                ++len_counts[entry->prefix.length];
        }
        size_t best = 0;
        for (const auto& [len, count] : len_counts) {
            if (count >= best) {
                best = count;
                result.bgp_len = len;
            }
        }
    }
    return result;
}

std::string_view to_string(DensityClass cls) {
    switch (cls) {
        case DensityClass::High:
            return "high";
        case DensityClass::Low:
            return "low";
        case DensityClass::Unresponsive:
            return "unresponsive";
    }
    return "unresponsive";
}

std::vector<DensityReport> classify_density(std::span<const Observation> observations,
                                            int grid_len) {
    (void)grid_len;  // the classification follows the observed fraction
    struct Bucket {
        uint64_t probes = 0;
        uint64_t responses = 0;
        std::set<uint128> eui_responders;
    };
    std::map<uint128, Bucket> buckets;  // keyed by /48 base, ordered
    for (const Observation& obs : observations) {
        Bucket& bucket = buckets[slash48_of(obs.target).base.value];
        ++bucket.probes;
        if (obs.responder) {
            ++bucket.responses;
            if (Iid64::of(*obs.responder).is_eui64())
                bucket.eui_responders.insert(obs.responder->value);
        }
    }
    std::vector<DensityReport> reports;
    reports.reserve(buckets.size());
    for (const auto& [base, bucket] : buckets) {
        DensityReport report;
        report.prefix = Ipv6Prefix(Ipv6Addr128(base), 48);
        report.probes_sent = bucket.probes;
        report.unique_eui_responders = bucket.eui_responders.size();
        report.density = double(report.unique_eui_responders) / double(bucket.probes);
        if (bucket.responses == 0)
            report.cls = DensityClass::Unresponsive;
        else if (report.density < 0.01)
            report.cls = DensityClass::Low;
        else
            report.cls = DensityClass::High;
        reports.push_back(report);
    }
    return reports;
}

std::vector<RotationVerdict> detect_rotation(std::span<const Observation> snapshot_a,
                                             std::span<const Observation> snapshot_b) {
    if (snapshot_a.size() != snapshot_b.size())
        throw std::invalid_argument("rotation snapshots differ in length");
    std::map<uint128, uint64_t> changed;  // /48 base -> residual pair count
    for (size_t i = 0; i < snapshot_a.size(); ++i) {
        const Observation& a = snapshot_a[i];
        const Observation& b = snapshot_b[i];
        if (a.target != b.target)
            throw std::invalid_argument(
                "rotation snapshots probed different targets (protocol requires the same "
                "order and seed)");
        uint128 key = slash48_of(a.target).base.value;
        changed.try_emplace(key, 0);
        bool eui_a = a.responder && Iid64::of(*a.responder).is_eui64();
        bool eui_b = b.responder && Iid64::of(*b.responder).is_eui64();
        if (!eui_a && !eui_b)
            continue;
        if (a.responder == b.responder)
            continue;  // pair common to both scans
        ++changed[key];
    }
    std::vector<RotationVerdict> verdicts;
    verdicts.reserve(changed.size());
    for (const auto& [base, count] : changed)
        verdicts.push_back({Ipv6Prefix(Ipv6Addr128(base), 48), count, count > 0});
    return verdicts;
}

PathologyReport pathology_scan(std::span<const Observation> observations,
                               const PrefixToAsTable& bgp) {
    struct Interval {
        int min_day, max_day;
    };
    std::map<uint64_t, std::map<uint32_t, Interval>> activity;  // iid -> asn -> days
    for (const Observation& obs : observations) {
        if (!obs.responder)
            continue;
        Iid64 iid = Iid64::of(*obs.responder);
        if (!iid.is_eui64())
            continue;
        auto entry = bgp.lookup(*obs.responder);
        if (!entry)
            continue;
        int day = int(std::floor(obs.ts / 86400.0));
        auto [it, inserted] = activity[iid.value].try_emplace(entry->asn, Interval{day, day});
        if (!inserted) {
            it->second.min_day = std::min(it->second.min_day, day);
            it->second.max_day = std::max(it->second.max_day, day);
        }
    }

    PathologyReport report;
    for (const auto& [iid, per_as] : activity) {
        if (per_as.size() < 2)
            continue;
        std::vector<std::pair<Interval, uint32_t>> intervals;
        for (const auto& [asn, interval] : per_as)
            intervals.push_back({interval, asn});
        std::sort(intervals.begin(), intervals.end(),
                  [](const auto& a, const auto& b) { return a.first.min_day < b.first.min_day; });
        bool clean = true;
        for (size_t i = 1; i < intervals.size(); ++i) {
            if (intervals[i - 1].first.max_day >= intervals[i].first.min_day) {
                clean = false;
                break;
            }
        }
        if (clean) {
            ProviderChangeFinding finding;
            finding.iid = Iid64(iid);
            for (const auto& [interval, asn] : intervals)
                finding.asn_sequence.push_back(asn);
            finding.switch_day = intervals[1].first.min_day;
            report.provider_changers.push_back(std::move(finding));
        } else {
            MultiAsIid finding;
            finding.iid = Iid64(iid);
            for (const auto& [asn, interval] : per_as)
                finding.asns.push_back(asn);
            report.multi_as_iids.push_back(std::move(finding));
        }
    }
    return report;
}

std::map<uint32_t, PerAsInference> infer_per_as_full(
    std::span<const Observation> observations, const PrefixToAsTable& bgp,
    const PerAsInferenceOptions& options) {
    // First pass: attribute EUI-64 IIDs to ASes; multi-AS IIDs are excluded
    // from the per-AS aggregates.
    std::map<uint64_t, std::set<uint32_t>> iid_asns;
    std::string alloc_run = options.alloc_run;
    double earliest = 0;
    bool have_earliest = false;
    for (const Observation& obs : observations) {
        if (options.alloc_run.empty() && (!have_earliest || obs.ts < earliest)) {
            earliest = obs.ts;
            alloc_run = obs.run;
            have_earliest = true;
        }
        if (!obs.responder)
            continue;
        Iid64 iid = Iid64::of(*obs.responder);
        if (!iid.is_eui64())
            continue;
        if (auto entry = bgp.lookup(*obs.responder))
            iid_asns[iid.value].insert(entry->asn);
    }
    auto excluded = [&](uint64_t iid) {
        auto it = iid_asns.find(iid);
        return it != iid_asns.end() && it->second.size() > 1;
    };

    struct AsAccum {
        ResponseTargetMap alloc_map;
        std::vector<Ipv6Addr128> responders;
        std::set<uint64_t> iids;
    };
    std::map<uint32_t, AsAccum> per_as;
    for (const Observation& obs : observations) {
        if (!obs.responder)
            continue;
        Iid64 iid = Iid64::of(*obs.responder);
        if (!iid.is_eui64() || excluded(iid.value))
            continue;
        auto entry = bgp.lookup(*obs.responder);
        if (!entry)
            continue;
        AsAccum& accum = per_as[entry->asn];
        accum.responders.push_back(*obs.responder);
        accum.iids.insert(iid.value);
        if (obs.run == alloc_run)
            accum.alloc_map.add(*obs.responder, obs.target);
    }

    std::map<uint32_t, PerAsInference> result;
    for (auto& [asn, accum] : per_as) {
        if (accum.iids.size() < options.min_iids)
            continue;
        PerAsInference inference;
        inference.asn = asn;
        inference.iid_count = accum.iids.size();
        inference.alloc = allocation_size(accum.alloc_map);
        inference.pool = rotation_pool_size(accum.responders, &bgp);
        result.emplace(asn, std::move(inference));
    }
    return result;
}

std::vector<AsInferenceRow> infer_per_as(std::span<const Observation> observations,
                                         const PrefixToAsTable& bgp,
                                         const PerAsInferenceOptions& options) {
    std::vector<AsInferenceRow> rows;
    for (const auto& [asn, inference] : infer_per_as_full(observations, bgp, options)) {
        AsInferenceRow row;
        row.asn = asn;
        row.iid_count = inference.iid_count;
        if (!inference.alloc.empty())
            row.alloc_len = inference.alloc.median_alloc_len;
        if (!inference.pool.empty()) {
            row.pool_len = inference.pool.median_pool_len;
            row.bgp_len = inference.pool.bgp_len;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string inference_rows_to_csv(std::span<const AsInferenceRow> rows) {
    std::string out(kInferenceCsvHeader);
    out += '\n';
    auto field = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string(); };
    for (const AsInferenceRow& row : rows) {
        out += std::to_string(row.asn);
        out += ',';
        out += field(row.alloc_len);
        out += ',';
        out += field(row.pool_len);
        out += ',';
        out += field(row.bgp_len);
        out += ',';
        out += std::to_string(row.iid_count);
        out += '\n';
    }
    return out;
}

std::string inference_rows_to_json(std::span<const AsInferenceRow> rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const AsInferenceRow& row : rows) {
        nlohmann::json j{{"asn", row.asn}, {"iid_count", row.iid_count}};
        j["alloc_len"] = row.alloc_len ? nlohmann::json(*row.alloc_len) : nlohmann::json();
        j["pool_len"] = row.pool_len ? nlohmann::json(*row.pool_len) : nlohmann::json();
        j["bgp_len"] = row.bgp_len ? nlohmann::json(*row.bgp_len) : nlohmann::json();
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace v6drift
