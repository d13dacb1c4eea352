// SPDX-License-Identifier: Apache-2.0
#include "v6drift/track.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "v6drift/schedule.hpp"

namespace v6drift {

TrackingPlan make_plan(Iid64 iid, const AllocationInference& alloc, const PoolInference& pool) {
    if (alloc.empty() || !alloc.median_alloc_len)
        throw std::runtime_error(
            "no allocation-size inference for this AS; run the inference step first");
    if (pool.empty() || !pool.median_pool_len)
        throw std::runtime_error(
            "no rotation-pool inference for this AS; run the inference step first");
    auto evidence = pool.per_iid.find(iid.value);
    if (evidence == pool.per_iid.end())
        throw std::runtime_error("IID " + iid.str() +
                                 " has no pool evidence; run the inference step first");

    TrackingPlan plan;
    plan.target_iid = iid;
    plan.alloc_len = *alloc.median_alloc_len;
    int pool_len = *pool.median_pool_len;
    // Anchor the pool at the IID's own observed range.
    plan.pool = Ipv6Prefix(Ipv6Addr128::from_halves(evidence->second.min_high64, 0), pool_len);
    plan.block_len = std::max(plan.alloc_len, pool_len);
    plan.daily_budget = uint64_t{1} << (plan.block_len - pool_len);
    return plan;
}

TrackDayRecord track_day(const TrackingPlan& plan, Transport& transport, uint64_t seed,
                         int day) {
    TrackDayRecord record;
    record.day = day;
    IndexPermutation perm(plan.daily_budget,
                          mix64(seed ^ plan.target_iid.value ^ uint64_t(day) * 0x9e3779b97f4a7c15ULL));
    for (uint64_t rank = 0; rank < plan.daily_budget; ++rank) {
        uint64_t block = perm.at(rank);
        Ipv6Prefix block_prefix(
            Ipv6Addr128::from_halves(
                plan.pool.base.high64() + (block << (64 - plan.block_len)), 0),
            plan.block_len);
        Ipv6Addr128 target =
            random_target_in(block_prefix, mix64(seed ^ (uint64_t(day) << 32) ^ rank));
        ProbeResult result;
        try {
            result = transport.probe(target);
        } catch (const std::exception&) {
            ++record.transport_errors;
            continue;
        }
        if (result.responder && Iid64::of(*result.responder) == plan.target_iid) {
            record.found = true;
            record.probes = rank + 1;
            record.found_at = result.responder;
            return record;
        }
    }
    record.probes = plan.daily_budget;
    return record;
}

TrackingTargetReport summarize(Iid64 iid, std::span<const TrackDayRecord> records) {
    if (records.empty())
        throw std::invalid_argument("summarize needs at least one day record");
    TrackingTargetReport report;
    report.iid = iid;
    double sum = 0, sum_sq = 0, hit_sum = 0;
    std::set<uint64_t> prefixes;
    for (const TrackDayRecord& rec : records) {
        if (!rec.probed)
            continue;
        ++report.days_probed;
        sum += double(rec.probes);
        sum_sq += double(rec.probes) * double(rec.probes);
        if (rec.found) {
            ++report.days_found;
            hit_sum += double(rec.probes);
            if (rec.found_at)
                prefixes.insert(rec.found_at->high64());
        }
    }
    report.distinct_64_prefixes = prefixes.size();
    if (report.days_probed > 0) {
        report.mean_probes = sum / report.days_probed;
        double variance = sum_sq / report.days_probed - report.mean_probes * report.mean_probes;
        report.stddev_probes = std::sqrt(std::max(0.0, variance));
    }
    if (report.days_found > 0)
        report.mean_probes_hits = hit_sum / report.days_found;
    return report;
}

std::vector<std::vector<TrackDayRecord>> track_campaign(
    std::span<const TrackingPlan> plans, Transport& transport, uint64_t seed, int days,
    const std::function<void()>& advance_day, int first_day) {
    std::vector<std::vector<TrackDayRecord>> records(plans.size());
    std::vector<int> unseen(plans.size(), 0);
    for (int d = 0; d < days; ++d) {
        advance_day();
        int day = first_day + d;
        for (size_t t = 0; t < plans.size(); ++t) {
            TrackDayRecord record;
            if (unseen[t] >= plans[t].stop_after_days_unseen) {
                record.day = day;
                record.probed = false;  // departed target: probing has ceased
            } else {
                record = track_day(plans[t], transport, seed ^ plans[t].target_iid.value, day);
            }
            unseen[t] = record.found ? 0 : unseen[t] + 1;
            records[t].push_back(record);
        }
    }
    return records;
}

std::string tracking_report_to_csv(std::span<const TrackingTargetReport> reports) {
    std::string out(kTrackingCsvHeader);
    out += '\n';
    char buf[64];
    for (const TrackingTargetReport& r : reports) {
        out += r.iid.str();
        std::snprintf(buf, sizeof(buf), ",%.1f,%.1f,", r.mean_probes, r.stddev_probes);
        out += buf;
        if (r.bgp_len)
            out += "/" + std::to_string(*r.bgp_len);
        out += ',';
        if (r.asn)
            out += std::to_string(*r.asn);
        out += ',';
        out += r.country;
        std::snprintf(buf, sizeof(buf), ",%d,%zu,%.1f,%d", r.days_found, r.distinct_64_prefixes,
                      r.mean_probes_hits, r.days_probed);
        out += buf;
        out += '\n';
    }
    return out;
}

std::string tracking_day_to_jsonl(Iid64 iid, const TrackDayRecord& rec) {
    std::string out = "{\"iid\":\"" + iid.str() + "\",\"day\":" + std::to_string(rec.day) +
                      ",\"probed\":" + (rec.probed ? "true" : "false") +
                      ",\"found\":" + (rec.found ? "true" : "false") +
                      ",\"probes\":" + std::to_string(rec.probes);
    if (rec.found_at)
        out += ",\"address\":\"" + rec.found_at->str() + "\"";
    out += "}";
    return out;
}

}  // namespace v6drift
