// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_TRACK_HPP
#define V6DRIFT_TRACK_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v6drift/addr.hpp"
#include "v6drift/infer.hpp"
#include "v6drift/transport.hpp"

namespace v6drift {

/// Probe plan for tracking one EUI-64 IID: one probe per allocation-sized
/// block across its inferred rotation pool, in a fresh permuted order each
/// day, stopping early on the first hit.
struct TrackingPlan {
    Iid64 target_iid;
    Ipv6Prefix pool;
    int alloc_len = 64;
    int block_len = 64;          // max(alloc_len, pool.length)
    uint64_t daily_budget = 1;   // 2^(block_len - pool.length)
    int stop_after_days_unseen = 7;
};

/// Builds the plan from the AS-level inferences, anchoring the pool at the
/// IID's observed addresses. Throws when either inference lacks the data
/// (run the inference step first).
TrackingPlan make_plan(Iid64 iid, const AllocationInference& alloc,
                       const PoolInference& pool);

struct TrackDayRecord {
    int day = 0;
    bool probed = true;  // false once the unseen cutoff stops the target
    bool found = false;
    uint64_t probes = 0;  // probes until hit, or the full budget on a miss
    std::optional<Ipv6Addr128> found_at;
    uint64_t transport_errors = 0;
};

/// Runs one tracking day: probes blocks in seeded permuted order with a
/// random target per block, stops at the first response carrying the target
/// IID. A miss records the full budget.
TrackDayRecord track_day(const TrackingPlan& plan, Transport& transport, uint64_t seed,
                         int day);

/// Table-style per-target summary plus attribution fields the caller can fill
/// from a BGP table.
struct TrackingTargetReport {
    Iid64 iid;
    double mean_probes = 0.0;       // over probed days; misses count the full budget
    double stddev_probes = 0.0;     // population stddev over probed days
    double mean_probes_hits = 0.0;  // hits-only mean, 0 when never found
    int days_probed = 0;
    int days_found = 0;
    size_t distinct_64_prefixes = 0;
    std::optional<int> bgp_len;
    std::optional<uint32_t> asn;
    std::string country;
};

TrackingTargetReport summarize(Iid64 iid, std::span<const TrackDayRecord> records);

/// Runs several plans side by side for `days` days. advance_day is invoked
/// before each day's probing (the device may have rotated overnight); a
/// target unseen for stop_after_days_unseen consecutive days stops being
/// probed. Returns one record vector per plan, in plan order.
std::vector<std::vector<TrackDayRecord>> track_campaign(
    std::span<const TrackingPlan> plans, Transport& transport, uint64_t seed, int days,
    const std::function<void()>& advance_day, int first_day = 1);

inline constexpr std::string_view kTrackingCsvHeader =
    "iid,mean_probes,stddev_probes,bgp_prefix_len,asn,country,days_found,"
    "distinct_64_prefixes,mean_probes_hits,days_probed";
std::string tracking_report_to_csv(std::span<const TrackingTargetReport> reports);
/// Per-day JSON-lines detail: one object per (target, day).
std::string tracking_day_to_jsonl(Iid64 iid, const TrackDayRecord& record);

}  // namespace v6drift

#endif
