// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_INFER_HPP
#define V6DRIFT_INFER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "v6drift/addr.hpp"
#include "v6drift/as_table.hpp"
#include "v6drift/observation.hpp"

namespace v6drift {

/// <periphery response, target address> map for one AS and one run.
struct ResponseTargetMap {
    std::unordered_map<uint128, std::vector<Ipv6Addr128>, U128Hash> by_responder;

    void add(Ipv6Addr128 responder, Ipv6Addr128 target) {
        by_responder[responder.value].push_back(target);
    }
    /// Keeps every non-silent <responder, target> pair.
    static ResponseTargetMap from_observations(std::span<const Observation> observations);
};

/// Per-IID observed range evidence: ceil(log2(span+1)) bits over /64 units.
struct IidRangeBits {
    int bits = 0;
    uint64_t min_high64 = 0;
    uint64_t max_high64 = 0;
};

struct AllocationInference {
    std::map<uint64_t, IidRangeBits> per_iid;  // EUI-64 IIDs only
    std::optional<int> median_alloc_len;       // 64 - median(bits); empty when no EUI IIDs
    size_t sample_count = 0;

    bool empty() const { return sample_count == 0; }
};

/// Customer allocation size for one AS from a single-run response/target map:
/// per EUI-64 IID, the bit span of the probed targets that elicited it;
/// the AS-level answer is 64 minus the (lower) median of the per-IID bits.
AllocationInference allocation_size(const ResponseTargetMap& m);

struct PoolInference {
    std::map<uint64_t, IidRangeBits> per_iid;  // over responder addresses, all runs
    std::optional<int> median_pool_len;
    std::optional<int> bgp_len;  // via longest-prefix match, when a table is given
    size_t sample_count = 0;

    bool empty() const { return sample_count == 0; }
};

/// Rotation pool size for one AS: per EUI-64 IID, the bit span of the
/// responder addresses it was seen at across all runs; median across IIDs.
PoolInference rotation_pool_size(std::span<const Ipv6Addr128> responders,
                                 const PrefixToAsTable* bgp = nullptr);

enum class DensityClass : uint8_t { High, Low, Unresponsive };
std::string_view to_string(DensityClass cls);

struct DensityReport {
    Ipv6Prefix prefix;  // the /48
    uint64_t probes_sent = 0;
    uint64_t unique_eui_responders = 0;
    double density = 0.0;
    DensityClass cls = DensityClass::Unresponsive;
};

/// Unique EUI-64 responder addresses divided by probes sent, per target /48.
/// Unresponsive: no responses at all; Low: density < 0.01; High otherwise.
/// grid_len documents the probing grid (one probe per /grid_len); the
/// classification itself follows the fraction regardless of grid.
std::vector<DensityReport> classify_density(std::span<const Observation> observations,
                                            int grid_len = 56);

struct RotationVerdict {
    Ipv6Prefix prefix;  // the /48
    uint64_t changed_pairs = 0;
    bool rotated = false;
};

/// Two-snapshot rotation detection: drop <target, response> pairs common to
/// both snapshots, keep pairs where either response is EUI-64 (including
/// EUI -> silent and EUI -> privacy transitions), and flag each /48 with at
/// least one residual pair. Snapshots must cover identical targets in
/// identical order.
std::vector<RotationVerdict> detect_rotation(std::span<const Observation> snapshot_a,
                                             std::span<const Observation> snapshot_b);

struct MultiAsIid {
    Iid64 iid;
    std::vector<uint32_t> asns;  // sorted
};

struct ProviderChangeFinding {
    Iid64 iid;
    std::vector<uint32_t> asn_sequence;  // in time order
    int switch_day = 0;                  // first day seen in the second AS
};

struct PathologyReport {
    std::vector<MultiAsIid> multi_as_iids;
    std::vector<ProviderChangeFinding> provider_changers;
};

/// Scans a multi-day observation log for EUI-64 IIDs seen in several ASes.
/// IIDs whose per-AS activity intervals overlap are multi-AS pathologies;
/// IIDs whose attribution partitions cleanly in time are provider changers.
PathologyReport pathology_scan(std::span<const Observation> observations,
                               const PrefixToAsTable& bgp);

struct AsInferenceRow {
    uint32_t asn = 0;
    std::optional<int> alloc_len;
    std::optional<int> pool_len;
    std::optional<int> bgp_len;
    size_t iid_count = 0;
};

struct PerAsInference {
    uint32_t asn = 0;
    AllocationInference alloc;
    PoolInference pool;
    size_t iid_count = 0;
};

struct PerAsInferenceOptions {
    /// Run id feeding the single-run allocation-size map; empty selects the
    /// earliest run in the log.
    std::string alloc_run;
    size_t min_iids = 1;
};

/// Full per-AS inference objects, keyed by ASN (the tracker consumes these).
std::map<uint32_t, PerAsInference> infer_per_as_full(
    std::span<const Observation> observations, const PrefixToAsTable& bgp,
    const PerAsInferenceOptions& options = {});

/// Groups observations by AS (longest-prefix match on the responder),
/// excludes IIDs observed in more than one AS, and runs both inferences per
/// AS. Rows are sorted by ASN.
std::vector<AsInferenceRow> infer_per_as(std::span<const Observation> observations,
                                         const PrefixToAsTable& bgp,
                                         const PerAsInferenceOptions& options = {});

inline constexpr std::string_view kInferenceCsvHeader = "asn,alloc_len,pool_len,bgp_len,iid_count";
std::string inference_rows_to_csv(std::span<const AsInferenceRow> rows);
std::string inference_rows_to_json(std::span<const AsInferenceRow> rows);

}  // namespace v6drift

#endif
