// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_SIM_HPP
#define V6DRIFT_SIM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "v6drift/addr.hpp"
#include "v6drift/as_table.hpp"
#include "v6drift/transport.hpp"

namespace v6drift {

enum class IidMode : uint8_t { Eui64, Privacy };

enum class RotationKind : uint8_t { None, DailyIncrement, DailyUniform, PeriodicUniform };

struct RotationSchedule {
    RotationKind kind = RotationKind::None;
    uint64_t step_64s = 0;  // DailyIncrement: step in /64 units, wraps modulo the pool span
    int period_days = 1;    // PeriodicUniform
};

struct PoolConfig {
    Ipv6Prefix prefix;
    int alloc_len = 64;  // pool.length <= alloc_len <= 64
    RotationSchedule rotation;
};

struct ProviderChange {
    int day = 0;
    uint32_t to_asn = 0;
    int to_pool = 0;
};

struct CpeSpec {
    MacAddr mac;
    int pool = 0;
    IidMode iid_mode = IidMode::Eui64;
    // Error class returned for probes into the host subnet; empty = silent drop.
    std::optional<ResponseClass> error_class = ResponseClass::AddrUnreachable;
    double drop_prob = 0.0;
    std::optional<int> join_day;   // active from this day (default 0)
    std::optional<int> leave_day;  // inactive from this day on
    std::optional<ProviderChange> provider_change;
};

enum class UnallocatedResponse : uint8_t { Silent, NoRoute };

struct FleetGenSpec {
    int count = 0;
    int pool = 0;
    std::vector<std::pair<std::array<uint8_t, 3>, double>> oui_mix;  // weights, normalized
    double eui64_fraction = 1.0;
    std::optional<ResponseClass> error_class = ResponseClass::AddrUnreachable;
    double drop_prob = 0.0;
};

struct AsConfig {
    uint32_t asn = 0;
    std::string country = "ZZ";
    Ipv6Prefix bgp_prefix;
    UnallocatedResponse unallocated = UnallocatedResponse::Silent;
    std::vector<PoolConfig> pools;
    std::vector<CpeSpec> fleet;
    std::vector<FleetGenSpec> fleet_gen;
};

/// Ground-truth ISP world description. Holds one or more simulated ASes; the
/// file form accepts either a single-AS object or {"seed", "ases": [...]}.
struct SimConfig {
    uint64_t seed = 0;
    std::vector<AsConfig> ases;

    /// Expands fleet_gen entries into concrete fleet members (deterministic
    /// in seed) and validates nesting, capacities and schedules. Idempotent.
    void finalize();

    static SimConfig from_json_text(const std::string& text);
    static SimConfig load_file(const std::string& path);
    std::string to_json_text() const;
};

struct PathologySpec {
    // Replicate one MAC (default all-zero) into this many ASes.
    int duplicate_mac_as_count = 0;
    std::optional<MacAddr> duplicate_mac;
    // Turn this many CPEs (one per AS, round-robin destination) into
    // provider changers switching pools on change_day.
    int provider_changer_count = 0;
    int change_day = 5;

    bool empty() const { return duplicate_mac_as_count == 0 && provider_changer_count == 0; }
};

/// Returns a copy of `config` whose fleets reproduce the requested
/// pathologies. Throws when the request cannot be satisfied.
SimConfig inject_pathologies(SimConfig config, const PathologySpec& spec);

struct AllocationEvent {
    int day = 0;
    uint32_t cpe = 0;
    uint32_t asn = 0;
    uint64_t alloc_base_high64 = 0;
    int alloc_len = 64;
};

/// The live world: current allocations per CPE plus history. Allocations are
/// pairwise disjoint at every instant and always lie inside their pool.
/// advance_day / advance_hour are exclusive; probe() is const and may run
/// concurrently between mutations.
class SimWorld {
public:
    explicit SimWorld(SimConfig config);

    void advance_day();
    /// Hourly mode: one call per hour; prefix moves land between 00:00 and
    /// 06:00 of each new day instead of atomically at the boundary.
    void set_hourly(bool on) { hourly_ = on; }
    void advance_hour();

    ProbeResult probe(Ipv6Addr128 target) const;

    int day() const { return day_; }
    int hour() const { return hour_; }
    const SimConfig& config() const { return config_; }

    struct CpeView {
        MacAddr mac;
        uint32_t asn = 0;
        IidMode iid_mode = IidMode::Eui64;
        bool active = false;
        Iid64 current_iid;
        std::optional<Ipv6Prefix> allocation;
    };
    size_t cpe_count() const { return cpes_.size(); }
    CpeView cpe(size_t index) const;

    const std::vector<AllocationEvent>& history() const { return history_; }
    uint64_t rotation_collisions() const { return rotation_collisions_; }

    /// BGP snapshot rows (prefix,asn,country) matching this world.
    std::string bgp_csv() const;

private:
    struct PoolRt {
        int as_idx;
        Ipv6Prefix prefix;
        int alloc_len;
        RotationSchedule sched;
        uint64_t span_slots;  // 2^(alloc_len - prefix.length)
        uint64_t step_slots;  // DailyIncrement step in allocation blocks
        std::unordered_map<uint64_t, uint32_t> slot_to_cpe;
    };
    struct CpeRt {
        CpeSpec spec;
        int as_idx;
        int pool_idx = -1;  // global pool index, -1 while inactive
        uint64_t slot = 0;
        bool active = false;
        uint64_t iid_epoch = 0;
        uint64_t current_iid = 0;
    };
    struct Move {
        uint32_t cpe;
        int to_pool;
        uint64_t to_slot;
        int hour;  // hourly mode: applied at this hour of the new day
    };

    bool cpe_should_be_active(const CpeRt& cpe, int day) const;
    int cpe_pool_on(const CpeRt& cpe, int day) const;  // global pool index
    void assign(uint32_t cpe_idx, int pool_idx, uint64_t desired_slot);
    void remove(uint32_t cpe_idx);
    uint64_t pick_free_slot(const PoolRt& pool, uint64_t& rng_state) const;
    void refresh_iid(CpeRt& cpe);
    std::vector<Move> plan_day_moves();
    void apply_move(const Move& move);
    void record(uint32_t cpe_idx);
    uint64_t wan_high64(const CpeRt& cpe) const;

    SimConfig config_;
    std::vector<PoolRt> pools_;
    std::vector<CpeRt> cpes_;
    std::vector<std::pair<uint32_t, int>> as_pool_base_;  // asn -> first global pool idx
    int day_ = 0;
    int hour_ = 0;
    bool hourly_ = false;
    std::vector<Move> staged_;  // hourly mode: this day's pending moves
    std::vector<AllocationEvent> history_;
    uint64_t rotation_collisions_ = 0;
};

/// Transport adapter over a world. Read-only; safe for concurrent probes.
class SimTransport : public Transport {
public:
    explicit SimTransport(const SimWorld& world) : world_(&world) {}
    ProbeResult probe(Ipv6Addr128 target) override { return world_->probe(target); }
    bool concurrent_ok() const override { return true; }

private:
    const SimWorld* world_;
};

}  // namespace v6drift

#endif
