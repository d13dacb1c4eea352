// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_CAMPAIGN_HPP
#define V6DRIFT_CAMPAIGN_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "v6drift/as_table.hpp"
#include "v6drift/engine.hpp"
#include "v6drift/infer.hpp"
#include "v6drift/observation.hpp"
#include "v6drift/schedule.hpp"
#include "v6drift/sim.hpp"
#include "v6drift/track.hpp"
#include "v6drift/transport.hpp"

namespace v6drift {

enum class Stage : uint8_t { SeedExpansion, Density, RotationDetect, Daily };
std::string_view to_string(Stage stage);

struct RunInfo {
    std::string id;
    std::string path;
    int day = 0;
};

/// Exclusive-ownership lock on a state directory (flat file, O_EXCL).
class StateLock {
public:
    explicit StateLock(const std::string& dir);
    ~StateLock();
    StateLock(const StateLock&) = delete;
    StateLock& operator=(const StateLock&) = delete;

private:
    std::string path_;
};

/// Plain-file campaign persistence: a JSON state document plus JSONL
/// observation logs under one directory. Stages advance monotonically.
struct CampaignState {
    std::string dir;
    Stage stage = Stage::SeedExpansion;
    uint64_t seed = 0;
    double rate = 10000.0;
    int sim_day = 0;  // days already applied to the simulated world
    std::string sim_config;
    std::vector<Ipv6Prefix> seeds;
    std::vector<Ipv6Prefix> validated_48s;
    std::vector<Ipv6Prefix> high_density_48s;
    std::vector<Ipv6Prefix> rotating_48s;
    std::vector<RunInfo> runs;

    static CampaignState create(const std::string& dir, uint64_t seed, double rate);
    static CampaignState open(const std::string& dir);
    void save() const;

    std::string obs_path(const std::string& run_id) const;
    std::string figures_dir() const;
    const RunInfo* find_run(const std::string& id) const;
    void require_stage(Stage at_least, const char* what) const;
};

/// Seed /32 list: one CIDR per line, '#' comments. Unparseable lines are
/// reported with their line number and skipped; an empty usable list throws.
std::vector<Ipv6Prefix> load_seed_list(const std::string& path,
                                       const std::function<void(const std::string&)>& warn);

/// One random target per constituent /48 of every seed prefix. Size is
/// sum over seeds of 2^(48 - len); targets are a pure function of
/// (campaign seed, index) so every daily schedule sees identical addresses.
class SeedExpansionSource : public TargetSource {
public:
    SeedExpansionSource(std::vector<Ipv6Prefix> seeds, uint64_t seed);
    uint64_t size() const override { return total_; }
    Ipv6Addr128 at(uint64_t index) const override;
    Ipv6Prefix slash48_at(uint64_t index) const;

private:
    std::vector<Ipv6Prefix> seeds_;
    std::vector<uint64_t> cumulative_;
    uint64_t total_ = 0;
    uint64_t seed_;
};

/// One random target per /56 (or per /64) of each listed /48.
class GridTargetSource : public TargetSource {
public:
    GridTargetSource(std::vector<Ipv6Prefix> prefixes48, int grid_len, uint64_t seed,
                     uint64_t salt);
    uint64_t size() const override;
    Ipv6Addr128 at(uint64_t index) const override;

private:
    std::vector<Ipv6Prefix> prefixes_;
    int grid_len_;
    uint64_t per_prefix_;
    uint64_t seed_, salt_;
};

/// Probes every seed /48 once and keeps the /48s that produced a unique
/// EUI-64 responder (a responder no other /48 also elicited). Appends the
/// observation log and advances the stage.
std::vector<Ipv6Prefix> expand_seeds(CampaignState& state, Transport& transport,
                                     double start_ts = 0.0);

/// One probe per /56 per validated /48; classifies density and stores the
/// high-density list.
std::vector<DensityReport> run_density_stage(CampaignState& state, Transport& transport,
                                             double start_ts = 0.0);

struct RotationSummaryRow {
    uint32_t asn = 0;
    std::string country;
    uint64_t rotating_48s = 0;
};

struct RotationStageResult {
    std::vector<RotationVerdict> verdicts;
    std::vector<RotationSummaryRow> summary;  // sorted by count descending
    uint64_t rotating_48s = 0;
};

/// Two same-order snapshots of every /64 in the high-density /48s, separated
/// by one advance of the world clock (the `advance_day` callback).
RotationStageResult run_rotation_stage(CampaignState& state, Transport& transport,
                                       const std::function<void()>& advance_day,
                                       const PrefixToAsTable* bgp, double start_ts = 0.0);

/// One same-seed /64-grid snapshot per day over the rotating /48s.
CampaignStats run_daily(CampaignState& state, Transport& transport,
                        const std::function<void()>& advance_day, int days);

std::vector<Observation> load_all_runs(const CampaignState& state);

}  // namespace v6drift

#endif
