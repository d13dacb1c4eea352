// SPDX-License-Identifier: Apache-2.0
#include "v6drift/campaign.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace v6drift {

namespace {

using nlohmann::json;

json prefixes_to_json(const std::vector<Ipv6Prefix>& prefixes) {
    json arr = json::array();
    for (const auto& p : prefixes)
        arr.push_back(p.str());
    return arr;
}

std::vector<Ipv6Prefix> prefixes_from_json(const json& arr) {
    std::vector<Ipv6Prefix> out;
    for (const auto& j : arr) {
        auto p = Ipv6Prefix::parse(j.get<std::string>());
        if (!p)
            throw std::runtime_error("bad prefix in state: " + j.get<std::string>());
        out.push_back(*p);
    }
    return out;
}

void ensure_dir(const std::string& path) {
    if (::mkdir(path.c_str(), 0755) != 0 && errno != EEXIST)
        throw std::runtime_error("cannot create directory " + path);
}

// Re-running a stage must not double its registry entry.
void record_run(CampaignState& state, const std::string& id, int day) {
    for (RunInfo& run : state.runs) {
        if (run.id == id) {
            run.day = day;
            return;
        }
    }
    state.runs.push_back({id, state.obs_path(id), day});
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::SeedExpansion:
            return "seed-expansion";
        case Stage::Density:
            return "density";
        case Stage::RotationDetect:
            return "rotation-detect";
        case Stage::Daily:
            return "daily";
    }
    return "seed-expansion";
}

namespace {
Stage stage_from_string(const std::string& s) {
    if (s == "seed-expansion")
        return Stage::SeedExpansion;
    if (s == "density")
        return Stage::Density;
    if (s == "rotation-detect")
        return Stage::RotationDetect;
    if (s == "daily")
        return Stage::Daily;
    throw std::runtime_error("unknown stage: " + s);
}
}  // namespace

StateLock::StateLock(const std::string& dir) : path_(dir + "/.lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw std::runtime_error("state directory " + dir +
                                 " is locked by another process (remove " + path_ +
                                 " if that process is gone)");
    ::close(fd);
}

StateLock::~StateLock() {
    ::unlink(path_.c_str());
}

CampaignState CampaignState::create(const std::string& dir, uint64_t seed, double rate) {
    ensure_dir(dir);
    ensure_dir(dir + "/obs");
    ensure_dir(dir + "/figures");
    CampaignState state;
    state.dir = dir;
    state.seed = seed;
    state.rate = rate;
    state.save();
    return state;
}

CampaignState CampaignState::open(const std::string& dir) {
    std::ifstream in(dir + "/state.json");
    if (!in)
        throw std::runtime_error("no campaign state in " + dir + " (run sim-build or expand first)");
    json j = json::parse(in);
    CampaignState state;
    state.dir = dir;
    state.stage = stage_from_string(j.at("stage").get<std::string>());
    state.seed = j.at("seed").get<uint64_t>();
    state.rate = j.at("rate").get<double>();
    state.sim_day = j.value("sim_day", 0);
    state.sim_config = j.value("sim_config", "");
    state.seeds = prefixes_from_json(j.value("seeds", json::array()));
    state.validated_48s = prefixes_from_json(j.value("validated_48s", json::array()));
    state.high_density_48s = prefixes_from_json(j.value("high_density_48s", json::array()));
    state.rotating_48s = prefixes_from_json(j.value("rotating_48s", json::array()));
    for (const auto& rj : j.value("runs", json::array()))
        state.runs.push_back({rj.at("id").get<std::string>(), rj.at("path").get<std::string>(),
                              rj.value("day", 0)});
    return state;
}

void CampaignState::save() const {
    json runs_json = json::array();
    for (const auto& run : runs)
        runs_json.push_back(json{{"id", run.id}, {"path", run.path}, {"day", run.day}});
    json j{{"stage", std::string(to_string(stage))},
           {"seed", seed},
           {"rate", rate},
           {"sim_day", sim_day},
           {"sim_config", sim_config},
           {"seeds", prefixes_to_json(seeds)},
           {"validated_48s", prefixes_to_json(validated_48s)},
           {"high_density_48s", prefixes_to_json(high_density_48s)},
           {"rotating_48s", prefixes_to_json(rotating_48s)},
           {"runs", runs_json}};
    std::ofstream out(dir + "/state.json", std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write state in " + dir);
    out << j.dump(2) << '\n';
}

std::string CampaignState::obs_path(const std::string& run_id) const {
    return dir + "/obs/" + run_id + ".jsonl";
}

std::string CampaignState::figures_dir() const {
    return dir + "/figures";
}

const RunInfo* CampaignState::find_run(const std::string& id) const {
    for (const auto& run : runs)
        if (run.id == id)
            return &run;
    return nullptr;
}

void CampaignState::require_stage(Stage at_least, const char* what) const {
    if (int(stage) < int(at_least))
        throw std::runtime_error(std::string(what) + " requires stage '" +
                                 std::string(to_string(at_least)) + "' but campaign is at '" +
                                 std::string(to_string(stage)) + "'");
}

std::vector<Ipv6Prefix> load_seed_list(const std::string& path,
                                       const std::function<void(const std::string&)>& warn) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open seed list " + path);
    std::vector<Ipv6Prefix> seeds;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos)
            continue;
        auto prefix = Ipv6Prefix::parse(std::string_view(line).substr(start));
        if (!prefix || prefix->length < 32 || prefix->length > 48) {
            warn("seed list line " + std::to_string(lineno) + ": not a /32../48 CIDR: " + line);
            continue;
        }
        seeds.push_back(*prefix);
    }
    if (seeds.empty())
        throw std::runtime_error("seed list " + path + " has no usable prefixes");
    return seeds;
}

SeedExpansionSource::SeedExpansionSource(std::vector<Ipv6Prefix> seeds, uint64_t seed)
    : seeds_(std::move(seeds)), seed_(seed) {
    cumulative_.reserve(seeds_.size());
    for (const auto& prefix : seeds_) {
        cumulative_.push_back(total_);
        total_ += uint64_t{1} << (48 - prefix.length);
    }
}

Ipv6Prefix SeedExpansionSource::slash48_at(uint64_t index) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), index);
    size_t seed_idx = size_t(it - cumulative_.begin()) - 1;
    uint64_t offset = index - cumulative_[seed_idx];
    uint128 base = seeds_[seed_idx].base.value | (uint128(offset) << 80);
    return Ipv6Prefix(Ipv6Addr128(base), 48);
}

Ipv6Addr128 SeedExpansionSource::at(uint64_t index) const {
    // Random /64 inside the /48, random IID.
    return random_target_in(slash48_at(index), mix64(seed_ ^ 0xeba11dULL ^ index));
}

GridTargetSource::GridTargetSource(std::vector<Ipv6Prefix> prefixes48, int grid_len,
                                   uint64_t seed, uint64_t salt)
    : prefixes_(std::move(prefixes48)), grid_len_(grid_len), seed_(seed), salt_(salt) {
    per_prefix_ = uint64_t{1} << (grid_len - 48);
}

uint64_t GridTargetSource::size() const {
    return prefixes_.size() * per_prefix_;
}

Ipv6Addr128 GridTargetSource::at(uint64_t index) const {
    const Ipv6Prefix& p48 = prefixes_[index / per_prefix_];
    uint64_t block_index = index % per_prefix_;
    Ipv6Prefix block(Ipv6Addr128(p48.base.value | (uint128(block_index) << (128 - grid_len_))),
                     grid_len_);
    return random_target_in(block, mix64(seed_ ^ salt_ ^ index));
}

std::vector<Ipv6Prefix> expand_seeds(CampaignState& state, Transport& transport,
                                     double start_ts) {
    if (state.seeds.empty())
        throw std::runtime_error("no seed prefixes loaded");
    SeedExpansionSource source(state.seeds, state.seed);
    PermutedSchedule schedule(source, state.seed ^ 0x5eedULL);

    ObservationLogWriter writer(state.obs_path("expand"));
    // A /48 is kept when some EUI-64 responder was elicited by it and by no
    // other /48.
    std::unordered_map<uint128, std::pair<uint128, bool>, U128Hash> responder_to_48;
    CampaignOptions options;
    options.run = "expand";
    options.rate = state.rate;
    options.start_ts = start_ts;
    run_campaign(schedule, transport, options, [&](const Observation& obs) {
        writer.write(obs);
        if (!obs.eui64_response())
            return;
        uint128 base48 = Ipv6Prefix(obs.target, 48).base.value;
        auto [it, inserted] =
            responder_to_48.try_emplace(obs.responder->value, std::make_pair(base48, true));
        if (!inserted && it->second.first != base48)
            it->second.second = false;  // same responder from two /48s: not unique
    });
    writer.flush();

    std::set<uint128> kept;
    for (const auto& [responder, entry] : responder_to_48) {
        if (entry.second)
            kept.insert(entry.first);
    }
    std::vector<Ipv6Prefix> validated;
    validated.reserve(kept.size());
    for (uint128 base : kept)
        validated.push_back(Ipv6Prefix(Ipv6Addr128(base), 48));

    state.validated_48s = validated;
    if (int(state.stage) < int(Stage::Density))
        state.stage = Stage::Density;
    record_run(state, "expand", state.sim_day);
    state.save();
    return validated;
}

std::vector<DensityReport> run_density_stage(CampaignState& state, Transport& transport,
                                             double start_ts) {
    state.require_stage(Stage::Density, "density stage");
    if (state.validated_48s.empty())
        throw std::runtime_error("no validated /48s; run expand first");
    GridTargetSource source(state.validated_48s, 56, state.seed, 0xd3510fULL);
    PermutedSchedule schedule(source, state.seed ^ 0xd375ULL);

    ObservationLogWriter writer(state.obs_path("density"));
    std::vector<Observation> observations;
    observations.reserve(source.size());
    CampaignOptions options;
    options.run = "density";
    options.rate = state.rate;
    options.start_ts = start_ts;
    run_campaign(schedule, transport, options, [&](const Observation& obs) {
        writer.write(obs);
        observations.push_back(obs);
    });
    writer.flush();

    std::vector<DensityReport> reports = classify_density(observations, 56);
    state.high_density_48s.clear();
    for (const DensityReport& report : reports) {
        if (report.cls == DensityClass::High)
            state.high_density_48s.push_back(report.prefix);
    }
    if (int(state.stage) < int(Stage::RotationDetect))
        state.stage = Stage::RotationDetect;
    record_run(state, "density", state.sim_day);
    state.save();
    return reports;
}

RotationStageResult run_rotation_stage(CampaignState& state, Transport& transport,
                                       const std::function<void()>& advance_day,
                                       const PrefixToAsTable* bgp, double start_ts) {
    state.require_stage(Stage::RotationDetect, "rotation detection");
    RotationStageResult result;
    if (state.high_density_48s.empty()) {
        if (int(state.stage) < int(Stage::Daily))
            state.stage = Stage::Daily;
        state.save();
        return result;  // nothing high-density: empty verdict set
    }

    GridTargetSource source(state.high_density_48s, 64, state.seed, 0x4070ULL);
    PermutedSchedule schedule(source, state.seed ^ 0x4070ULL);

    auto snapshot = [&](const std::string& run_id, double ts) {
        ObservationLogWriter writer(state.obs_path(run_id));
        std::vector<Observation> observations;
        observations.reserve(source.size());
        CampaignOptions options;
        options.run = run_id;
        options.rate = state.rate;
        options.start_ts = ts;
        run_campaign(schedule, transport, options, [&](const Observation& obs) {
            writer.write(obs);
            observations.push_back(obs);
        });
        writer.flush();
        record_run(state, run_id, state.sim_day);
        return observations;
    };

    std::vector<Observation> first = snapshot("rot0", start_ts + state.sim_day * 86400.0);
    advance_day();
    ++state.sim_day;
    std::vector<Observation> second = snapshot("rot1", start_ts + state.sim_day * 86400.0);

    result.verdicts = detect_rotation(first, second);
    std::map<std::pair<uint32_t, std::string>, uint64_t> counts;
    state.rotating_48s.clear();
    for (const RotationVerdict& verdict : result.verdicts) {
        if (!verdict.rotated)
            continue;
        ++result.rotating_48s;
        state.rotating_48s.push_back(verdict.prefix);
        if (bgp) {
            if (auto entry = bgp->lookup(verdict.prefix.base))
                ++counts[{entry->asn, entry->country}];
            else
                ++counts[{0, "??"}];
        }
    }
    for (const auto& [key, count] : counts)
        result.summary.push_back({key.first, key.second, count});
    std::sort(result.summary.begin(), result.summary.end(),
              [](const RotationSummaryRow& a, const RotationSummaryRow& b) {
                  if (a.rotating_48s != b.rotating_48s)
                      return a.rotating_48s > b.rotating_48s;
                  return a.asn < b.asn;
              });

    if (int(state.stage) < int(Stage::Daily))
        state.stage = Stage::Daily;
    state.save();
    return result;
}

CampaignStats run_daily(CampaignState& state, Transport& transport,
                        const std::function<void()>& advance_day, int days) {
    state.require_stage(Stage::Daily, "daily probing");
    if (state.rotating_48s.empty())
        throw std::runtime_error("no rotating /48s to probe; run detect-rotation first");
    // Same targets, same order, every day: the source and schedule reuse the
    // campaign seed and the rotation-stage salt.
    GridTargetSource source(state.rotating_48s, 64, state.seed, 0x4070ULL);
    PermutedSchedule schedule(source, state.seed ^ 0x4070ULL);

    CampaignStats total;
    for (int d = 0; d < days; ++d) {
        advance_day();
        ++state.sim_day;
        char run_id[16];
        std::snprintf(run_id, sizeof(run_id), "day%03d", state.sim_day);
        ObservationLogWriter writer(state.obs_path(run_id));
        CampaignOptions options;
        options.run = run_id;
        options.rate = state.rate;
        options.start_ts = state.sim_day * 86400.0;
        CampaignStats stats = run_campaign(schedule, transport, options,
                                           [&](const Observation& obs) { writer.write(obs); });
        writer.flush();
        total.observations += stats.observations;
        total.transport_errors += stats.transport_errors;
        total.last_ts = stats.last_ts;
        record_run(state, run_id, state.sim_day);
        state.save();
    }
    return total;
}

std::vector<Observation> load_all_runs(const CampaignState& state) {
    std::vector<Observation> all;
    for (const RunInfo& run : state.runs) {
        for_each_observation(run.path, [&](const Observation& obs) { all.push_back(obs); });
    }
    return all;
}

}  // namespace v6drift
