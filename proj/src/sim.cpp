// SPDX-License-Identifier: Apache-2.0
#include "v6drift/sim.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace v6drift {

namespace {

using nlohmann::json;

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

struct SplitMix {
    uint64_t s;
    uint64_t next() { return mix64(s++); }
    double unit() { return double(next() >> 11) * 0x1.0p-53; }
};

std::string pool_name(const AsConfig& as, int pool_idx) {
    return "AS" + std::to_string(as.asn) + " pool " + std::to_string(pool_idx) + " (" +
           as.pools[pool_idx].prefix.str() + ")";
}

IidMode iid_mode_from_string(const std::string& s) {
    if (s == "eui64")
        return IidMode::Eui64;
    if (s == "privacy")
        return IidMode::Privacy;
    throw std::runtime_error("unknown iid_mode: " + s);
}

std::optional<ResponseClass> response_policy_from_string(const std::string& s) {
    if (s == "silent-drop")
        return std::nullopt;
    auto cls = response_class_from_string(s);
    if (!cls || *cls == ResponseClass::Silent || *cls == ResponseClass::EchoReply)
        throw std::runtime_error("not a CPE error policy: " + s);
    return cls;
}

std::string response_policy_to_string(const std::optional<ResponseClass>& cls) {
    return cls ? std::string(to_string(*cls)) : "silent-drop";
}

Ipv6Prefix parse_prefix_field(const json& j, const char* what) {
    auto p = Ipv6Prefix::parse(j.get<std::string>());
    if (!p)
        throw std::runtime_error(std::string("bad ") + what + ": " + j.get<std::string>());
    return *p;
}

RotationSchedule rotation_from_json(const json& j) {
    RotationSchedule sched;
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else {
        kind = j.at("kind").get<std::string>();
        if (j.contains("step_64s"))
            sched.step_64s = j["step_64s"].get<uint64_t>();
        if (j.contains("period_days"))
            sched.period_days = j["period_days"].get<int>();
    }
    if (kind == "none")
        sched.kind = RotationKind::None;
    else if (kind == "daily-increment")
        sched.kind = RotationKind::DailyIncrement;
    else if (kind == "daily-uniform")
        sched.kind = RotationKind::DailyUniform;
    else if (kind == "periodic-uniform")
        sched.kind = RotationKind::PeriodicUniform;
    else
        throw std::runtime_error("unknown rotation kind: " + kind);
    return sched;
}

json rotation_to_json(const RotationSchedule& sched) {
    switch (sched.kind) {
        case RotationKind::None:
            return "none";
        case RotationKind::DailyUniform:
            return "daily-uniform";
        case RotationKind::DailyIncrement:
            return json{{"kind", "daily-increment"}, {"step_64s", sched.step_64s}};
        case RotationKind::PeriodicUniform:
            return json{{"kind", "periodic-uniform"}, {"period_days", sched.period_days}};
    }
    return "none";
}

CpeSpec cpe_from_json(const json& j) {
    CpeSpec cpe;
    auto mac = MacAddr::parse(j.at("mac").get<std::string>());
    if (!mac)
        throw std::runtime_error("bad mac: " + j.at("mac").get<std::string>());
    cpe.mac = *mac;
    cpe.pool = j.value("pool", 0);
    cpe.iid_mode = iid_mode_from_string(j.value("iid_mode", "eui64"));
    cpe.error_class = response_policy_from_string(j.value("response", "addr-unreachable"));
    cpe.drop_prob = j.value("drop_prob", 0.0);
    if (j.contains("join_day") && !j["join_day"].is_null())
        cpe.join_day = j["join_day"].get<int>();
    if (j.contains("leave_day") && !j["leave_day"].is_null())
        cpe.leave_day = j["leave_day"].get<int>();
    if (j.contains("provider_change") && !j["provider_change"].is_null()) {
        const auto& pc = j["provider_change"];
        cpe.provider_change =
            ProviderChange{pc.at("day").get<int>(), pc.at("asn").get<uint32_t>(),
                           pc.value("pool", 0)};
    }
    return cpe;
}

json cpe_to_json(const CpeSpec& cpe) {
    json j{{"mac", cpe.mac.str()},
           {"pool", cpe.pool},
           {"iid_mode", cpe.iid_mode == IidMode::Eui64 ? "eui64" : "privacy"},
           {"response", response_policy_to_string(cpe.error_class)},
           {"drop_prob", cpe.drop_prob}};
    if (cpe.join_day)
        j["join_day"] = *cpe.join_day;
    if (cpe.leave_day)
        j["leave_day"] = *cpe.leave_day;
    if (cpe.provider_change)
        j["provider_change"] = json{{"day", cpe.provider_change->day},
                                    {"asn", cpe.provider_change->to_asn},
                                    {"pool", cpe.provider_change->to_pool}};
    return j;
}

AsConfig as_from_json(const json& j) {
    AsConfig as;
    as.asn = j.at("asn").get<uint32_t>();
    as.country = j.value("country", "ZZ");
    as.bgp_prefix = parse_prefix_field(j.at("bgp_prefix"), "bgp_prefix");
    std::string unalloc = j.value("unallocated_response", "silent");
    if (unalloc == "silent")
        as.unallocated = UnallocatedResponse::Silent;
    else if (unalloc == "no-route")
        as.unallocated = UnallocatedResponse::NoRoute;
    else
        throw std::runtime_error("unknown unallocated_response: " + unalloc);
    for (const auto& pj : j.value("pools", json::array())) {
        PoolConfig pool;
        pool.prefix = parse_prefix_field(pj.at("prefix"), "pool prefix");
        pool.alloc_len = pj.at("alloc_len").get<int>();
        if (pj.contains("rotation"))
            pool.rotation = rotation_from_json(pj["rotation"]);
        as.pools.push_back(pool);
    }
    for (const auto& cj : j.value("fleet", json::array()))
        as.fleet.push_back(cpe_from_json(cj));
    for (const auto& gj : j.value("fleet_gen", json::array())) {
        FleetGenSpec gen;
        gen.count = gj.at("count").get<int>();
        gen.pool = gj.value("pool", 0);
        for (const auto& mix : gj.value("oui_mix", json::array())) {
            auto mac = MacAddr::parse(mix.at(0).get<std::string>() + ":00:00:00");
            if (!mac)
                throw std::runtime_error("bad oui in oui_mix");
            gen.oui_mix.push_back({mac->oui(), mix.at(1).get<double>()});
        }
        if (gen.oui_mix.empty())
            gen.oui_mix.push_back({{0x00, 0x15, 0x5d}, 1.0});
        gen.eui64_fraction = gj.value("eui64_fraction", 1.0);
        gen.error_class = response_policy_from_string(gj.value("response", "addr-unreachable"));
        gen.drop_prob = gj.value("drop_prob", 0.0);
        as.fleet_gen.push_back(gen);
    }
    return as;
}

json as_to_json(const AsConfig& as) {
    json pools = json::array();
    for (const auto& pool : as.pools)
        pools.push_back(json{{"prefix", pool.prefix.str()},
                             {"alloc_len", pool.alloc_len},
                             {"rotation", rotation_to_json(pool.rotation)}});
    json fleet = json::array();
    for (const auto& cpe : as.fleet)
        fleet.push_back(cpe_to_json(cpe));
    return json{{"asn", as.asn},
                {"country", as.country},
                {"bgp_prefix", as.bgp_prefix.str()},
                {"unallocated_response",
                 as.unallocated == UnallocatedResponse::Silent ? "silent" : "no-route"},
                {"pools", pools},
                {"fleet", fleet}};
}

}  // namespace

void SimConfig::finalize() {
    uint64_t mac_counter = 1;
    for (size_t a = 0; a < ases.size(); ++a) {
        AsConfig& as = ases[a];
        if (as.pools.empty())
            throw std::runtime_error("AS" + std::to_string(as.asn) + " has no pools");
        for (size_t p = 0; p < as.pools.size(); ++p) {
            PoolConfig& pool = as.pools[p];
            if (!as.bgp_prefix.contains(pool.prefix))
                throw std::runtime_error(pool_name(as, int(p)) + " not inside " +
                                         as.bgp_prefix.str());
            if (pool.alloc_len < pool.prefix.length || pool.alloc_len > 64)
                throw std::runtime_error(pool_name(as, int(p)) + ": alloc_len must be in [" +
                                         std::to_string(pool.prefix.length) + ",64]");
            if (pool.rotation.kind == RotationKind::DailyIncrement) {
                uint64_t block_64s = uint64_t{1} << (64 - pool.alloc_len);
                if (pool.rotation.step_64s == 0 || pool.rotation.step_64s % block_64s != 0)
                    throw std::runtime_error(pool_name(as, int(p)) +
                                             ": step_64s must be a positive multiple of the "
                                             "allocation span (" +
                                             std::to_string(block_64s) + " /64s)");
            }
            if (pool.rotation.kind == RotationKind::PeriodicUniform &&
                pool.rotation.period_days < 1)
                throw std::runtime_error(pool_name(as, int(p)) + ": period_days must be >= 1");
        }
        // Expand compact fleet specs into concrete CPEs.
        for (size_t g = 0; g < as.fleet_gen.size(); ++g) {
            const FleetGenSpec& gen = as.fleet_gen[g];
            double total_weight = 0;
            for (const auto& [oui, w] : gen.oui_mix)
                total_weight += w;
            if (total_weight <= 0)
                throw std::runtime_error("fleet_gen oui_mix weights must be positive");
            SplitMix rng{mix64(seed ^ (uint64_t(a) << 40) ^ (uint64_t(g) << 20) ^ 0xf1ee7ULL)};
            for (int i = 0; i < gen.count; ++i) {
                CpeSpec cpe;
                double pick = rng.unit() * total_weight;
                std::array<uint8_t, 3> oui = gen.oui_mix.back().first;
                for (const auto& [candidate, w] : gen.oui_mix) {
                    if (pick < w) {
                        oui = candidate;
                        break;
                    }
                    pick -= w;
                }
                cpe.mac.bytes = {oui[0], oui[1], oui[2], uint8_t(mac_counter >> 16),
                                 uint8_t(mac_counter >> 8), uint8_t(mac_counter)};
                ++mac_counter;
                cpe.pool = gen.pool;
                cpe.iid_mode =
                    rng.unit() < gen.eui64_fraction ? IidMode::Eui64 : IidMode::Privacy;
                cpe.error_class = gen.error_class;
                cpe.drop_prob = gen.drop_prob;
                as.fleet.push_back(cpe);
            }
        }
        as.fleet_gen.clear();
    }
    // probe() relies on pools and BGP prefixes being pairwise disjoint.
    std::vector<std::pair<Ipv6Prefix, std::string>> all_pools;
    for (const AsConfig& as : ases) {
        for (size_t p = 0; p < as.pools.size(); ++p)
            all_pools.push_back({as.pools[p].prefix, pool_name(as, int(p))});
    }
    for (size_t i = 0; i < all_pools.size(); ++i) {
        for (size_t j = i + 1; j < all_pools.size(); ++j) {
            if (all_pools[i].first.contains(all_pools[j].first) ||
                all_pools[j].first.contains(all_pools[i].first))
                throw std::runtime_error("pools overlap: " + all_pools[i].second + " and " +
                                         all_pools[j].second);
        }
    }
    for (size_t i = 0; i < ases.size(); ++i) {
        for (size_t j = i + 1; j < ases.size(); ++j) {
            if (ases[i].bgp_prefix.contains(ases[j].bgp_prefix) ||
                ases[j].bgp_prefix.contains(ases[i].bgp_prefix))
                throw std::runtime_error("BGP prefixes overlap: AS" + std::to_string(ases[i].asn) +
                                         " and AS" + std::to_string(ases[j].asn));
        }
    }

    // Validate fleet entries (after expansion so generated CPEs are covered).
    for (AsConfig& as : ases) {
        for (CpeSpec& cpe : as.fleet) {
            if (cpe.pool < 0 || cpe.pool >= int(as.pools.size()))
                throw std::runtime_error("AS" + std::to_string(as.asn) +
                                         ": CPE references missing pool " +
                                         std::to_string(cpe.pool));
            if (cpe.drop_prob < 0 || cpe.drop_prob > 1)
                throw std::runtime_error("drop_prob outside [0,1]");
            if (cpe.provider_change) {
                auto target = std::find_if(ases.begin(), ases.end(), [&](const AsConfig& o) {
                    return o.asn == cpe.provider_change->to_asn;
                });
                if (target == ases.end() || cpe.provider_change->to_pool < 0 ||
                    cpe.provider_change->to_pool >= int(target->pools.size()))
                    throw std::runtime_error("provider_change targets missing AS" +
                                             std::to_string(cpe.provider_change->to_asn));
            }
        }
    }
}

SimConfig SimConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    SimConfig config;
    config.seed = j.value("seed", uint64_t{0});
    if (j.contains("ases")) {
        for (const auto& aj : j["ases"])
            config.ases.push_back(as_from_json(aj));
    } else if (j.contains("asn")) {
        config.ases.push_back(as_from_json(j));  // single-AS document
    } else {
        throw std::runtime_error("sim config needs \"ases\" or a single-AS object");
    }
    config.finalize();
    return config;
}

SimConfig SimConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string SimConfig::to_json_text() const {
    json ases_json = json::array();
    for (const auto& as : ases)
        ases_json.push_back(as_to_json(as));
    return json{{"seed", seed}, {"ases", ases_json}}.dump(2);
}

SimConfig inject_pathologies(SimConfig config, const PathologySpec& spec) {
    if (spec.empty())
        return config;
    config.finalize();
    if (spec.duplicate_mac_as_count > 0) {
        if (spec.duplicate_mac_as_count > int(config.ases.size()))
            throw std::runtime_error("cannot duplicate a MAC into " +
                                     std::to_string(spec.duplicate_mac_as_count) +
                                     " ASes; world has " + std::to_string(config.ases.size()));
        MacAddr mac = spec.duplicate_mac.value_or(MacAddr{});  // default all-zero
        for (int i = 0; i < spec.duplicate_mac_as_count; ++i) {
            CpeSpec cpe;
            cpe.mac = mac;
            cpe.pool = 0;
            config.ases[i].fleet.push_back(cpe);
        }
    }
    if (spec.provider_changer_count > 0) {
        if (spec.provider_changer_count > int(config.ases.size()) || config.ases.size() < 2)
            throw std::runtime_error("not enough ASes for " +
                                     std::to_string(spec.provider_changer_count) +
                                     " provider changers");
        for (int i = 0; i < spec.provider_changer_count; ++i) {
            AsConfig& as = config.ases[i];
            auto cpe = std::find_if(as.fleet.begin(), as.fleet.end(), [&](const CpeSpec& c) {
                return !c.provider_change && c.iid_mode == IidMode::Eui64;
            });
            if (cpe == as.fleet.end())
                throw std::runtime_error("AS" + std::to_string(as.asn) +
                                         " has no CPE eligible to change provider");
            uint32_t to_asn = config.ases[(i + 1) % config.ases.size()].asn;
            cpe->provider_change = ProviderChange{spec.change_day, to_asn, 0};
        }
    }
    config.finalize();
    return config;
}

// ---------------------------------------------------------------------------

SimWorld::SimWorld(SimConfig config) : config_(std::move(config)) {
    config_.finalize();
    for (size_t a = 0; a < config_.ases.size(); ++a) {
        const AsConfig& as = config_.ases[a];
        as_pool_base_.push_back({as.asn, int(pools_.size())});
        for (const PoolConfig& pool : as.pools) {
            PoolRt rt;
            rt.as_idx = int(a);
            rt.prefix = pool.prefix;
            rt.alloc_len = pool.alloc_len;
            rt.sched = pool.rotation;
            rt.span_slots = uint64_t{1} << (pool.alloc_len - pool.prefix.length);
            rt.step_slots = pool.rotation.kind == RotationKind::DailyIncrement
                                ? pool.rotation.step_64s >> (64 - pool.alloc_len)
                                : 0;
            pools_.push_back(std::move(rt));
        }
        for (const CpeSpec& spec : as.fleet) {
            CpeRt cpe;
            cpe.spec = spec;
            cpe.as_idx = int(a);
            cpes_.push_back(std::move(cpe));
        }
    }

    // Capacity check before any placement so overfull pools fail loudly.
    std::vector<uint64_t> active_per_pool(pools_.size(), 0);
    for (const CpeRt& cpe : cpes_)
        if (cpe_should_be_active(cpe, 0))
            ++active_per_pool[cpe_pool_on(cpe, 0)];
    for (size_t p = 0; p < pools_.size(); ++p) {
        if (active_per_pool[p] > pools_[p].span_slots) {
            const AsConfig& as = config_.ases[pools_[p].as_idx];
            throw std::runtime_error("pool " + pools_[p].prefix.str() + " in AS" +
                                     std::to_string(as.asn) + " overfull: " +
                                     std::to_string(active_per_pool[p]) + " CPEs for " +
                                     std::to_string(pools_[p].span_slots) + " slots");
        }
    }

    for (size_t p = 0; p < pools_.size(); ++p) {
        SplitMix rng{mix64(config_.seed ^ 0xb111dULL ^ (uint64_t(p) << 32))};
        uint64_t state = rng.next();
        for (uint32_t c = 0; c < cpes_.size(); ++c) {
            if (!cpe_should_be_active(cpes_[c], 0) || cpe_pool_on(cpes_[c], 0) != int(p))
                continue;
            assign(c, int(p), pick_free_slot(pools_[p], state));
        }
    }
}

bool SimWorld::cpe_should_be_active(const CpeRt& cpe, int day) const {
    int join = cpe.spec.join_day.value_or(0);
    if (day < join)
        return false;
    if (cpe.spec.leave_day && day >= *cpe.spec.leave_day)
        return false;
    return true;
}

int SimWorld::cpe_pool_on(const CpeRt& cpe, int day) const {
    uint32_t asn = config_.ases[cpe.as_idx].asn;
    int pool = cpe.spec.pool;
    if (cpe.spec.provider_change && day >= cpe.spec.provider_change->day) {
        asn = cpe.spec.provider_change->to_asn;
        pool = cpe.spec.provider_change->to_pool;
    }
    for (const auto& [entry_asn, base] : as_pool_base_)
        if (entry_asn == asn)
            return base + pool;
    throw std::logic_error("pool lookup for unknown ASN");  // excluded by finalize()
}

uint64_t SimWorld::pick_free_slot(const PoolRt& pool, uint64_t& rng_state) const {
    uint64_t span = pool.span_slots;
    uint64_t used = pool.slot_to_cpe.size();
    if (used >= span)
        throw std::runtime_error("pool " + pool.prefix.str() + " overfull during placement");
    if (used * 2 < span) {
        // Sparse: rejection-sample (span is a power of two, so masking is unbiased).
        for (;;) {
            uint64_t slot = mix64(rng_state++) & (span - 1);
            if (!pool.slot_to_cpe.count(slot))
                return slot;
        }
    }
    // Dense: index uniformly into the free set.
    uint64_t pick = mix64(rng_state++) % (span - used);
    for (uint64_t slot = 0; slot < span; ++slot) {
        if (pool.slot_to_cpe.count(slot))
            continue;
        if (pick == 0)
            return slot;
        --pick;
    }
    throw std::logic_error("free-slot scan exhausted");
}

void SimWorld::assign(uint32_t cpe_idx, int pool_idx, uint64_t desired_slot) {
    PoolRt& pool = pools_[pool_idx];
    uint64_t slot = desired_slot;
    if (pool.slot_to_cpe.count(slot)) {
        // Deterministic linear re-probe to the next free slot.
        ++rotation_collisions_;
        uint64_t tried = 0;
        while (pool.slot_to_cpe.count(slot)) {
            slot = (slot + 1) & (pool.span_slots - 1);
            if (++tried > pool.span_slots)
                throw std::runtime_error("pool " + pool.prefix.str() + " overfull during rotation");
        }
    }
    CpeRt& cpe = cpes_[cpe_idx];
    bool base_changed = !cpe.active || cpe.pool_idx != pool_idx || cpe.slot != slot;
    pool.slot_to_cpe[slot] = cpe_idx;
    cpe.pool_idx = pool_idx;
    cpe.slot = slot;
    cpe.active = true;
    if (base_changed) {
        ++cpe.iid_epoch;
        refresh_iid(cpe);
        record(cpe_idx);
    }
}

void SimWorld::remove(uint32_t cpe_idx) {
    CpeRt& cpe = cpes_[cpe_idx];
    if (!cpe.active)
        return;
    pools_[cpe.pool_idx].slot_to_cpe.erase(cpe.slot);
    cpe.active = false;
    cpe.pool_idx = -1;
}

void SimWorld::refresh_iid(CpeRt& cpe) {
    if (cpe.spec.iid_mode == IidMode::Eui64) {
        cpe.current_iid = mac_to_eui64_iid(cpe.spec.mac).value;
        return;
    }
    uint32_t cpe_idx = uint32_t(&cpe - cpes_.data());
    uint64_t iid = mix64(mix64(config_.seed ^ (uint64_t(cpe_idx) + 1) * kGolden) ^ cpe.iid_epoch);
    if (Iid64(iid).is_eui64())
        iid ^= uint64_t{1} << 32;  // keep privacy IIDs out of the EUI-64 subset
    cpe.current_iid = iid;
}

uint64_t SimWorld::wan_high64(const CpeRt& cpe) const {
    const PoolRt& pool = pools_[cpe.pool_idx];
    return pool.prefix.base.high64() + (cpe.slot << (64 - pool.alloc_len));
}

void SimWorld::record(uint32_t cpe_idx) {
    const CpeRt& cpe = cpes_[cpe_idx];
    history_.push_back({day_, cpe_idx, config_.ases[pools_[cpe.pool_idx].as_idx].asn,
                        wan_high64(cpe), pools_[cpe.pool_idx].alloc_len});
}

std::vector<SimWorld::Move> SimWorld::plan_day_moves() {
    std::vector<Move> moves;

    // Departures and provider changes free their slots at the day boundary.
    std::vector<uint32_t> joiners;
    for (uint32_t c = 0; c < cpes_.size(); ++c) {
        CpeRt& cpe = cpes_[c];
        bool want_active = cpe_should_be_active(cpe, day_);
        int want_pool = want_active ? cpe_pool_on(cpe, day_) : -1;
        if (cpe.active && (!want_active || want_pool != cpe.pool_idx))
            remove(c);
        if (want_active && !cpe.active)
            joiners.push_back(c);
    }

    // Rotations: every member of a firing pool moves; all movers release
    // their slots first so the shift is applied against a clean map.
    for (size_t p = 0; p < pools_.size(); ++p) {
        PoolRt& pool = pools_[p];
        bool fires = false;
        switch (pool.sched.kind) {
            case RotationKind::None:
                break;
            case RotationKind::DailyIncrement:
            case RotationKind::DailyUniform:
                fires = true;
                break;
            case RotationKind::PeriodicUniform:
                fires = day_ % pool.sched.period_days == 0;
                break;
        }
        if (!fires || pool.slot_to_cpe.empty())
            continue;

        std::vector<std::pair<uint32_t, uint64_t>> movers;  // (cpe, old slot)
        movers.reserve(pool.slot_to_cpe.size());
        for (const auto& [slot, cpe_idx] : pool.slot_to_cpe)
            movers.push_back({cpe_idx, slot});
        std::sort(movers.begin(), movers.end());
        pool.slot_to_cpe.clear();
        for (auto& [cpe_idx, slot] : movers) {
            cpes_[cpe_idx].active = false;
            cpes_[cpe_idx].pool_idx = -1;
        }

        uint64_t state =
            mix64(config_.seed ^ 0xda117ULL ^ (uint64_t(day_) << 24) ^ (uint64_t(p) << 48));
        std::unordered_map<uint64_t, bool> planned;
        for (const auto& [cpe_idx, old_slot] : movers) {
            uint64_t slot;
            if (pool.sched.kind == RotationKind::DailyIncrement) {
                slot = (old_slot + pool.step_slots) & (pool.span_slots - 1);
            } else {
                do {
                    slot = mix64(state++) & (pool.span_slots - 1);
                } while (pool.slot_to_cpe.count(slot) || planned.count(slot));
            }
            planned[slot] = true;
            int hour = int(mix64(config_.seed ^ 0x40a2ULL ^ (uint64_t(day_) << 20) ^ cpe_idx) % 6);
            moves.push_back({cpe_idx, int(p), slot, hour});
        }
    }

    // Joins land at the day boundary (hour 0), after rotations are planned.
    std::unordered_map<int, std::unordered_map<uint64_t, bool>> planned_per_pool;
    for (const Move& move : moves)
        planned_per_pool[move.to_pool][move.to_slot] = true;
    uint64_t join_state = mix64(config_.seed ^ 0x10b5ULL ^ (uint64_t(day_) << 16));
    for (uint32_t c : joiners) {
        int pool_idx = cpe_pool_on(cpes_[c], day_);
        PoolRt& pool = pools_[pool_idx];
        auto& planned = planned_per_pool[pool_idx];
        if (pool.slot_to_cpe.size() + planned.size() >= pool.span_slots)
            throw std::runtime_error("pool " + pool.prefix.str() + " overfull at day " +
                                     std::to_string(day_));
        uint64_t slot;
        do {
            slot = mix64(join_state++) & (pool.span_slots - 1);
        } while (pool.slot_to_cpe.count(slot) || planned.count(slot));
        planned[slot] = true;
        moves.push_back({c, pool_idx, slot, 0});
    }
    return moves;
}

void SimWorld::apply_move(const Move& move) {
    assign(move.cpe, move.to_pool, move.to_slot);
}

void SimWorld::advance_day() {
    if (hourly_)
        throw std::logic_error("advance_day is invalid in hourly mode; tick advance_hour");
    ++day_;
    for (const Move& move : plan_day_moves())
        apply_move(move);
}

void SimWorld::advance_hour() {
    if (!hourly_)
        throw std::logic_error("enable hourly mode before advance_hour");
    ++hour_;
    if (hour_ == 24) {
        hour_ = 0;
        ++day_;
        staged_ = plan_day_moves();
    }
    if (hour_ < 6) {
        for (const Move& move : staged_)
            if (move.hour == hour_)
                apply_move(move);
    }
}

ProbeResult SimWorld::probe(Ipv6Addr128 target) const {
    int containing_as = -1;
    for (const PoolRt& pool : pools_) {
        if (!pool.prefix.contains(target))
            continue;
        containing_as = pool.as_idx;
        uint64_t offset = target.high64() - pool.prefix.base.high64();
        uint64_t slot = offset >> (64 - pool.alloc_len);
        auto it = pool.slot_to_cpe.find(slot);
        if (it == pool.slot_to_cpe.end())
            break;  // free slot: fall through to the AS unallocated policy
        const CpeRt& cpe = cpes_[it->second];
        if (cpe.spec.drop_prob > 0) {
            double u = double(mix64(config_.seed ^ mix64(uint64_t(day_) * kGolden ^
                                                         target.high64()) ^
                                    target.low64()) >>
                              11) *
                       0x1.0p-53;
            if (u < cpe.spec.drop_prob)
                return {std::nullopt, ResponseClass::Silent};
        }
        if (!cpe.spec.error_class)
            return {std::nullopt, ResponseClass::Silent};
        Ipv6Addr128 wan = Ipv6Addr128::from_halves(wan_high64(cpe), cpe.current_iid);
        if (target == wan)
            return {wan, ResponseClass::EchoReply};
        return {wan, *cpe.spec.error_class};
    }
    if (containing_as < 0) {
        for (size_t a = 0; a < config_.ases.size(); ++a) {
            if (config_.ases[a].bgp_prefix.contains(target)) {
                containing_as = int(a);
                break;
            }
        }
    }
    if (containing_as >= 0 &&
        config_.ases[containing_as].unallocated == UnallocatedResponse::NoRoute) {
        Ipv6Addr128 router(config_.ases[containing_as].bgp_prefix.base.value | 1);
        return {router, ResponseClass::NoRoute};
    }
    return {std::nullopt, ResponseClass::Silent};
}

SimWorld::CpeView SimWorld::cpe(size_t index) const {
    const CpeRt& rt = cpes_[index];
    CpeView view;
    view.mac = rt.spec.mac;
    view.iid_mode = rt.spec.iid_mode;
    view.active = rt.active;
    view.current_iid = Iid64(rt.current_iid);
    if (rt.active) {
        view.asn = config_.ases[pools_[rt.pool_idx].as_idx].asn;
        view.allocation = Ipv6Prefix(Ipv6Addr128::from_halves(wan_high64(rt), 0),
                                     pools_[rt.pool_idx].alloc_len);
    } else {
        view.asn = config_.ases[rt.as_idx].asn;
    }
    return view;
}

std::string SimWorld::bgp_csv() const {
    std::string out = "prefix,asn,country\n";
    for (const AsConfig& as : config_.ases) {
        out += as.bgp_prefix.str();
        out += ',';
        out += std::to_string(as.asn);
        out += ',';
        out += as.country;
        out += '\n';
    }
    return out;
}

}  // namespace v6drift
