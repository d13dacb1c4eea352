// SPDX-License-Identifier: Apache-2.0
//
// v6drift: measure IPv6 prefix rotation with EUI-64 periphery responses and
// track chosen IIDs across rotations, against a simulated ISP or a replayed
// observation log.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "v6drift/campaign.hpp"
#include "v6drift/figures.hpp"
#include "v6drift/oui.hpp"

using namespace v6drift;

namespace {

struct GlobalOpts {
    std::string state_dir = "state";
    std::string transport;  // sim:<config.json> or replay:<log.jsonl>
    uint64_t seed = 1;
    double rate = 10000.0;
};

struct TransportHandle {
    std::unique_ptr<SimWorld> world;  // present for sim transports
    std::unique_ptr<Transport> transport;

    void advance_day() {
        if (world)
            world->advance_day();
    }
};

TransportHandle open_transport(const CampaignState& state, const std::string& flag) {
    std::string spec = flag;
    if (spec.empty() && !state.sim_config.empty())
        spec = "sim:" + state.sim_config;
    if (spec.empty())
        throw std::runtime_error("no transport: pass --transport sim:<config> or replay:<log>");
    TransportHandle handle;
    if (spec.rfind("sim:", 0) == 0) {
        SimConfig config = SimConfig::load_file(spec.substr(4));
        handle.world = std::make_unique<SimWorld>(std::move(config));
        for (int d = 0; d < state.sim_day; ++d)
            handle.world->advance_day();
        handle.transport = std::make_unique<SimTransport>(*handle.world);
    } else if (spec.rfind("replay:", 0) == 0) {
        handle.transport = std::make_unique<ReplayTransport>(spec.substr(7));
    } else {
        throw std::runtime_error("unknown transport '" + spec +
                                 "' (expected sim:<config> or replay:<log>)");
    }
    return handle;
}

PrefixToAsTable load_bgp(const CampaignState& state, const std::string& flag) {
    std::string path = flag.empty() ? state.dir + "/bgp.csv" : flag;
    return PrefixToAsTable::load_csv_file(path);
}

CampaignState open_or_create(const GlobalOpts& opts) {
    std::ifstream probe(opts.state_dir + "/state.json");
    if (probe)
        return CampaignState::open(opts.state_dir);
    return CampaignState::create(opts.state_dir, opts.seed, opts.rate);
}

// Allocation inference wants a /64-granularity sweep, not the one-probe-per-
// /48 expansion run: prefer the first rotation snapshot, then a daily run.
std::string default_alloc_run(const CampaignState& state) {
    if (state.find_run("rot0"))
        return "rot0";
    for (const RunInfo& run : state.runs)
        if (run.id.rfind("day", 0) == 0)
            return run.id;
    return {};
}

Ipv6Prefix parse_prefix_arg(const std::string& text, const char* what) {
    auto p = Ipv6Prefix::parse(text);
    if (!p)
        throw std::runtime_error(std::string("bad ") + what + ": " + text);
    return *p;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_sim_build(const GlobalOpts& opts, const std::string& config_path) {
    CampaignState state = open_or_create(opts);
    StateLock lock(state.dir);
    SimConfig config = SimConfig::load_file(config_path);
    SimWorld world(config);
    write_file(state.dir + "/bgp.csv", world.bgp_csv());
    write_file(state.dir + "/sim_expanded.json", world.config().to_json_text() + "\n");
    state.sim_config = config_path;
    state.save();
    size_t active = 0;
    for (size_t i = 0; i < world.cpe_count(); ++i)
        if (world.cpe(i).active)
            ++active;
    std::printf("world: %zu ASes, %zu CPEs (%zu active)\n", world.config().ases.size(),
                world.cpe_count(), active);
    std::printf("wrote %s/bgp.csv and %s/sim_expanded.json\n", state.dir.c_str(),
                state.dir.c_str());
    return 0;
}

int cmd_expand(const GlobalOpts& opts, const std::string& seeds_path) {
    CampaignState state = open_or_create(opts);
    StateLock lock(state.dir);
    state.seeds = load_seed_list(
        seeds_path, [](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); });
    TransportHandle handle = open_transport(state, opts.transport);
    SeedExpansionSource source(state.seeds, state.seed);
    std::printf("expanding %zu seed prefixes -> %llu targets\n", state.seeds.size(),
                (unsigned long long)source.size());
    auto validated = expand_seeds(state, *handle.transport);
    std::printf("validated %zu /48s with a unique EUI-64 responder\n", validated.size());
    return 0;
}

int cmd_density(const GlobalOpts& opts) {
    CampaignState state = CampaignState::open(opts.state_dir);
    StateLock lock(state.dir);
    TransportHandle handle = open_transport(state, opts.transport);
    auto reports = run_density_stage(state, *handle.transport);
    size_t high = 0, low = 0, unresponsive = 0;
    for (const auto& r : reports) {
        if (r.cls == DensityClass::High)
            ++high;
        else if (r.cls == DensityClass::Low)
            ++low;
        else
            ++unresponsive;
    }
    std::string csv = "prefix,probes,unique_eui,density,class\n";
    char buf[64];
    for (const auto& r : reports) {
        csv += r.prefix.str();
        std::snprintf(buf, sizeof(buf), ",%llu,%llu,%.6f,", (unsigned long long)r.probes_sent,
                      (unsigned long long)r.unique_eui_responders, r.density);
        csv += buf;
        csv += to_string(r.cls);
        csv += '\n';
    }
    write_file(state.dir + "/density.csv", csv);
    std::printf("density: %zu high, %zu low, %zu unresponsive (of %zu probed /48s)\n", high, low,
                unresponsive, reports.size());
    return 0;
}

int cmd_detect_rotation(const GlobalOpts& opts, const std::string& bgp_flag) {
    CampaignState state = CampaignState::open(opts.state_dir);
    StateLock lock(state.dir);
    TransportHandle handle = open_transport(state, opts.transport);
    std::optional<PrefixToAsTable> bgp;
    try {
        bgp = load_bgp(state, bgp_flag);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "warning: no BGP table (%s); summary will be unattributed\n",
                     e.what());
    }
    auto result = run_rotation_stage(state, *handle.transport,
                                     [&] { handle.advance_day(); },
                                     bgp ? &*bgp : nullptr);
    std::printf("rotating /48s: %llu of %zu probed\n", (unsigned long long)result.rotating_48s,
                result.verdicts.size());
    for (const auto& row : result.summary)
        std::printf("  AS%-8u %-2s %llu\n", row.asn, row.country.c_str(),
                    (unsigned long long)row.rotating_48s);
    return 0;
}

int cmd_daily_run(const GlobalOpts& opts, int days) {
    CampaignState state = CampaignState::open(opts.state_dir);
    StateLock lock(state.dir);
    TransportHandle handle = open_transport(state, opts.transport);
    auto stats = run_daily(state, *handle.transport, [&] { handle.advance_day(); }, days);
    std::printf("daily probing: %d day(s), %llu observations (%llu transport errors)\n", days,
                (unsigned long long)stats.observations,
                (unsigned long long)stats.transport_errors);
    return 0;
}

int cmd_infer(const GlobalOpts& opts, const std::string& bgp_flag, size_t min_iids) {
    CampaignState state = CampaignState::open(opts.state_dir);
    PrefixToAsTable bgp = load_bgp(state, bgp_flag);
    std::vector<Observation> observations = load_all_runs(state);
    PerAsInferenceOptions options;
    options.min_iids = min_iids;
    options.alloc_run = default_alloc_run(state);
    auto rows = infer_per_as(observations, bgp, options);
    std::string csv = inference_rows_to_csv(rows);
    write_file(state.dir + "/infer.csv", csv);
    write_file(state.dir + "/infer.json", inference_rows_to_json(rows) + "\n");
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_pathology(const GlobalOpts& opts, const std::string& bgp_flag) {
    CampaignState state = CampaignState::open(opts.state_dir);
    PrefixToAsTable bgp = load_bgp(state, bgp_flag);
    std::vector<Observation> observations = load_all_runs(state);
    PathologyReport report = pathology_scan(observations, bgp);
    std::string out = "{\"multi_as_iids\":[";
    for (size_t i = 0; i < report.multi_as_iids.size(); ++i) {
        const auto& m = report.multi_as_iids[i];
        if (i)
            out += ',';
        out += "{\"iid\":\"" + m.iid.str() + "\"";
        if (auto mac = eui64_iid_to_mac(m.iid))
            out += ",\"mac\":\"" + mac->str() + "\"";
        out += ",\"as_count\":" + std::to_string(m.asns.size()) + ",\"asns\":[";
        for (size_t a = 0; a < m.asns.size(); ++a)
            out += (a ? "," : "") + std::to_string(m.asns[a]);
        out += "]}";
    }
    out += "],\"provider_changers\":[";
    for (size_t i = 0; i < report.provider_changers.size(); ++i) {
        const auto& c = report.provider_changers[i];
        if (i)
            out += ',';
        out += "{\"iid\":\"" + c.iid.str() + "\",\"switch_day\":" + std::to_string(c.switch_day) +
               ",\"asns\":[";
        for (size_t a = 0; a < c.asn_sequence.size(); ++a)
            out += (a ? "," : "") + std::to_string(c.asn_sequence[a]);
        out += "]}";
    }
    out += "]}\n";
    write_file(state.dir + "/pathology.json", out);
    std::printf("multi-AS IIDs: %zu, provider changers: %zu (details in %s/pathology.json)\n",
                report.multi_as_iids.size(), report.provider_changers.size(), state.dir.c_str());
    return 0;
}

int cmd_track(const GlobalOpts& opts, const std::string& bgp_flag, int days,
              const std::string& targets_spec, int stop_after) {
    CampaignState state = CampaignState::open(opts.state_dir);
    StateLock lock(state.dir);
    state.require_stage(Stage::Daily, "tracking");
    PrefixToAsTable bgp = load_bgp(state, bgp_flag);
    TransportHandle handle = open_transport(state, opts.transport);

    std::vector<Observation> observations = load_all_runs(state);
    PerAsInferenceOptions inference_options;
    inference_options.alloc_run = default_alloc_run(state);
    auto inferences = infer_per_as_full(observations, bgp, inference_options);

    // Resolve targets: "auto:N" picks one rotating IID per AS, else a file of
    // IIDs (hex-group form, one per line).
    std::vector<std::pair<Iid64, uint32_t>> targets;  // (iid, asn)
    if (targets_spec.rfind("auto:", 0) == 0) {
        int want = std::stoi(targets_spec.substr(5));
        std::set<uint64_t> chosen;
        // First pass: one rotating IID per AS; then top up from any AS.
        for (const auto& [asn, inference] : inferences) {
            if (int(targets.size()) >= want)
                break;
            for (const auto& [iid, range] : inference.pool.per_iid) {
                if (range.bits > 0 && chosen.insert(iid).second) {
                    targets.push_back({Iid64(iid), asn});
                    break;
                }
            }
        }
        for (const auto& [asn, inference] : inferences) {
            if (int(targets.size()) >= want)
                break;
            for (const auto& [iid, range] : inference.pool.per_iid) {
                if (int(targets.size()) >= want)
                    break;
                if (range.bits > 0 && chosen.insert(iid).second)
                    targets.push_back({Iid64(iid), asn});
            }
        }
        if (int(targets.size()) < want)
            throw std::runtime_error("only " + std::to_string(targets.size()) +
                                     " rotating IIDs observed; asked for " +
                                     targets_spec.substr(5));
    } else {
        std::ifstream in(targets_spec);
        if (!in)
            throw std::runtime_error("cannot open target list " + targets_spec);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            auto addr = Ipv6Addr128::parse("::" + line);  // four hex groups = low 64
            if (!addr)
                throw std::runtime_error("bad IID: " + line);
            Iid64 iid = Iid64::of(*addr);
            uint32_t asn = 0;
            for (const auto& [candidate_asn, inference] : inferences) {
                if (inference.pool.per_iid.count(iid.value)) {
                    asn = candidate_asn;
                    break;
                }
            }
            if (asn == 0)
                throw std::runtime_error("IID " + line + " has no inference evidence");
            targets.push_back({iid, asn});
        }
    }

    std::vector<TrackingPlan> plans;
    for (const auto& [iid, asn] : targets) {
        const PerAsInference& inference = inferences.at(asn);
        plans.push_back(make_plan(iid, inference.alloc, inference.pool));
        plans.back().stop_after_days_unseen = stop_after;
    }

    auto records = track_campaign(plans, *handle.transport, state.seed, days,
                                  [&] { handle.advance_day(); }, state.sim_day + 1);
    state.sim_day += days;
    state.save();

    std::string detail;
    for (size_t t = 0; t < plans.size(); ++t) {
        for (const TrackDayRecord& record : records[t]) {
            detail += tracking_day_to_jsonl(plans[t].target_iid, record);
            detail += '\n';
        }
    }

    std::vector<TrackingTargetReport> reports;
    for (size_t t = 0; t < plans.size(); ++t) {
        uint32_t asn = targets[t].second;
        TrackingTargetReport report = summarize(plans[t].target_iid, records[t]);
        report.asn = asn;
        Ipv6Addr128 sample = Ipv6Addr128::from_halves(
            inferences.at(asn).pool.per_iid.at(plans[t].target_iid.value).min_high64,
            plans[t].target_iid.value);
        if (auto entry = bgp.lookup(sample)) {
            report.bgp_len = entry->prefix.length;
            report.country = entry->country;
        }
        reports.push_back(report);
    }
    std::string csv = tracking_report_to_csv(reports);
    write_file(state.dir + "/tracking.csv", csv);
    write_file(state.dir + "/tracking_days.jsonl", detail);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_report(const GlobalOpts& opts, const std::string& bgp_flag,
               const std::string& export_csv_run) {
    CampaignState state = CampaignState::open(opts.state_dir);
    if (!export_csv_run.empty()) {
        const RunInfo* run = state.find_run(export_csv_run);
        if (!run)
            throw std::runtime_error("no run '" + export_csv_run + "' in this campaign");
        std::string out = state.dir + "/obs/" + export_csv_run + ".csv";
        write_observation_csv(out, read_observation_log(run->path));
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }
    std::printf("campaign %s: stage %s, seed %llu, sim day %d\n", state.dir.c_str(),
                std::string(to_string(state.stage)).c_str(), (unsigned long long)state.seed,
                state.sim_day);
    std::printf("  seeds: %zu, validated /48s: %zu, high-density: %zu, rotating: %zu\n",
                state.seeds.size(), state.validated_48s.size(), state.high_density_48s.size(),
                state.rotating_48s.size());
    std::optional<PrefixToAsTable> bgp;
    try {
        bgp = load_bgp(state, bgp_flag);
    } catch (const std::exception&) {
    }
    if (bgp && !state.rotating_48s.empty()) {
        std::map<std::pair<uint32_t, std::string>, uint64_t> by_as;
        std::map<std::string, uint64_t> by_country;
        for (const auto& prefix : state.rotating_48s) {
            if (auto entry = bgp->lookup(prefix.base)) {
                ++by_as[{entry->asn, entry->country}];
                ++by_country[entry->country];
            }
        }
        std::vector<std::pair<uint64_t, std::pair<uint32_t, std::string>>> rows;
        for (const auto& [key, count] : by_as)
            rows.push_back({count, key});
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::printf("  rotating /48s by ASN (top 5):\n");
        uint64_t shown = 0, shown_count = 0;
        for (const auto& [count, key] : rows) {
            if (shown < 5) {
                std::printf("    AS%-8u %-2s %llu\n", key.first, key.second.c_str(),
                            (unsigned long long)count);
                shown_count += count;
            }
            ++shown;
        }
        if (rows.size() > 5)
            std::printf("    %zu other ASNs: %llu\n", rows.size() - 5,
                        (unsigned long long)(state.rotating_48s.size() - shown_count));
    }
    std::ifstream tracking(state.dir + "/tracking.csv");
    if (tracking) {
        std::printf("  tracking results (%s/tracking.csv):\n", state.dir.c_str());
        std::string line;
        while (std::getline(tracking, line))
            std::printf("    %s\n", line.c_str());
    }
    return 0;
}

int cmd_figure(const GlobalOpts& opts, const std::string& kind_str, const std::string& out,
               const std::string& prefix_str, const std::string& run_id,
               const std::string& bgp_flag, const std::string& oui_path, size_t min_iids,
               int series_count, int days) {
    CampaignState state = CampaignState::open(opts.state_dir);
    auto kind = figure_kind_from_string(kind_str);
    if (!kind)
        throw std::runtime_error("unknown figure kind: " + kind_str);
    std::string out_path = out.empty() ? state.figures_dir() + "/" + kind_str + ".svg" : out;

    switch (*kind) {
        case FigureKind::AllocationHeatmap: {
            Ipv6Prefix prefix = parse_prefix_arg(prefix_str, "--prefix");
            const RunInfo* run = state.find_run(run_id.empty() ? "rot0" : run_id);
            if (!run)
                throw std::runtime_error("no such run in state; pass --run");
            auto observations = read_observation_log(run->path);
            emit_allocation_heatmap(out_path, observations, prefix, prefix.str());
            break;
        }
        case FigureKind::CdfAllocBits: {
            PrefixToAsTable bgp = load_bgp(state, bgp_flag);
            auto observations = load_all_runs(state);
            CdfSeries per_iid{"EUI-64 IIDs", {}};
            CdfSeries per_as{"AS medians", {}};
            PerAsInferenceOptions inference_options;
            inference_options.alloc_run = default_alloc_run(state);
            for (const auto& [asn, inference] :
                 infer_per_as_full(observations, bgp, inference_options)) {
                for (const auto& [iid, range] : inference.alloc.per_iid)
                    per_iid.values.push_back(double(64 - range.bits));
                if (inference.alloc.median_alloc_len)
                    per_as.values.push_back(double(*inference.alloc.median_alloc_len));
            }
            emit_cdf_figure(out_path, "Inferred allocation size",
                            "allocation prefix length", {per_iid, per_as});
            break;
        }
        case FigureKind::CdfPoolVsBgp: {
            PrefixToAsTable bgp = load_bgp(state, bgp_flag);
            auto observations = load_all_runs(state);
            CdfSeries pools{"rotation pool", {}};
            CdfSeries bgps{"BGP prefix", {}};
            for (const auto& [asn, inference] : infer_per_as_full(observations, bgp)) {
                if (inference.pool.median_pool_len)
                    pools.values.push_back(double(*inference.pool.median_pool_len));
                if (inference.pool.bgp_len)
                    bgps.values.push_back(double(*inference.pool.bgp_len));
            }
            emit_cdf_figure(out_path, "Inferred rotation pool vs BGP prefix size per AS",
                            "prefix length", {pools, bgps});
            break;
        }
        case FigureKind::CdfPrefixesPerIid: {
            auto observations = load_all_runs(state);
            std::map<uint64_t, std::set<uint64_t>> prefixes_per_iid;
            for (const auto& obs : observations) {
                if (obs.eui64_response())
                    prefixes_per_iid[obs.responder->low64()].insert(obs.responder->high64());
            }
            CdfSeries series{"EUI-64 IIDs", {}};
            for (const auto& [iid, prefixes] : prefixes_per_iid)
                series.values.push_back(double(prefixes.size()));
            emit_cdf_figure(out_path, "Distinct /64 prefixes per EUI-64 IID",
                            "distinct /64 prefixes", {series}, /*log_x=*/true);
            break;
        }
        case FigureKind::CdfHomogeneity: {
            PrefixToAsTable bgp = load_bgp(state, bgp_flag);
            OuiRegistry registry = OuiRegistry::load_file(oui_path);
            auto observations = load_all_runs(state);
            std::map<uint32_t, std::set<uint64_t>> iids_per_as;
            for (const auto& obs : observations) {
                if (!obs.eui64_response())
                    continue;
                if (auto entry = bgp.lookup(*obs.responder))
                    iids_per_as[entry->asn].insert(obs.responder->low64());
            }
            CdfSeries series{"ASes", {}};
            for (const auto& [asn, iids] : iids_per_as) {
                std::vector<Iid64> vec;
                vec.reserve(iids.size());
                for (uint64_t v : iids)
                    vec.push_back(Iid64(v));
                if (auto report = homogeneity(vec, asn, registry, min_iids))
                    series.values.push_back(report->homogeneity);
            }
            emit_cdf_figure(out_path, "Manufacturer homogeneity per AS",
                            "fraction of IIDs from the top vendor", {series});
            break;
        }
        case FigureKind::IidTimeline: {
            Ipv6Prefix pool = parse_prefix_arg(prefix_str, "--prefix");
            auto observations = load_all_runs(state);
            std::map<uint64_t, std::vector<std::pair<double, double>>> per_iid;
            std::map<uint64_t, std::set<uint64_t>> distinct;
            for (const auto& obs : observations) {
                if (!obs.eui64_response() || !pool.contains(*obs.responder))
                    continue;
                double day = obs.ts / 86400.0;
                double offset = double(obs.responder->high64() - pool.base.high64());
                per_iid[obs.responder->low64()].push_back({day, offset});
                distinct[obs.responder->low64()].insert(obs.responder->high64());
            }
            // Most-moved IIDs make the most interesting lines.
            std::vector<std::pair<size_t, uint64_t>> ranked;
            for (const auto& [iid, prefixes] : distinct)
                ranked.push_back({prefixes.size(), iid});
            std::sort(ranked.begin(), ranked.end(),
                      [](const auto& a, const auto& b) { return a > b; });
            std::vector<TimelineSeries> series;
            for (int i = 0; i < series_count && i < int(ranked.size()); ++i) {
                uint64_t iid = ranked[i].second;
                auto points = per_iid[iid];
                std::sort(points.begin(), points.end());
                series.push_back({"IID #" + std::to_string(i + 1), std::move(points)});
            }
            emit_timeline_figure(out_path, "Assigned /64 prefix over time in " + pool.str(),
                                 "/64 offset in pool", series);
            break;
        }
        case FigureKind::DensityByDay: {
            // Hourly world: count EUI addresses per /48 of the pool each hour.
            if (state.sim_config.empty())
                throw std::runtime_error("density-by-day needs a sim transport (run sim-build)");
            Ipv6Prefix pool = parse_prefix_arg(prefix_str, "--prefix");
            SimConfig config = SimConfig::load_file(state.sim_config);
            int alloc_len = -1;
            for (const auto& as : config.ases)
                for (const auto& pc : as.pools)
                    if (pc.prefix == pool)
                        alloc_len = pc.alloc_len;
            if (alloc_len < 0)
                throw std::runtime_error("pool " + pool.str() + " not found in sim config");
            SimWorld world(std::move(config));
            world.set_hourly(true);
            uint64_t blocks = uint64_t{1} << (alloc_len - pool.length);
            int n48 = 1 << std::max(0, 48 - pool.length);
            std::vector<TimelineSeries> series(static_cast<size_t>(n48));
            for (int i = 0; i < n48; ++i) {
                Ipv6Prefix p48(
                    Ipv6Addr128(pool.base.value | (uint128(uint64_t(i)) << 80)), 48);
                series[size_t(i)].name = p48.str();
            }
            for (int hour_index = 0; hour_index < days * 24; ++hour_index) {
                world.advance_hour();
                std::vector<std::set<uint128>> seen(static_cast<size_t>(n48));
                for (uint64_t block = 0; block < blocks; ++block) {
                    Ipv6Prefix block_prefix(
                        Ipv6Addr128::from_halves(
                            pool.base.high64() + (block << (64 - alloc_len)), 0),
                        alloc_len);
                    Ipv6Addr128 target =
                        random_target_in(block_prefix, mix64(state.seed ^ block));
                    ProbeResult result = world.probe(target);
                    if (result.responder && Iid64::of(*result.responder).is_eui64()) {
                        uint64_t off48 =
                            (result.responder->high64() - pool.base.high64()) >> 16;
                        if (off48 < uint64_t(n48))
                            seen[size_t(off48)].insert(result.responder->value);
                    }
                }
                double day = double(hour_index + 1) / 24.0;
                for (int i = 0; i < n48; ++i)
                    series[size_t(i)].points.push_back({day, double(seen[size_t(i)].size())});
            }
            emit_timeline_figure(out_path, "EUI-64 address density by /48 in " + pool.str(),
                                 "unique EUI-64 addresses", series);
            break;
        }
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IPv6 prefix-rotation measurement toolkit"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--state", opts.state_dir, "campaign state directory")->capture_default_str();
    app.add_option("--transport", opts.transport, "sim:<config.json> or replay:<log.jsonl>");
    app.add_option("--seed", opts.seed, "campaign seed")->capture_default_str();
    app.add_option("--rate", opts.rate, "probes per second")->capture_default_str();

    std::string config_path, seeds_path, bgp_flag, targets_spec = "auto:10";
    std::string kind_str, out_path, prefix_str, run_id, oui_path;
    int days = 7, stop_after = 7, series_count = 3;
    size_t infer_min_iids = 1, homogeneity_min_iids = 100;

    auto* sim_build = app.add_subcommand("sim-build", "validate a sim config; emit bgp.csv");
    sim_build->add_option("--config", config_path, "sim world JSON")->required();

    auto* expand = app.add_subcommand("expand", "probe seed /32s, validate EUI-64 /48s");
    expand->add_option("--seeds", seeds_path, "seed CIDR list, one per line")->required();

    app.add_subcommand("density", "one probe per /56; classify /48 density");

    auto* rotation = app.add_subcommand("detect-rotation", "two same-order snapshots a day apart");
    rotation->add_option("--bgp", bgp_flag, "BGP snapshot CSV (prefix,asn,country)");

    auto* daily = app.add_subcommand("daily-run", "same-seed daily snapshots of rotating /48s");
    daily->add_option("--days", days, "days to probe")->capture_default_str();

    auto* infer = app.add_subcommand("infer", "allocation and rotation-pool inference per AS");
    infer->add_option("--bgp", bgp_flag, "BGP snapshot CSV");
    infer->add_option("--min-iids", infer_min_iids, "minimum IIDs per AS")
        ->capture_default_str();

    auto* track = app.add_subcommand("track", "track chosen EUI-64 IIDs across rotations");
    track->add_option("--bgp", bgp_flag, "BGP snapshot CSV");
    track->add_option("--days", days, "tracking days")->capture_default_str();
    track->add_option("--targets", targets_spec, "auto:N or a file of IIDs")
        ->capture_default_str();
    track->add_option("--stop-after", stop_after, "stop probing after N unseen days")
        ->capture_default_str();

    auto* pathology = app.add_subcommand("pathology", "multi-AS IIDs and provider changers");
    pathology->add_option("--bgp", bgp_flag, "BGP snapshot CSV");

    std::string export_csv_run;
    auto* report = app.add_subcommand("report", "campaign status and summary tables");
    report->add_option("--bgp", bgp_flag, "BGP snapshot CSV");
    report->add_option("--export-csv", export_csv_run, "export one observation run as CSV");

    auto* figure = app.add_subcommand("figure", "emit an SVG figure");
    figure->add_option("--kind", kind_str,
                       "allocation-heatmap|cdf-alloc-bits|cdf-pool-vs-bgp|cdf-prefixes-per-iid|"
                       "cdf-homogeneity|iid-timeline|density-by-day")
        ->required();
    figure->add_option("--out", out_path, "output SVG path (default under state/figures)");
    figure->add_option("--prefix", prefix_str, "target /48 or pool prefix");
    figure->add_option("--run", run_id, "observation run id (heatmap input)");
    figure->add_option("--bgp", bgp_flag, "BGP snapshot CSV");
    figure->add_option("--oui", oui_path, "OUI registry CSV (homogeneity)");
    figure->add_option("--min-iids", homogeneity_min_iids, "homogeneity: minimum IIDs per AS")
        ->capture_default_str();
    figure->add_option("--series", series_count, "timeline: number of IIDs to draw")
        ->capture_default_str();
    figure->add_option("--days", days, "density-by-day: days to simulate")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_build->parsed())
            return cmd_sim_build(opts, config_path);
        if (expand->parsed())
            return cmd_expand(opts, seeds_path);
        if (app.get_subcommand("density")->parsed())
            return cmd_density(opts);
        if (rotation->parsed())
            return cmd_detect_rotation(opts, bgp_flag);
        if (daily->parsed())
            return cmd_daily_run(opts, days);
        if (infer->parsed())
            return cmd_infer(opts, bgp_flag, infer_min_iids);
        if (track->parsed())
            return cmd_track(opts, bgp_flag, days, targets_spec, stop_after);
        if (pathology->parsed())
            return cmd_pathology(opts, bgp_flag);
        if (report->parsed())
            return cmd_report(opts, bgp_flag, export_csv_run);
        if (figure->parsed())
            return cmd_figure(opts, kind_str, out_path, prefix_str, run_id, bgp_flag, oui_path,
                              homogeneity_min_iids, series_count, days);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
