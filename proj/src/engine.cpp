// SPDX-License-Identifier: Apache-2.0
#include "v6drift/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace v6drift {

double TokenBucket::ready_time(double now) const {
    double tokens = std::min(capacity_, tokens_ + (now - last_) * rate_);
    if (tokens >= 1.0)
        return now;
    return now + (1.0 - tokens) / rate_;
}

void TokenBucket::refill(double t) {
    tokens_ = std::min(capacity_, tokens_ + (t - last_) * rate_);
    last_ = t;
}

void TokenBucket::take(double t) {
    refill(t);
    tokens_ -= 1.0;
}

namespace {

ProbeResult safe_probe(Transport& transport, Ipv6Addr128 target, uint64_t& errors) {
    try {
        return transport.probe(target);
    } catch (const std::exception&) {
        ++errors;
        return {std::nullopt, ResponseClass::Silent};
    }
}

}  // namespace

CampaignStats run_campaign(const PermutedSchedule& schedule, Transport& transport,
                           const CampaignOptions& options, const ObservationSink& sink) {
    if (options.rate <= 0.0)
        throw std::invalid_argument("campaign rate must be positive");
    if (options.in_flight < 1)
        throw std::invalid_argument("in_flight must be at least 1");

    CampaignStats stats;
    TokenBucket bucket(options.rate, options.start_ts);
    double now = options.start_ts;

    const uint64_t total = schedule.size();
    const bool parallel = transport.concurrent_ok() && options.in_flight > 1;
    const uint64_t chunk = parallel ? uint64_t(options.in_flight) : 1;

    Observation obs;
    obs.run = options.run;

    std::vector<double> send_ts(chunk);
    std::vector<Ipv6Addr128> targets(chunk);
    std::vector<ProbeResult> results(chunk);

    uint64_t seq = 0;
    bool first = true;
    while (seq < total) {
        uint64_t n = std::min<uint64_t>(chunk, total - seq);
        for (uint64_t i = 0; i < n; ++i) {
            double t = bucket.ready_time(now);
            bucket.take(t);
            now = t;
            send_ts[i] = t;
            targets[i] = schedule.target_at(seq + i);
        }
        if (parallel && n > 1) {
            unsigned workers = std::min<unsigned>(
                std::max(1u, std::thread::hardware_concurrency()), unsigned(n));
            std::vector<uint64_t> worker_errors(workers, 0);
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (uint64_t i = w; i < n; i += workers)
                        results[i] = safe_probe(transport, targets[i], worker_errors[w]);
                });
            }
            for (auto& th : pool)
                th.join();
            for (uint64_t e : worker_errors)
                stats.transport_errors += e;
        } else {
            for (uint64_t i = 0; i < n; ++i)
                results[i] = safe_probe(transport, targets[i], stats.transport_errors);
        }
        for (uint64_t i = 0; i < n; ++i) {
            obs.ts = send_ts[i];
            obs.target = targets[i];
            obs.responder = results[i].responder;
            obs.cls = results[i].cls;
            if (obs.cls == ResponseClass::Silent)
                obs.responder.reset();  // silent observations carry no responder
            sink(obs);
            ++stats.observations;
            if (first) {
                stats.first_ts = obs.ts;
                first = false;
            }
            stats.last_ts = obs.ts;
        }
        seq += n;
    }
    return stats;
}

double expected_probes_to_hit(int pool_len, int alloc_len) {
    if (alloc_len < pool_len)
        throw std::invalid_argument("allocation cannot be larger than its pool");
    if (alloc_len > 64)
        throw std::invalid_argument("allocation length beyond /64");
    int k = alloc_len - pool_len;
    double blocks = std::ldexp(1.0, k);
    return (blocks + 1.0) / 2.0;
}

}  // namespace v6drift
