// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_ENGINE_HPP
#define V6DRIFT_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "v6drift/observation.hpp"
#include "v6drift/schedule.hpp"
#include "v6drift/transport.hpp"

namespace v6drift {

/// Token bucket with one second of burst capacity. Time is whatever clock the
/// caller passes in (the scheduler runs it on a simulated clock).
class TokenBucket {
public:
    TokenBucket(double rate, double start_time)
        : rate_(rate), capacity_(rate), tokens_(1.0), last_(start_time) {}

    /// Earliest time >= now at which one token is available.
    double ready_time(double now) const;
    /// Consumes one token at time `t` (which must be >= ready_time).
    void take(double t);
    double rate() const { return rate_; }

private:
    void refill(double t);

    double rate_;
    double capacity_;
    double tokens_;
    double last_ = 0.0;
};

struct CampaignOptions {
    std::string run;               // stamped on every observation
    double rate = 10000.0;         // probes per second, > 0
    int in_flight = 1;             // max outstanding probes, >= 1
    double start_ts = 0.0;         // campaign clock origin, seconds
    double silent_timeout = 2.0;   // a live transport would wait this long
};

struct CampaignStats {
    uint64_t observations = 0;
    uint64_t transport_errors = 0;
    double first_ts = 0.0;
    double last_ts = 0.0;
};

using ObservationSink = std::function<void(const Observation&)>;

/// Issues every probe of `schedule` through `transport`, paced by a token
/// bucket at `rate`, and hands exactly one Observation per ProbeSpec to the
/// sink in schedule order with nondecreasing timestamps. A throwing transport
/// yields a Silent observation and an error count; the campaign never aborts
/// on a per-probe failure. Probes are issued concurrently (up to in_flight)
/// only when the transport declares concurrent_ok.
CampaignStats run_campaign(const PermutedSchedule& schedule, Transport& transport,
                           const CampaignOptions& options, const ObservationSink& sink);

/// Expected probes until a uniformly placed allocation is hit when sweeping
/// one probe per allocation-sized block of the pool in random order:
/// (N + 1) / 2 for N = 2^(alloc_len - pool_len) blocks, i.e. about 2^(k-1).
double expected_probes_to_hit(int pool_len, int alloc_len);

}  // namespace v6drift

#endif
