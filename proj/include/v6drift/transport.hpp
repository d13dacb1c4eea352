// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_TRANSPORT_HPP
#define V6DRIFT_TRANSPORT_HPP

#include <deque>
#include <optional>
#include <string>
#include <unordered_map>

#include "v6drift/addr.hpp"
#include "v6drift/observation.hpp"

namespace v6drift {

struct ProbeResult {
    std::optional<Ipv6Addr128> responder;
    ResponseClass cls = ResponseClass::Silent;
};

/// Abstract probe transport. Implementations answer one target at a time and
/// must be deterministic given their own internal seed, or declare otherwise.
///
/// A live ICMPv6 transport would implement this interface over a raw socket:
/// send an Echo Request to `target`, wait up to the campaign timeout for an
/// Echo Reply / Destination Unreachable / Hop Limit Exceeded, and map the
/// ICMPv6 type/code to a ResponseClass with the outer source address as the
/// responder. No such transport is shipped in this repository; only the
/// simulator and replay transports below exist, and the scheduler is written
/// against this interface so one could be added out-of-tree.
class Transport {
public:
    virtual ~Transport() = default;

    virtual ProbeResult probe(Ipv6Addr128 target) = 0;

    /// True when probe() may be called from several threads between
    /// synchronization points.
    virtual bool concurrent_ok() const { return false; }
};

/// Replays a recorded observation log: each probe pops the next recorded
/// outcome for that target. Targets never recorded, or probed more often than
/// recorded, answer Silent.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::string& log_path);

    ProbeResult probe(Ipv6Addr128 target) override;

    uint64_t unmatched() const { return unmatched_; }

private:
    std::unordered_map<uint128, std::deque<ProbeResult>, U128Hash> recorded_;
    uint64_t unmatched_ = 0;
};

}  // namespace v6drift

#endif
