// SPDX-License-Identifier: Apache-2.0
#include "v6drift/transport.hpp"

namespace v6drift {

ReplayTransport::ReplayTransport(const std::string& log_path) {
    for_each_observation(log_path, [&](const Observation& obs) {
        recorded_[obs.target.value].push_back({obs.responder, obs.cls});
    });
}

ProbeResult ReplayTransport::probe(Ipv6Addr128 target) {
    auto it = recorded_.find(target.value);
    if (it == recorded_.end() || it->second.empty()) {
        ++unmatched_;
        return {std::nullopt, ResponseClass::Silent};
    }
    ProbeResult result = it->second.front();
    it->second.pop_front();
    return result;
}

}  // namespace v6drift
