// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_OBSERVATION_HPP
#define V6DRIFT_OBSERVATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "v6drift/addr.hpp"

namespace v6drift {

/// ICMPv6 outcome classes a probe can elicit. Silent means the probe timed
/// out with no reply and therefore carries no responder address.
enum class ResponseClass : uint8_t {
    AdminProhibited,
    NoRoute,
    AddrUnreachable,
    HopLimitExceeded,
    EchoReply,
    Silent,
};

std::string_view to_string(ResponseClass cls);
std::optional<ResponseClass> response_class_from_string(std::string_view s);

/// One probe outcome. responder is present exactly when cls != Silent.
struct Observation {
    double ts = 0.0;  // seconds since epoch
    std::string run;
    Ipv6Addr128 target;
    std::optional<Ipv6Addr128> responder;
    ResponseClass cls = ResponseClass::Silent;

    bool eui64_response() const {
        return responder && Iid64::of(*responder).is_eui64();
    }

    friend bool operator==(const Observation& a, const Observation& b) {
        return a.ts == b.ts && a.run == b.run && a.target == b.target &&
               a.responder == b.responder && a.cls == b.cls;
    }
};

/// One JSON object per line: {"ts":...,"run":"...","target":"...",
/// "responder":"..."|null,"class":"..."}. Writing then reading then writing
/// again reproduces the file byte for byte.
std::string observation_to_jsonl(const Observation& obs);
std::optional<Observation> observation_from_jsonl(std::string_view line);

/// CSV with header `ts,run,target,responder,class`; responder empty for
/// silent rows. Same round-trip guarantee.
inline constexpr std::string_view kObservationCsvHeader = "ts,run,target,responder,class";
std::string observation_to_csv(const Observation& obs);
std::optional<Observation> observation_from_csv(std::string_view line);

/// Buffered append-only JSONL writer.
class ObservationLogWriter {
public:
    explicit ObservationLogWriter(const std::string& path, bool append = false);
    ~ObservationLogWriter();
    ObservationLogWriter(const ObservationLogWriter&) = delete;
    ObservationLogWriter& operator=(const ObservationLogWriter&) = delete;

    void write(const Observation& obs);
    void flush();
    uint64_t written() const { return written_; }

private:
    std::string path_;
    std::string buf_;
    int fd_ = -1;
    uint64_t written_ = 0;
};

std::vector<Observation> read_observation_log(const std::string& path);
void for_each_observation(const std::string& path,
                          const std::function<void(const Observation&)>& fn);

void write_observation_csv(const std::string& path, const std::vector<Observation>& observations);
std::vector<Observation> read_observation_csv(const std::string& path);

}  // namespace v6drift

#endif
