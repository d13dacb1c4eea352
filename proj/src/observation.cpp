// SPDX-License-Identifier: Apache-2.0
#include "v6drift/observation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace v6drift {

namespace {

constexpr struct {
    ResponseClass cls;
    std::string_view name;
} kClassNames[] = {
    {ResponseClass::AdminProhibited, "admin-prohibited"},
    {ResponseClass::NoRoute, "no-route"},
    {ResponseClass::AddrUnreachable, "addr-unreachable"},
    {ResponseClass::HopLimitExceeded, "hop-limit-exceeded"},
    {ResponseClass::EchoReply, "echo-reply"},
    {ResponseClass::Silent, "silent"},
};

void append_json_string(std::string& out, std::string_view s) {
    out += '"';
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
        } else {
            out += c;
        }
    }
    out += '"';
}

void append_ts(std::string& out, double ts) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", ts);
    out += buf;
}

// Reads a JSON string starting at pos (which must point at '"'); advances pos
// past the closing quote. Returns false on malformed input.
bool take_json_string(std::string_view s, size_t& pos, std::string& out) {
    if (pos >= s.size() || s[pos] != '"')
        return false;
    ++pos;
    out.clear();
    while (pos < s.size()) {
        char c = s[pos++];
        if (c == '"')
            return true;
        if (c == '\\') {
            if (pos >= s.size())
                return false;
            char e = s[pos++];
            if (e == 'u') {
                if (pos + 4 > s.size())
                    return false;
                unsigned v = 0;
                for (int i = 0; i < 4; ++i) {
                    char h = s[pos++];
                    int d = (h >= '0' && h <= '9')   ? h - '0'
                            : (h >= 'a' && h <= 'f') ? h - 'a' + 10
                            : (h >= 'A' && h <= 'F') ? h - 'A' + 10
                                                     : -1;
                    if (d < 0)
                        return false;
                    v = (v << 4) | unsigned(d);
                }
                out += char(v);  // run ids are ASCII
            } else {
                out += e;
            }
        } else {
            out += c;
        }
    }
    return false;
}

bool expect(std::string_view s, size_t& pos, std::string_view token) {
    if (s.substr(pos, token.size()) != token)
        return false;
    pos += token.size();
    return true;
}

}  // namespace

std::string_view to_string(ResponseClass cls) {
    for (const auto& e : kClassNames)
        if (e.cls == cls)
            return e.name;
    return "silent";
}

std::optional<ResponseClass> response_class_from_string(std::string_view s) {
    for (const auto& e : kClassNames)
        if (e.name == s)
            return e.cls;
    return std::nullopt;
}

std::string observation_to_jsonl(const Observation& obs) {
    std::string out;
    out.reserve(128);
    out += "{\"ts\":";
    append_ts(out, obs.ts);
    out += ",\"run\":";
    append_json_string(out, obs.run);
    out += ",\"target\":\"";
    out += obs.target.str();
    out += "\",\"responder\":";
    if (obs.responder) {
        out += '"';
        out += obs.responder->str();
        out += '"';
    } else {
        out += "null";
    }
    out += ",\"class\":\"";
    out += to_string(obs.cls);
    out += "\"}";
    return out;
}

std::optional<Observation> observation_from_jsonl(std::string_view line) {
    Observation obs;
    size_t pos = 0;
    if (!expect(line, pos, "{\"ts\":"))
        return std::nullopt;
    size_t ts_end = line.find(',', pos);
    if (ts_end == std::string_view::npos)
        return std::nullopt;
    obs.ts = std::strtod(std::string(line.substr(pos, ts_end - pos)).c_str(), nullptr);
    pos = ts_end;
    if (!expect(line, pos, ",\"run\":"))
        return std::nullopt;
    if (!take_json_string(line, pos, obs.run))
        return std::nullopt;
    if (!expect(line, pos, ",\"target\":"))
        return std::nullopt;
    std::string text;
    if (!take_json_string(line, pos, text))
        return std::nullopt;
    auto target = Ipv6Addr128::parse(text);
    if (!target)
        return std::nullopt;
    obs.target = *target;
    if (!expect(line, pos, ",\"responder\":"))
        return std::nullopt;
    if (line.substr(pos, 4) == "null") {
        pos += 4;
    } else {
        if (!take_json_string(line, pos, text))
            return std::nullopt;
        auto responder = Ipv6Addr128::parse(text);
        if (!responder)
            return std::nullopt;
        obs.responder = *responder;
    }
    if (!expect(line, pos, ",\"class\":"))
        return std::nullopt;
    if (!take_json_string(line, pos, text))
        return std::nullopt;
    auto cls = response_class_from_string(text);
    if (!cls)
        return std::nullopt;
    obs.cls = *cls;
    if (!expect(line, pos, "}") || pos != line.size())
        return std::nullopt;
    return obs;
}

std::string observation_to_csv(const Observation& obs) {
    std::string out;
    out.reserve(96);
    append_ts(out, obs.ts);
    out += ',';
    out += obs.run;
    out += ',';
    out += obs.target.str();
    out += ',';
    if (obs.responder)
        out += obs.responder->str();
    out += ',';
    out += to_string(obs.cls);
    return out;
}

std::optional<Observation> observation_from_csv(std::string_view line) {
    std::string_view fields[5];
    size_t start = 0;
    for (int i = 0; i < 5; ++i) {
        size_t comma = i < 4 ? line.find(',', start) : line.size();
        if (comma == std::string_view::npos)
            return std::nullopt;
        fields[i] = line.substr(start, comma - start);
        start = comma + 1;
    }
    Observation obs;
    obs.ts = std::strtod(std::string(fields[0]).c_str(), nullptr);
    obs.run = std::string(fields[1]);
    auto target = Ipv6Addr128::parse(fields[2]);
    if (!target)
        return std::nullopt;
    obs.target = *target;
    if (!fields[3].empty()) {
        auto responder = Ipv6Addr128::parse(fields[3]);
        if (!responder)
            return std::nullopt;
        obs.responder = *responder;
    }
    auto cls = response_class_from_string(fields[4]);
    if (!cls)
        return std::nullopt;
    obs.cls = *cls;
    return obs;
}

ObservationLogWriter::ObservationLogWriter(const std::string& path, bool append) : path_(path) {
    int flags = O_WRONLY | O_CREAT | (append ? O_APPEND : O_TRUNC);
    fd_ = ::open(path.c_str(), flags, 0644);
    if (fd_ < 0)
        throw std::runtime_error("cannot open observation log " + path);
    buf_.reserve(1 << 20);
}

ObservationLogWriter::~ObservationLogWriter() {
    flush();
    if (fd_ >= 0)
        ::close(fd_);
}

void ObservationLogWriter::write(const Observation& obs) {
    buf_ += observation_to_jsonl(obs);
    buf_ += '\n';
    ++written_;
    if (buf_.size() >= (1 << 20) - 256)
        flush();
}

void ObservationLogWriter::flush() {
    size_t off = 0;
    while (off < buf_.size()) {
        ssize_t n = ::write(fd_, buf_.data() + off, buf_.size() - off);
        if (n < 0)
            throw std::runtime_error("write failed on " + path_);
        off += size_t(n);
    }
    buf_.clear();
}

std::vector<Observation> read_observation_log(const std::string& path) {
    std::vector<Observation> out;
    for_each_observation(path, [&](const Observation& obs) { out.push_back(obs); });
    return out;
}

void for_each_observation(const std::string& path,
                          const std::function<void(const Observation&)>& fn) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open observation log " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto obs = observation_from_jsonl(line);
        if (!obs)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed observation");
        fn(*obs);
    }
}

void write_observation_csv(const std::string& path, const std::vector<Observation>& observations) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path);
    out << kObservationCsvHeader << '\n';
    for (const auto& obs : observations)
        out << observation_to_csv(obs) << '\n';
}

std::vector<Observation> read_observation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<Observation> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (lineno == 1 && line == kObservationCsvHeader)
            continue;
        if (line.empty())
            continue;
        auto obs = observation_from_csv(line);
        if (!obs)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
        out.push_back(*obs);
    }
    return out;
}

}  // namespace v6drift
