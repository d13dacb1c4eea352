// SPDX-License-Identifier: Apache-2.0
#include "v6drift/oui.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace v6drift {

namespace {

// Splits one CSV line honoring double quotes ("" escapes a quote).
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::optional<uint32_t> parse_oui24(const std::string& s) {
    // "3810D5" or "38:10:d5" / "38-10-d5"
    uint32_t v = 0;
    int digits = 0;
    for (char c : s) {
        if (c == ':' || c == '-')
            continue;
        int h;
        if (c >= '0' && c <= '9')
            h = c - '0';
        else if (c >= 'a' && c <= 'f')
            h = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            h = c - 'A' + 10;
        else
            return std::nullopt;
        v = (v << 4) | uint32_t(h);
        if (++digits > 6)
            return std::nullopt;
    }
    if (digits != 6)
        return std::nullopt;
    return v;
}

}  // namespace

OuiRegistry OuiRegistry::load(std::istream& in) {
    OuiRegistry reg;
    std::string line;
    int col_oui = 0, col_org = 1;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_csv(line);
        if (first) {
            first = false;
            // IEEE export header: Registry,Assignment,Organization Name,...
            auto it_ass = std::find(fields.begin(), fields.end(), "Assignment");
            auto it_org = std::find(fields.begin(), fields.end(), "Organization Name");
            if (it_ass != fields.end() && it_org != fields.end()) {
                col_oui = int(it_ass - fields.begin());
                col_org = int(it_org - fields.begin());
                continue;
            }
            if (fields.size() >= 2 && (fields[0] == "oui" || fields[0] == "oui_hex")) {
                col_oui = 0;
                col_org = 1;
                continue;
            }
            // No header: fall through and treat as a compact data row.
        }
        if (int(fields.size()) <= std::max(col_oui, col_org)) {
            ++reg.skipped_;
            continue;
        }
        auto oui = parse_oui24(fields[col_oui]);
        if (!oui || fields[col_org].empty()) {
            ++reg.skipped_;
            continue;
        }
        reg.add(*oui, fields[col_org]);
    }
    if (reg.map_.empty())
        throw std::runtime_error("OUI registry: no usable rows");
    return reg;
}

OuiRegistry OuiRegistry::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return load(in);
}

std::optional<std::string> OuiRegistry::lookup(uint32_t oui24) const {
    auto it = map_.find(oui24);
    if (it == map_.end())
        return std::nullopt;
    return it->second;
}

std::optional<HomogeneityReport> homogeneity(std::span<const Iid64> iids, uint32_t asn,
                                             const OuiRegistry& registry, size_t min_iids) {
    std::set<uint64_t> unique;
    for (Iid64 iid : iids)
        unique.insert(iid.value);
    if (unique.size() < min_iids)
        return std::nullopt;

    HomogeneityReport report;
    report.asn = asn;
    report.total_unique_iids = unique.size();
    for (uint64_t v : unique) {
        auto mac = eui64_iid_to_mac(Iid64(v));
        std::string vendor = kUnknownVendor;
        if (mac) {
            if (auto org = registry.lookup(*mac))
                vendor = *org;
        }
        ++report.vendor_histogram[vendor];
    }
    for (const auto& [vendor, count] : report.vendor_histogram) {
        if (count > report.top_vendor_iids) {
            report.top_vendor_iids = count;
            report.top_vendor = vendor;
        }
    }
    report.homogeneity = double(report.top_vendor_iids) / double(report.total_unique_iids);
    return report;
}

}  // namespace v6drift
