// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_OUI_HPP
#define V6DRIFT_OUI_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "v6drift/addr.hpp"

namespace v6drift {

/// Vendor bucket for IIDs whose OUI has no registry entry.
inline constexpr const char* kUnknownVendor = "unknown";

/// IEEE OUI (MA-L) registry: 24-bit assignment -> organization name.
/// Read-only after load.
class OuiRegistry {
public:
    /// Accepts the IEEE MA-L CSV export (columns "Assignment" and
    /// "Organization Name") or a compact `oui,org` CSV. Bad rows are skipped
    /// and counted; an input with zero usable rows throws.
    static OuiRegistry load(std::istream& in);
    static OuiRegistry load_file(const std::string& path);

    void add(uint32_t oui24, std::string org) { map_[oui24] = std::move(org); }

    std::optional<std::string> lookup(uint32_t oui24) const;
    std::optional<std::string> lookup(const MacAddr& mac) const { return lookup(mac.oui24()); }

    size_t size() const { return map_.size(); }
    size_t skipped_rows() const { return skipped_; }

private:
    std::unordered_map<uint32_t, std::string> map_;
    size_t skipped_ = 0;
};

struct HomogeneityReport {
    uint32_t asn = 0;
    size_t total_unique_iids = 0;
    std::string top_vendor;
    size_t top_vendor_iids = 0;
    double homogeneity = 0.0;  // top_vendor_iids / total_unique_iids
    std::map<std::string, size_t> vendor_histogram;
};

/// Fraction of unique EUI-64 IIDs belonging to the most common device vendor
/// in one AS. Unregistered OUIs count under kUnknownVendor. Returns nothing
/// when fewer than `min_iids` unique IIDs are supplied.
std::optional<HomogeneityReport> homogeneity(std::span<const Iid64> iids, uint32_t asn,
                                             const OuiRegistry& registry, size_t min_iids = 100);

}  // namespace v6drift

#endif
