// SPDX-License-Identifier: Apache-2.0
#ifndef V6DRIFT_FIGURES_HPP
#define V6DRIFT_FIGURES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v6drift/addr.hpp"
#include "v6drift/observation.hpp"

namespace v6drift {

enum class FigureKind {
    AllocationHeatmap,
    CdfAllocBits,
    CdfPoolVsBgp,
    CdfPrefixesPerIid,
    CdfHomogeneity,
    IidTimeline,
    DensityByDay,
};

std::optional<FigureKind> figure_kind_from_string(std::string_view s);

/// Stable 24-bit color for a responder address; never the no-response black.
uint32_t responder_color(Ipv6Addr128 responder);

/// 256x256 grid over one /48: the cell at (x = 8th address byte, y = 7th
/// address byte) is one probed /64, colored by a hash of the responder that
/// answered there, black when nothing answered. Writes a self-contained
/// SVG 1.1 document.
void emit_allocation_heatmap(const std::string& path, std::span<const Observation> observations,
                             const Ipv6Prefix& prefix48, const std::string& title);

struct CdfSeries {
    std::string name;
    std::vector<double> values;
};

/// Empirical CDF steps for a value set: (value, fraction <= value), sorted.
std::vector<std::pair<double, double>> cdf_points(std::vector<double> values);

/// Empirical CDF polylines with axes; an empty input produces a valid figure
/// annotated "no data".
void emit_cdf_figure(const std::string& path, const std::string& title,
                     const std::string& x_label, std::vector<CdfSeries> series,
                     bool log_x = false);

struct TimelineSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (day, /64 offset in pool)
};

void emit_timeline_figure(const std::string& path, const std::string& title,
                          const std::string& y_label, std::vector<TimelineSeries> series);

}  // namespace v6drift

#endif
