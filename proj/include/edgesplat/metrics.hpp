// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/sketch.hpp"
#include "edgesplat/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace edgesplat {

struct EdgePointSet {
    std::vector<Vec3> points;
    double resolution = 0.0;
    /// Set when the source edge set had no live sketches.
    bool empty_source = false;
};

/// Arc-length samples of every live sketch at `resolution`, concatenated.
EdgePointSet resample(const SketchCollection &edges, double resolution);

/// Uniform hash grid for exact nearest-neighbour and radius queries.
class PointGrid {
  public:
    PointGrid(std::span<const Vec3> points, double cell);

    /// Euclidean distance to the nearest stored point.
    [[nodiscard]] double nearest_distance(const Vec3 &q) const;
    /// True if some stored point lies within distance tau (inclusive).
    /// Requires tau <= cell size.
    [[nodiscard]] bool any_within(const Vec3 &q, double tau) const;

  private:
    using Key = std::array<std::int64_t, 3>;
    struct KeyHash {
        std::size_t operator()(const Key &k) const noexcept;
    };
    [[nodiscard]] Key key_of(const Vec3 &p) const;

    std::vector<Vec3> points_;
    double cell_;
    std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

/// Hash-grid cell used by the standalone metric functions (m).
inline constexpr double kMetricGridCell = 0.02;

/// Mean distance from pred points to their nearest gt point.
double accuracy(const EdgePointSet &pred, const EdgePointSet &gt);
/// Mean distance from gt points to their nearest pred point.
double completeness(const EdgePointSet &pred, const EdgePointSet &gt);

struct Prf {
    double precision = 0.0; ///< percent
    double recall = 0.0;    ///< percent
    double fscore = 0.0;    ///< percent
};

/// Harmonic mean of precision and recall (both in percent); 0 when both are 0.
double fscore(double precision, double recall);

Prf prf(const EdgePointSet &pred, const EdgePointSet &gt, double tau);

struct EvalReport {
    double accuracy_mm = 0.0;
    double completeness_mm = 0.0;
    std::vector<double> taus_mm;
    std::vector<Prf> prf;
    std::size_t edge_count = 0;
};

/// {5, 10, 20} mm.
std::span<const double> default_taus();

/// A, C and P/R/F at each tau (m); reported distances are in millimeters.
EvalReport evaluate(const SketchCollection &pred, const SketchCollection &gt, double resolution = 0.005,
                    std::span<const double> taus = default_taus());

} // namespace edgesplat
