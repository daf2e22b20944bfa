// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/metrics.hpp"

#include "edgesplat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgesplat {

EdgePointSet resample(const SketchCollection &edges, double resolution) {
    require(resolution > 0.0, "resample: resolution must be positive");
    EdgePointSet out;
    out.resolution = resolution;
    for (std::size_t i = 0; i < edges.sketches.size(); ++i) {
        const Sketch &sk = edges.sketches[i];
        if (!sk.alive) {
            continue;
        }
        for (const SamplePoint &s : sample_points(sk, edges.pool, resolution, i)) {
            out.points.push_back(s.position);
        }
    }
    out.empty_source = out.points.empty();
    return out;
}

std::size_t PointGrid::KeyHash::operator()(const Key &k) const noexcept {
    auto h = static_cast<std::uint64_t>(k[0]) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k[1]) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k[2]) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

PointGrid::PointGrid(std::span<const Vec3> points, double cell)
    : points_(points.begin(), points.end()), cell_(cell) {
    require(cell > 0.0, "PointGrid: cell size must be positive");
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
        cells_[key_of(points_[i])].push_back(i);
    }
}

PointGrid::Key PointGrid::key_of(const Vec3 &p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

double PointGrid::nearest_distance(const Vec3 &q) const {
    require(!points_.empty(), "PointGrid: empty point set");
    constexpr int kMaxRing = 6;
    const Key c = key_of(q);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= kMaxRing; ++r) {
        for (int dz = -r; dz <= r; ++dz) {
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) {
                        continue;
                    }
                    const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == cells_.end()) {
                        continue;
                    }
                    for (const std::uint32_t i : it->second) {
                        best = std::min(best, (points_[i] - q).norm());
                    }
                }
            }
        }
        // every point outside rings 0..r is farther than r cells
        if (best <= r * cell_) {
            return best;
        }
    }
    for (const Vec3 &p : points_) {
        best = std::min(best, (p - q).norm());
    }
    return best;
}

bool PointGrid::any_within(const Vec3 &q, double tau) const {
    require(tau <= cell_, "PointGrid::any_within: tau exceeds cell size");
    const Key c = key_of(q);
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
                if (it == cells_.end()) {
                    continue;
                }
                for (const std::uint32_t i : it->second) {
                    if ((points_[i] - q).norm() <= tau) {
                        return true;
                    }
                }
            }
        }
    }
    return false;
}

namespace {

void require_nonempty(const EdgePointSet &a, const EdgePointSet &b, const char *what) {
    require(!a.points.empty() && !b.points.empty(), std::string(what) + ": empty point set");
}

double mean_nearest(const std::vector<Vec3> &from, const PointGrid &to) {
    double sum = 0.0;
    for (const Vec3 &p : from) {
        sum += to.nearest_distance(p);
    }
    return sum / static_cast<double>(from.size());
}

double percent_within(const std::vector<Vec3> &from, const PointGrid &to, double tau) {
    std::size_t hits = 0;
    for (const Vec3 &p : from) {
        hits += to.any_within(p, tau) ? 1 : 0;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(from.size());
}

} // namespace

double accuracy(const EdgePointSet &pred, const EdgePointSet &gt) {
    require_nonempty(pred, gt, "accuracy");
    return mean_nearest(pred.points, PointGrid(gt.points, kMetricGridCell));
}

double completeness(const EdgePointSet &pred, const EdgePointSet &gt) {
    require_nonempty(pred, gt, "completeness");
    return mean_nearest(gt.points, PointGrid(pred.points, kMetricGridCell));
}

double fscore(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Prf prf(const EdgePointSet &pred, const EdgePointSet &gt, double tau) {
    require(tau > 0.0, "prf: tau must be positive");
    require_nonempty(pred, gt, "prf");
    const double cell = std::max(tau, kMetricGridCell);
    Prf out;
    out.precision = percent_within(pred.points, PointGrid(gt.points, cell), tau);
    out.recall = percent_within(gt.points, PointGrid(pred.points, cell), tau);
    out.fscore = fscore(out.precision, out.recall);
    return out;
}

std::span<const double> default_taus() {
    static constexpr std::array<double, 3> kTaus = {0.005, 0.010, 0.020};
    return kTaus;
}

EvalReport evaluate(const SketchCollection &pred, const SketchCollection &gt, double resolution,
                    std::span<const double> taus) {
    const EdgePointSet p = resample(pred, resolution);
    const EdgePointSet g = resample(gt, resolution);
    require_nonempty(p, g, "evaluate");
    EvalReport out;
    out.edge_count = pred.live_sketch_count();
    double cell = kMetricGridCell;
    for (const double t : taus) {
        cell = std::max(cell, t);
    }
    const PointGrid gt_grid(g.points, cell);
    const PointGrid pred_grid(p.points, cell);
    out.accuracy_mm = 1000.0 * mean_nearest(p.points, gt_grid);
    out.completeness_mm = 1000.0 * mean_nearest(g.points, pred_grid);
    for (const double t : taus) {
        Prf r;
        r.precision = percent_within(p.points, gt_grid, t);
        r.recall = percent_within(g.points, pred_grid, t);
        r.fscore = fscore(r.precision, r.recall);
        out.taus_mm.push_back(1000.0 * t);
        out.prf.push_back(r);
    }
    return out;
}

} // namespace edgesplat
