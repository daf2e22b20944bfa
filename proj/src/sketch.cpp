// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/sketch.hpp"

#include "edgesplat/errors.hpp"

#include <cmath>
#include <string>

namespace edgesplat {

std::size_t ControlPointPool::live_count() const {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
}

double Sketch::opacity() const { return sigmoid(opacity_raw); }

Vec3 Sketch::scale() const { return log_scale.array().exp(); }

std::size_t SketchCollection::live_sketch_count() const {
    return static_cast<std::size_t>(
        std::count_if(sketches.begin(), sketches.end(), [](const Sketch &s) { return s.alive; }));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) {
    require(p > 0.0 && p < 1.0, "logit: probability must lie in (0,1)");
    return std::log(p / (1.0 - p));
}

std::array<double, 4> basis_weights(SketchKind kind, double t) {
    const double u = 1.0 - t;
    if (kind == SketchKind::Line) {
        return {u, t, 0.0, 0.0};
    }
    return {u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t};
}

std::array<double, 4> basis_derivative_weights(SketchKind kind, double t) {
    const double u = 1.0 - t;
    if (kind == SketchKind::Line) {
        return {-1.0, 1.0, 0.0, 0.0};
    }
    return {-3.0 * u * u, 3.0 * u * u - 6.0 * u * t, 6.0 * u * t - 3.0 * t * t, 3.0 * t * t};
}

namespace {

void check_sketch(const Sketch &sketch, const ControlPointPool &pool) {
    if (sketch.ctrl.size() != control_count(sketch.kind)) {
        throw StructuralError("sketch has wrong control point arity");
    }
    for (const std::size_t idx : sketch.ctrl) {
        if (!pool.is_live(idx)) {
            throw StructuralError("sketch references dead or missing pool point " +
                                  std::to_string(idx));
        }
    }
}

Vec3 combine(const Sketch &sketch, const ControlPointPool &pool, const std::array<double, 4> &w) {
    Vec3 out = Vec3::Zero();
    for (std::size_t k = 0; k < sketch.ctrl.size(); ++k) {
        out += w[k] * pool.points[sketch.ctrl[k]];
    }
    return out;
}

} // namespace

Vec3 evaluate(const Sketch &sketch, const ControlPointPool &pool, double t) {
    require(t >= 0.0 && t <= 1.0, "evaluate: t outside [0,1]");
    check_sketch(sketch, pool);
    return combine(sketch, pool, basis_weights(sketch.kind, t));
}

Vec3 derivative(const Sketch &sketch, const ControlPointPool &pool, double t) {
    require(t >= 0.0 && t <= 1.0, "derivative: t outside [0,1]");
    check_sketch(sketch, pool);
    return combine(sketch, pool, basis_derivative_weights(sketch.kind, t));
}

Tangent tangent(const Sketch &sketch, const ControlPointPool &pool, double t,
                const Vec3 &fallback) {
    const Vec3 d = derivative(sketch, pool, t);
    const double n = d.norm();
    if (!(n > kDegenerateDerivative)) {
        return {fallback, true};
    }
    return {d / n, false};
}

namespace {

std::vector<double> cumulative_chords(const Sketch &sketch, const ControlPointPool &pool) {
    std::vector<double> cum(kArcLengthSegments + 1, 0.0);
    Vec3 prev = combine(sketch, pool, basis_weights(sketch.kind, 0.0));
    for (int i = 1; i <= kArcLengthSegments; ++i) {
        const double t = static_cast<double>(i) / kArcLengthSegments;
        const Vec3 cur = combine(sketch, pool, basis_weights(sketch.kind, t));
        cum[i] = cum[i - 1] + (cur - prev).norm();
        prev = cur;
    }
    return cum;
}

} // namespace

double arc_length(const Sketch &sketch, const ControlPointPool &pool) {
    check_sketch(sketch, pool);
    if (sketch.kind == SketchKind::Line) {
        return (pool.points[sketch.ctrl[1]] - pool.points[sketch.ctrl[0]]).norm();
    }
    return cumulative_chords(sketch, pool).back();
}

std::vector<double> sample_parameters(const Sketch &sketch, const ControlPointPool &pool,
                                      double step) {
    require(step > 0.0, "sample_points: step must be positive");
    check_sketch(sketch, pool);

    if (sketch.kind == SketchKind::Line) {
        const double len = arc_length(sketch, pool);
        if (!(len > kDegenerateDerivative)) {
            return {0.0, 1.0};
        }
        const auto segments =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step - 1e-9)));
        std::vector<double> ts(segments + 1);
        for (std::size_t i = 0; i <= segments; ++i) {
            ts[i] = static_cast<double>(i) / static_cast<double>(segments);
        }
        ts.back() = 1.0;
        return ts;
    }

    const std::vector<double> cum = cumulative_chords(sketch, pool);
    const double len = cum.back();
    if (!(len > kDegenerateDerivative)) {
        return {0.0, 1.0};
    }
    const auto segments =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step - 1e-9)));
    std::vector<double> ts(segments + 1);
    ts.front() = 0.0;
    ts.back() = 1.0;
    std::size_t seg = 0;
    for (std::size_t i = 1; i < segments; ++i) {
        const double target = len * static_cast<double>(i) / static_cast<double>(segments);
        while (seg + 1 < static_cast<std::size_t>(kArcLengthSegments) && cum[seg + 1] < target) {
            ++seg;
        }
        const double span = cum[seg + 1] - cum[seg];
        const double frac = span > 0.0 ? (target - cum[seg]) / span : 0.0;
        ts[i] = (static_cast<double>(seg) + std::clamp(frac, 0.0, 1.0)) / kArcLengthSegments;
    }
    return ts;
}

std::vector<SamplePoint> sample_at(const Sketch &sketch, const ControlPointPool &pool,
                                   std::span<const double> params, std::size_t sketch_id) {
    check_sketch(sketch, pool);
    std::vector<SamplePoint> out;
    out.reserve(params.size());
    Vec3 fallback = Vec3::UnitX();
    for (const double t : params) {
        require(t >= 0.0 && t <= 1.0, "sample_at: t outside [0,1]");
        SamplePoint s;
        s.t = t;
        s.sketch_id = sketch_id;
        s.position = combine(sketch, pool, basis_weights(sketch.kind, t));
        s.derivative = combine(sketch, pool, basis_derivative_weights(sketch.kind, t));
        const double n = s.derivative.norm();
        if (n > kDegenerateDerivative) {
            s.tangent = s.derivative / n;
        } else {
            s.tangent = fallback;
            s.degenerate = true;
        }
        fallback = s.tangent;
        out.push_back(s);
    }
    return out;
}

std::vector<SamplePoint> sample_points(const Sketch &sketch, const ControlPointPool &pool,
                                       double step, std::size_t sketch_id) {
    const std::vector<double> ts = sample_parameters(sketch, pool, step);
    return sample_at(sketch, pool, ts, sketch_id);
}

Aabb sketch_aabb(const Sketch &sketch, const ControlPointPool &pool, double pad) {
    check_sketch(sketch, pool);
    Aabb box;
    for (const std::size_t idx : sketch.ctrl) {
        box.expand(pool.points[idx]);
    }
    box.min.array() -= pad;
    box.max.array() += pad;
    return box;
}

void check_structure(const SketchCollection &set) {
    if (set.pool.alive.size() != set.pool.points.size()) {
        throw StructuralError("pool liveness flags out of sync with points");
    }
    for (const Sketch &s : set.sketches) {
        if (s.alive) {
            check_sketch(s, set.pool);
        }
    }
}

void check_no_orphans(const SketchCollection &set) {
    std::vector<bool> used(set.pool.size(), false);
    for (const Sketch &s : set.sketches) {
        if (!s.alive) {
            continue;
        }
        for (const std::size_t idx : s.ctrl) {
            if (idx < used.size()) {
                used[idx] = true;
            }
        }
    }
    for (std::size_t i = 0; i < used.size(); ++i) {
        if (set.pool.alive[i] && !used[i]) {
            throw StructuralError("live pool point " + std::to_string(i) +
                                  " is not referenced by any live sketch");
        }
    }
}

std::size_t collect_garbage(SketchCollection &set) {
    std::vector<bool> used(set.pool.size(), false);
    for (const Sketch &s : set.sketches) {
        if (!s.alive) {
            continue;
        }
        for (const std::size_t idx : s.ctrl) {
            used[idx] = true;
        }
    }
    std::size_t removed = 0;
    for (std::size_t i = 0; i < used.size(); ++i) {
        if (set.pool.alive[i] && !used[i]) {
            set.pool.alive[i] = false;
            ++removed;
        }
    }
    return removed;
}

CompactionMap compact(SketchCollection &set) {
    collect_garbage(set);
    CompactionMap map;
    map.points.assign(set.pool.size(), CompactionMap::npos);
    map.sketches.assign(set.sketches.size(), CompactionMap::npos);

    ControlPointPool pool;
    for (std::size_t i = 0; i < set.pool.size(); ++i) {
        if (set.pool.alive[i]) {
            map.points[i] = pool.add(set.pool.points[i]);
        }
    }
    std::vector<Sketch> sketches;
    for (std::size_t i = 0; i < set.sketches.size(); ++i) {
        const Sketch &s = set.sketches[i];
        if (!s.alive) {
            continue;
        }
        Sketch moved = s;
        for (std::size_t &idx : moved.ctrl) {
            idx = map.points.at(idx);
            if (idx == CompactionMap::npos) {
                throw StructuralError("compaction: live sketch references dead point");
            }
        }
        map.sketches[i] = sketches.size();
        sketches.push_back(std::move(moved));
    }
    set.pool = std::move(pool);
    set.sketches = std::move(sketches);
    return map;
}

} // namespace edgesplat
