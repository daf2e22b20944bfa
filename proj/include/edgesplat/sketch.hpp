// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace edgesplat {

enum class SketchKind { Line, Bezier3 };

/// Number of control points a sketch of the given kind indexes.
constexpr std::size_t control_count(SketchKind kind) { return kind == SketchKind::Line ? 2 : 4; }

/// Shared, optimizable control points. Sketches refer to entries by index so
/// that endpoint merging can make two sketches share a point.
struct ControlPointPool {
    std::vector<Vec3> points;
    std::vector<bool> alive;

    std::size_t add(const Vec3 &p) {
        points.push_back(p);
        alive.push_back(true);
        return points.size() - 1;
    }
    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] std::size_t live_count() const;
    [[nodiscard]] bool is_live(std::size_t i) const { return i < points.size() && alive[i]; }
};

/// A line segment or cubic Bezier over pool indices. Opacity and scale are
/// stored as unconstrained raw parameters: opacity = sigmoid(opacity_raw),
/// scale = exp(log_scale).
struct Sketch {
    SketchKind kind = SketchKind::Line;
    std::vector<std::size_t> ctrl;
    double opacity_raw = 0.0;
    Vec3 log_scale = Vec3::Zero();
    bool alive = true;

    [[nodiscard]] double opacity() const;
    [[nodiscard]] Vec3 scale() const;
    [[nodiscard]] std::size_t front() const { return ctrl.front(); }
    [[nodiscard]] std::size_t back() const { return ctrl.back(); }
};

/// Sketches plus the pool they index into.
struct SketchCollection {
    ControlPointPool pool;
    std::vector<Sketch> sketches;

    [[nodiscard]] std::size_t live_sketch_count() const;
};

struct SamplePoint {
    Vec3 position;
    Vec3 tangent;
    /// Unnormalized curve derivative at t, kept for gradient chaining.
    Vec3 derivative;
    double t = 0.0;
    std::size_t sketch_id = 0;
    bool degenerate = false;
};

/// Tangent below this derivative magnitude is treated as undefined.
inline constexpr double kDegenerateDerivative = 1e-8;
/// Uniform parameter segments used for chordal arc-length tables.
inline constexpr int kArcLengthSegments = 256;

double sigmoid(double x);
double logit(double p);

/// Bernstein (or linear) basis weights at t; only the first control_count()
/// entries are meaningful.
std::array<double, 4> basis_weights(SketchKind kind, double t);
/// d/dt of basis_weights.
std::array<double, 4> basis_derivative_weights(SketchKind kind, double t);

Vec3 evaluate(const Sketch &sketch, const ControlPointPool &pool, double t);
Vec3 derivative(const Sketch &sketch, const ControlPointPool &pool, double t);

struct Tangent {
    Vec3 direction;
    bool degenerate = false;
};

/// Unit tangent at t. When the derivative is degenerate, `fallback` is
/// returned and the result is flagged.
Tangent tangent(const Sketch &sketch, const ControlPointPool &pool, double t,
                const Vec3 &fallback = Vec3::UnitX());

/// Chordal arc length over kArcLengthSegments uniform parameter segments.
double arc_length(const Sketch &sketch, const ControlPointPool &pool);

/// Parameters of arc-length-uniform samples at spacing <= step, endpoints
/// included. A zero-length sketch yields {0, 1}.
std::vector<double> sample_parameters(const Sketch &sketch, const ControlPointPool &pool,
                                      double step);

std::vector<SamplePoint> sample_points(const Sketch &sketch, const ControlPointPool &pool,
                                       double step, std::size_t sketch_id = 0);

/// Samples at explicitly given parameters (frozen sampling plan).
std::vector<SamplePoint> sample_at(const Sketch &sketch, const ControlPointPool &pool,
                                   std::span<const double> params, std::size_t sketch_id = 0);

/// Box of the control polygon, grown by pad on every side.
Aabb sketch_aabb(const Sketch &sketch, const ControlPointPool &pool, double pad = 0.0);

/// Throws StructuralError if a live sketch has the wrong arity or indexes a
/// dead/out-of-range point.
void check_structure(const SketchCollection &set);

/// Throws StructuralError unless every live point is used by a live sketch.
void check_no_orphans(const SketchCollection &set);

/// Marks points that no live sketch references as dead. Returns how many.
std::size_t collect_garbage(SketchCollection &set);

struct CompactionMap {
    /// old index -> new index, or npos when removed.
    std::vector<std::size_t> points;
    std::vector<std::size_t> sketches;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Drops dead sketches and dead points, renumbering indices.
CompactionMap compact(SketchCollection &set);

} // namespace edgesplat
