// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/camera.hpp"
#include "edgesplat/image.hpp"
#include "edgesplat/sketch.hpp"
#include "edgesplat/view.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edgesplat {

/// x_normalized = scale * x + offset.
struct Normalization {
    double scale = 1.0;
    Vec3 offset = Vec3::Zero();

    [[nodiscard]] bool is_identity() const { return scale == 1.0 && offset.isZero(0.0); }
    [[nodiscard]] Vec3 apply(const Vec3 &p) const { return scale * p + offset; }
    [[nodiscard]] Vec3 invert(const Vec3 &p) const { return (p - offset) / scale; }
};

struct Scene {
    SketchCollection sketches;
    std::vector<Camera> cameras;
    std::optional<SketchCollection> gt_edges;
    Normalization normalization;
};

/// Content box of the live sketches (and gt edges when present).
Aabb content_bounds(const Scene &scene);

/// Maps content into the centered unit cube [-0.5, 0.5]^3: identity when it
/// already fits, otherwise the longest box axis is scaled to 1 m and the box
/// centered at the origin. Cameras are moved consistently. Throws
/// ContractViolation for zero-extent content.
Normalization normalize_scene(Scene &scene);
/// Undoes the stored normalization.
void denormalize_scene(Scene &scene);

void transform_sketches(SketchCollection &set, const Normalization &n);
Camera transform_camera(const Camera &cam, const Normalization &n);

enum class SyntheticShape { Cube, Prism, BezierStar, Mixed };

SyntheticShape parse_shape(const std::string &name);
std::string shape_name(SyntheticShape shape);

struct SyntheticSpec {
    SyntheticShape shape = SyntheticShape::Mixed;
    int n_views = 50;
    int width = 256;
    int height = 256;
    std::uint64_t seed = 0;
    /// Along-tangent and two cross-section scales used for GT rendering (m).
    Vec3 gt_scale = Vec3(0.002, 0.0005, 0.0005);
    double gt_opacity = 0.95;
    double camera_distance = 3.0;
    double step = 0.005;
};

void validate(const SyntheticSpec &spec);

/// Ground-truth sketches of a shape with shared corners already merged.
SketchCollection synthetic_edges(SyntheticShape shape, const Vec3 &scale, double opacity);

/// Cameras on a Fibonacci sphere looking at the origin.
std::vector<Camera> fibonacci_cameras(int n_views, double distance, int width, int height,
                                      std::uint64_t seed);

struct SyntheticScene {
    Scene scene;
    std::vector<EdgeImage> images;
};

SyntheticScene generate_synthetic(const SyntheticSpec &spec);

/// Adds i.i.d. N(0, sigma^2) noise to every live control point coordinate.
SketchCollection perturb_init(const SketchCollection &set, double sigma, std::uint64_t seed);

/// Splits every sketch into `parts` pieces with their own endpoints: lines
/// at uniform fractions, Beziers by de Casteljau at uniform parameters.
SketchCollection fragment_init(const SketchCollection &set, int parts);

/// Splits one cubic at t into two cubics (control points of each half).
std::pair<std::array<Vec3, 4>, std::array<Vec3, 4>> split_bezier(const std::array<Vec3, 4> &ctrl,
                                                                 double t);

/// Scene directory: cameras.json, edges_gt.json, views/edge_####.png.
void save_scene_dir(const std::filesystem::path &dir, const SyntheticScene &synth,
                    bool png16 = true);
std::vector<View> load_views(const std::filesystem::path &dir);

std::string view_file(const std::string &prefix, std::size_t index, const std::string &ext);

} // namespace edgesplat
