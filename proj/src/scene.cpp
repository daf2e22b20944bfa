// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/scene.hpp"

#include "edgesplat/errors.hpp"
#include "edgesplat/io.hpp"
#include "edgesplat/rasterizer.hpp"
#include "edgesplat/topology.hpp"
#include "edgesplat/trainer.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace edgesplat {

Aabb content_bounds(const Scene &scene) {
    Aabb box;
    auto add = [&box](const SketchCollection &set) {
        for (const Sketch &s : set.sketches) {
            if (!s.alive) {
                continue;
            }
            for (const std::size_t i : s.ctrl) {
                box.expand(set.pool.points.at(i));
            }
        }
    };
    add(scene.sketches);
    if (scene.gt_edges) {
        add(*scene.gt_edges);
    }
    return box;
}

void transform_sketches(SketchCollection &set, const Normalization &n) {
    for (Vec3 &p : set.pool.points) {
        p = n.apply(p);
    }
    for (Sketch &s : set.sketches) {
        s.log_scale.array() += std::log(n.scale);
    }
}

Camera transform_camera(const Camera &cam, const Normalization &n) {
    // p_cam' = scale * p_cam keeps every projection unchanged
    Camera out = cam;
    out.translation = n.scale * cam.translation - cam.rotation * n.offset;
    return out;
}

namespace {

void apply_to_scene(Scene &scene, const Normalization &n) {
    transform_sketches(scene.sketches, n);
    if (scene.gt_edges) {
        transform_sketches(*scene.gt_edges, n);
    }
    for (Camera &c : scene.cameras) {
        c = transform_camera(c, n);
    }
}

} // namespace

Normalization normalize_scene(Scene &scene) {
    const Aabb box = content_bounds(scene);
    require(!box.empty(), "normalize_scene: scene has no content");
    const double longest = box.extent().maxCoeff();
    require(longest > 0.0, "normalize_scene: zero-extent scene");

    Normalization n;
    const bool fits = (box.min.array() >= -0.5).all() && (box.max.array() <= 0.5).all();
    if (!fits) {
        n.scale = 1.0 / longest;
        n.offset = -n.scale * 0.5 * (box.min + box.max);
    }
    apply_to_scene(scene, n);
    // compose with any earlier normalization
    scene.normalization.offset = n.scale * scene.normalization.offset + n.offset;
    scene.normalization.scale *= n.scale;
    return n;
}

void denormalize_scene(Scene &scene) {
    const Normalization &n = scene.normalization;
    Normalization inverse;
    inverse.scale = 1.0 / n.scale;
    inverse.offset = -n.offset / n.scale;
    apply_to_scene(scene, inverse);
    scene.normalization = {};
}

SyntheticShape parse_shape(const std::string &name) {
    if (name == "cube") {
        return SyntheticShape::Cube;
    }
    if (name == "prism") {
        return SyntheticShape::Prism;
    }
    if (name == "bezier_star") {
        return SyntheticShape::BezierStar;
    }
    if (name == "mixed") {
        return SyntheticShape::Mixed;
    }
    throw ContractViolation("unknown synthetic shape '" + name + "'");
}

std::string shape_name(SyntheticShape shape) {
    switch (shape) {
    case SyntheticShape::Cube:
        return "cube";
    case SyntheticShape::Prism:
        return "prism";
    case SyntheticShape::BezierStar:
        return "bezier_star";
    case SyntheticShape::Mixed:
        return "mixed";
    }
    return "mixed";
}

void validate(const SyntheticSpec &spec) {
    require(spec.n_views >= 2, "synthetic: at least two views");
    require(spec.width >= 16 && spec.height >= 16, "synthetic: image too small");
    require((spec.gt_scale.array() > 0.0).all(), "synthetic: gt_scale must be positive");
    require(spec.gt_opacity > 0.0 && spec.gt_opacity < 1.0, "synthetic: gt_opacity must lie in (0,1)");
    require(spec.camera_distance > 1.0, "synthetic: cameras must sit outside the unit cube");
    require(spec.step > 0.0, "synthetic: step must be positive");
}

namespace {

void add_line(SketchCollection &set, const Vec3 &a, const Vec3 &b, const Vec3 &log_scale,
              double opacity_raw) {
    Sketch s;
    s.kind = SketchKind::Line;
    s.ctrl = {set.pool.add(a), set.pool.add(b)};
    s.log_scale = log_scale;
    s.opacity_raw = opacity_raw;
    set.sketches.push_back(std::move(s));
}

void add_bezier(SketchCollection &set, const std::array<Vec3, 4> &c, const Vec3 &log_scale,
                double opacity_raw) {
    Sketch s;
    s.kind = SketchKind::Bezier3;
    for (const Vec3 &p : c) {
        s.ctrl.push_back(set.pool.add(p));
    }
    s.log_scale = log_scale;
    s.opacity_raw = opacity_raw;
    set.sketches.push_back(std::move(s));
}

void add_box(SketchCollection &set, const Vec3 &center, double half, const Vec3 &ls, double op) {
    std::array<Vec3, 8> corner;
    for (int i = 0; i < 8; ++i) {
        corner[i] = center + half * Vec3(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
    }
    for (int i = 0; i < 8; ++i) {
        for (const int bit : {1, 2, 4}) {
            if (!(i & bit)) {
                add_line(set, corner[i], corner[i | bit], ls, op);
            }
        }
    }
}

void add_prism(SketchCollection &set, double radius, double half_height, const Vec3 &ls, double op) {
    std::array<Vec3, 3> base;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0 + 0.25;
        base[k] = Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
    }
    const Vec3 up(0.0, 0.0, half_height);
    for (int k = 0; k < 3; ++k) {
        const Vec3 &a = base[k];
        const Vec3 &b = base[(k + 1) % 3];
        add_line(set, a - up, b - up, ls, op);
        add_line(set, a + up, b + up, ls, op);
        add_line(set, a - up, a + up, ls, op);
    }
}

void add_star(SketchCollection &set, const Vec3 &center, double outer, double inner, const Vec3 &ls,
              double op) {
    constexpr int kArcs = 8;
    std::array<Vec3, kArcs> vertex;
    for (int k = 0; k < kArcs; ++k) {
        const double a = 2.0 * std::numbers::pi * k / kArcs;
        const double r = k % 2 == 0 ? outer : inner;
        vertex[k] = center + Vec3(r * std::cos(a), r * std::sin(a), 0.0);
    }
    for (int k = 0; k < kArcs; ++k) {
        const Vec3 &a = vertex[k];
        const Vec3 &b = vertex[(k + 1) % kArcs];
        const Vec3 chord = b - a;
        const Vec3 side = Vec3(Vec3::UnitZ()).cross(chord).normalized();
        const double bulge = 0.25 * chord.norm();
        const double lift = (k % 2 == 0 ? 1.0 : -1.0) * 0.06;
        add_bezier(set,
                   {a, a + chord / 3.0 + bulge * side + Vec3(0, 0, lift),
                    a + 2.0 * chord / 3.0 + 0.3 * bulge * side - Vec3(0, 0, lift), b},
                   ls, op);
    }
}

} // namespace

SketchCollection synthetic_edges(SyntheticShape shape, const Vec3 &scale, double opacity) {
    SketchCollection set;
    const Vec3 ls = scale.array().log();
    const double op = logit(opacity);
    switch (shape) {
    case SyntheticShape::Cube:
        add_box(set, Vec3::Zero(), 0.3, ls, op);
        break;
    case SyntheticShape::Prism:
        add_prism(set, 0.35, 0.3, ls, op);
        break;
    case SyntheticShape::BezierStar:
        add_star(set, Vec3::Zero(), 0.42, 0.18, ls, op);
        break;
    case SyntheticShape::Mixed:
        add_box(set, Vec3(0.0, 0.0, -0.2), 0.25, ls, op);
        add_star(set, Vec3(0.0, 0.0, 0.3), 0.42, 0.18, ls, op);
        break;
    }
    // shared corners were created as separate points; join them
    TopoConfig cfg;
    cfg.th_connect = 1e-6;
    merge_endpoints(set, cfg);
    compact(set);
    return set;
}

std::vector<Camera> fibonacci_cameras(int n_views, double distance, int width, int height,
                                      std::uint64_t seed) {
    require(n_views >= 1, "fibonacci_cameras: need at least one view");
    std::mt19937_64 rng(seed);
    const double spin = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    // content is assumed to lie within this radius of the origin
    constexpr double kContentRadius = 0.75;
    const double focal = 0.95 * 0.5 * std::min(width, height) *
                         std::sqrt(distance * distance - kContentRadius * kContentRadius) /
                         kContentRadius;
    std::vector<Camera> cams;
    for (int i = 0; i < n_views; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n_views;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = spin + golden * i;
        const Vec3 eye = distance * Vec3(r * std::cos(phi), r * std::sin(phi), z);
        cams.push_back(look_at(eye, Vec3::Zero(), Vec3::UnitZ(), focal, width, height));
    }
    return cams;
}

SyntheticScene generate_synthetic(const SyntheticSpec &spec) {
    validate(spec);
    SyntheticScene out;
    out.scene.sketches = synthetic_edges(spec.shape, spec.gt_scale, spec.gt_opacity);
    out.scene.gt_edges = out.scene.sketches;
    out.scene.cameras =
        fibonacci_cameras(spec.n_views, spec.camera_distance, spec.width, spec.height, spec.seed);
    const std::vector<Gaussian3D> gaussians = sketch_gaussians(out.scene.sketches, spec.step);
    for (const Camera &cam : out.scene.cameras) {
        out.images.push_back(render(gaussians, cam));
    }
    return out;
}

SketchCollection perturb_init(const SketchCollection &set, double sigma, std::uint64_t seed) {
    require(sigma >= 0.0, "perturb_init: sigma must be non-negative");
    SketchCollection out = set;
    if (sigma == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < out.pool.size(); ++i) {
        if (!out.pool.alive[i]) {
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            out.pool.points[i][c] += noise(rng);
        }
    }
    return out;
}

std::pair<std::array<Vec3, 4>, std::array<Vec3, 4>> split_bezier(const std::array<Vec3, 4> &c,
                                                                 double t) {
    const Vec3 p01 = (1 - t) * c[0] + t * c[1];
    const Vec3 p12 = (1 - t) * c[1] + t * c[2];
    const Vec3 p23 = (1 - t) * c[2] + t * c[3];
    const Vec3 p012 = (1 - t) * p01 + t * p12;
    const Vec3 p123 = (1 - t) * p12 + t * p23;
    const Vec3 mid = (1 - t) * p012 + t * p123;
    return {{c[0], p01, p012, mid}, {mid, p123, p23, c[3]}};
}

SketchCollection fragment_init(const SketchCollection &set, int parts) {
    require(parts >= 1, "fragment_init: parts must be >= 1");
    check_structure(set);
    SketchCollection out;
    for (const Sketch &sk : set.sketches) {
        if (!sk.alive) {
            continue;
        }
        if (sk.kind == SketchKind::Line) {
            const Vec3 a = set.pool.points[sk.ctrl[0]];
            const Vec3 b = set.pool.points[sk.ctrl[1]];
            for (int k = 0; k < parts; ++k) {
                const double t0 = static_cast<double>(k) / parts;
                const double t1 = static_cast<double>(k + 1) / parts;
                add_line(out, k == 0 ? a : Vec3((1 - t0) * a + t0 * b),
                         k + 1 == parts ? b : Vec3((1 - t1) * a + t1 * b), sk.log_scale,
                         sk.opacity_raw);
            }
            continue;
        }
        std::array<Vec3, 4> rest;
        for (int i = 0; i < 4; ++i) {
            rest[i] = set.pool.points[sk.ctrl[i]];
        }
        for (int k = 0; k < parts; ++k) {
            if (k + 1 == parts) {
                add_bezier(out, rest, sk.log_scale, sk.opacity_raw);
                break;
            }
            // split the remaining [k/parts, 1] piece at the next uniform parameter
            const double local = 1.0 / static_cast<double>(parts - k);
            auto [head, tail] = split_bezier(rest, local);
            add_bezier(out, head, sk.log_scale, sk.opacity_raw);
            rest = tail;
        }
    }
    return out;
}

std::string view_file(const std::string &prefix, std::size_t index, const std::string &ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04zu.%s", prefix.c_str(), index, ext.c_str());
    return buf;
}

void save_scene_dir(const std::filesystem::path &dir, const SyntheticScene &synth, bool png16) {
    std::filesystem::create_directories(dir / "views");
    save_cameras(dir / "cameras.json", synth.scene.cameras);
    save_sketches(dir / "edges_gt.json", synth.scene.gt_edges ? *synth.scene.gt_edges
                                                              : synth.scene.sketches);
    for (std::size_t i = 0; i < synth.images.size(); ++i) {
        write_png(dir / "views" / view_file("edge", i, "png"), synth.images[i],
                  png16 ? PngDepth::Bits16 : PngDepth::Bits8);
    }
}

std::vector<View> load_views(const std::filesystem::path &dir) {
    const std::vector<Camera> cams = load_cameras(dir / "cameras.json");
    std::vector<View> views;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        View v;
        v.camera = cams[i];
        v.gt = read_png(dir / "views" / view_file("edge", i, "png"));
        require(v.gt.width() == v.camera.width && v.gt.height() == v.camera.height,
                "load_views: image " + std::to_string(i) + " does not match its camera");
        views.push_back(std::move(v));
    }
    return views;
}

} // namespace edgesplat
