// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Pass criterion numbers as arguments
// to run a subset, e.g. `acceptance 1 2 5`.

#include "edgesplat/edge_detector.hpp"
#include "edgesplat/metrics.hpp"
#include "edgesplat/rasterizer.hpp"
#include "edgesplat/scene.hpp"
#include "edgesplat/topology.hpp"
#include "edgesplat/trainer.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace edgesplat;
using namespace edgesplat::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failed sub-checks of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string &what) {
        ++total_;
        if (!ok) {
            if (failures_.size() < 5) {
                failures_.push_back(what);
            }
            ++failed_;
        }
    }
    [[nodiscard]] bool ok() const { return failed_ == 0; }
    [[nodiscard]] std::string summary() const {
        std::string s = std::to_string(total_ - failed_) + "/" + std::to_string(total_) + " checks";
        for (const std::string &f : failures_) {
            s += "; " + f;
        }
        return s;
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

// ------------------------------------------------------------------ 1

Outcome gradient_check() {
    const auto t0 = Clock::now();
    TestRng rng(101);
    const SketchCollection set = random_sketches(rng, 3);
    const SketchCollection target = random_sketches(rng, 4, 0.3, 0.01, 0.02);
    std::vector<View> views;
    for (int i = 0; i < 2; ++i) {
        View v;
        v.camera = random_camera(rng, 96, 80, 2.0, 0.9 * 96);
        v.gt = render(sketch_gaussians(target, 0.005), v.camera);
        for (double &x : v.gt.data()) {
            x = x > 0.3 ? 1.0 : 0.0;
        }
        views.push_back(std::move(v));
    }
    const TrainConfig cfg;
    const std::vector<std::uint64_t> seeds = {11, 12};
    const SamplingPlan plan = make_sampling_plan(set, cfg.step);
    const SketchGrads g = epoch_gradients(set, views, cfg, seeds, &plan);

    const double h = 1e-5;
    Checks checks;
    double worst_rel = 0.0;
    auto check = [&](double analytic, const std::string &name, auto &&perturb) {
        SketchCollection plus = set;
        SketchCollection minus = set;
        perturb(plus, h);
        perturb(minus, -h);
        const double fd = (epoch_gradients(plus, views, cfg, seeds, &plan).loss -
                           epoch_gradients(minus, views, cfg, seeds, &plan).loss) /
                          (2 * h);
        const double diff = std::abs(analytic - fd);
        if (diff > 1e-8) {
            worst_rel = std::max(worst_rel, diff / std::max(std::abs(analytic), std::abs(fd)));
        }
        checks.expect(gradients_agree(analytic, fd, 1e-3, 1e-8),
                      name + fmt(" analytic %.6g fd %.6g", analytic, fd));
    };
    for (std::size_t i = 0; i < set.pool.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            check(g.points[i][c], "point " + std::to_string(i),
                  [&](SketchCollection &s, double d) { s.pool.points[i][c] += d; });
        }
    }
    for (std::size_t k = 0; k < set.sketches.size(); ++k) {
        check(g.opacity_raw[k], "opacity " + std::to_string(k),
              [&](SketchCollection &s, double d) { s.sketches[k].opacity_raw += d; });
        for (int c = 0; c < 3; ++c) {
            check(g.log_scale[k][c], "log-scale " + std::to_string(k),
                  [&](SketchCollection &s, double d) { s.sketches[k].log_scale[c] += d; });
        }
    }
    checks.expect(g.loss > 0.0, "loss is zero");
    const double secs = seconds_since(t0);
    checks.expect(secs < 60.0, fmt("runtime %.1f s >= 60 s", secs));
    return {checks.ok(), checks.summary() + fmt(", worst rel err %.2e, %.1f s", worst_rel, secs)};
}

// ------------------------------------------------------------------ 2

Outcome rasterizer_oracle() {
    const auto t0 = Clock::now();
    TestRng rng(202);
    const Camera cam = axis_camera(256, 256, 240.0);
    double worst = 0.0;
    bool in_range = true;
    for (int scene = 0; scene < 20; ++scene) {
        const int n = 100 + static_cast<int>(rng() % 901);
        const auto g = random_gaussians(rng, n);
        const EdgeImage fast = render(g, cam);
        worst = std::max(worst, max_abs_difference(fast, reference_render(g, cam)));
        for (double v : fast.data()) {
            in_range = in_range && v >= 0.0 && v <= 1.0;
        }
    }
    const double secs = seconds_since(t0);
    Checks checks;
    checks.expect(worst <= 2.0 / 255.0, fmt("max diff %.3f/255", worst * 255));
    checks.expect(in_range, "render outside [0,1]");
    checks.expect(secs < 30.0, fmt("runtime %.1f s >= 30 s", secs));
    return {checks.ok(), checks.summary() + fmt(", max diff %.3f/255, %.1f s", worst * 255, secs)};
}

// ------------------------------------------------------------------ 3, 4, 8

struct RunResult {
    EvalReport report;
    std::size_t live = 0;
    std::size_t gt = 0;
    double train_seconds = 0.0;
};

struct SynthCache {
    std::map<SyntheticShape, SyntheticScene> scenes;

    const SyntheticScene &get(SyntheticShape shape) {
        auto it = scenes.find(shape);
        if (it == scenes.end()) {
            SyntheticSpec spec;
            spec.shape = shape;
            spec.n_views = 50;
            spec.width = spec.height = 256;
            it = scenes.emplace(shape, generate_synthetic(spec)).first;
        }
        return it->second;
    }
};

RunResult run_synthetic(SynthCache &cache, SyntheticShape shape, double sigma, int parts,
                        bool topology) {
    const SyntheticScene &syn = cache.get(shape);
    std::vector<View> views;
    for (std::size_t i = 0; i < syn.images.size(); ++i) {
        views.push_back({syn.scene.cameras[i], syn.images[i]});
    }
    SketchCollection init = syn.scene.sketches;
    if (parts > 1) {
        init = fragment_init(init, parts);
    }
    init = perturb_init(init, sigma, 7);
    TrainConfig cfg;
    cfg.topology = topology;
    cfg.threads = 1;
    const auto t0 = Clock::now();
    const TrainResult res = train(init, views, cfg);
    RunResult out;
    out.train_seconds = seconds_since(t0);
    out.report = evaluate(res.sketches, syn.scene.sketches);
    out.live = res.sketches.live_sketch_count();
    out.gt = syn.scene.sketches.live_sketch_count();
    std::printf("  [run] shape %s sigma %.3f parts %d topology %s: A %.2f mm C %.2f mm F5 %.2f "
                "live %zu gt %zu (%.0f s)\n",
                shape_name(shape).c_str(), sigma, parts, topology ? "on" : "off",
                out.report.accuracy_mm, out.report.completeness_mm, out.report.prf[0].fscore,
                out.live, out.gt, out.train_seconds);
    std::fflush(stdout);
    return out;
}

Outcome synthetic_convergence(const RunResult &r) {
    Checks checks;
    checks.expect(r.report.accuracy_mm <= 3.0, fmt("A %.2f mm > 3", r.report.accuracy_mm));
    checks.expect(r.report.completeness_mm <= 3.0, fmt("C %.2f mm > 3", r.report.completeness_mm));
    checks.expect(r.report.prf[0].fscore >= 95.0, fmt("F5 %.2f < 95", r.report.prf[0].fscore));
    checks.expect(r.train_seconds <= 900.0, fmt("runtime %.0f s > 900 s", r.train_seconds));
    return {checks.ok(), checks.summary() +
                             fmt(", A %.2f mm, C %.2f mm, F5 %.2f, %.0f s", r.report.accuracy_mm,
                                 r.report.completeness_mm, r.report.prf[0].fscore, r.train_seconds)};
}

Outcome compactness(SynthCache &cache) {
    const RunResult with = run_synthetic(cache, SyntheticShape::Cube, 0.005, 4, true);
    const RunResult without = run_synthetic(cache, SyntheticShape::Cube, 0.005, 4, false);
    const double gt = static_cast<double>(with.gt);
    Checks checks;
    checks.expect(static_cast<double>(with.live) <= 1.5 * gt,
                  fmt("live %.0f > 1.5 x %.0f", static_cast<double>(with.live), gt));
    checks.expect(with.report.prf[0].fscore >= 95.0, fmt("F5 %.2f < 95", with.report.prf[0].fscore));
    checks.expect(static_cast<double>(without.live) >= 3.0 * gt,
                  fmt("without topology live %.0f < 3 x %.0f", static_cast<double>(without.live), gt));
    return {checks.ok(), checks.summary() + fmt(", live %.0f (gt %.0f), F5 %.2f, without topology live %.0f",
                                                static_cast<double>(with.live), gt,
                                                with.report.prf[0].fscore,
                                                static_cast<double>(without.live))};
}

Outcome noise_curve(SynthCache &cache, const std::optional<RunResult> &at_002) {
    const std::array<double, 4> sigmas = {0.0, 0.01, 0.02, 0.05};
    std::array<double, 4> f5{};
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (sigmas[i] == 0.02 && at_002) {
            f5[i] = at_002->report.prf[0].fscore;
        } else {
            f5[i] = run_synthetic(cache, SyntheticShape::Mixed, sigmas[i], 1, true).report.prf[0].fscore;
        }
    }
    Checks checks;
    for (std::size_t i = 1; i < 3; ++i) {
        checks.expect(std::abs(f5[i] - f5[0]) <= 2.0,
                      fmt("sigma %.2f F5 %.2f vs %.2f at zero", sigmas[i], f5[i], f5[0]));
    }
    for (std::size_t i = 1; i < sigmas.size(); ++i) {
        checks.expect(f5[i] <= f5[i - 1] + 1.0,
                      fmt("F5 rises from %.2f to %.2f at sigma %.2f", f5[i - 1], f5[i], sigmas[i]));
    }
    return {checks.ok(), checks.summary() + fmt(", F5 %.2f / %.2f / %.2f", f5[0], f5[1], f5[2]) +
                             fmt(" / %.2f", f5[3])};
}

// ------------------------------------------------------------------ 5

SketchCollection random_topology_scene(TestRng &rng) {
    SketchCollection set;
    std::vector<Vec3> anchors;
    for (int i = 0; i < 6; ++i) {
        anchors.push_back(uniform_vec(rng, -0.2, 0.2));
    }
    const int count = 4 + static_cast<int>(rng() % 10);
    for (int i = 0; i < count; ++i) {
        const Vec3 a = anchors[rng() % anchors.size()] + uniform_vec(rng, -0.006, 0.006);
        Vec3 b = anchors[rng() % anchors.size()] + uniform_vec(rng, -0.006, 0.006);
        if ((a - b).norm() < 0.02) {
            b = a + uniform_vec(rng, -0.1, 0.1);
        }
        switch (rng() % 3) {
        case 0:
            add_line(set, a, b);
            break;
        case 1:
            add_line(set, a + uniform(rng, 0.0, 0.4) * (b - a), a + uniform(rng, 0.6, 1.0) * (b - a));
            break;
        default:
            add_bezier(set, {a, a + uniform_vec(rng, -0.05, 0.05), b + uniform_vec(rng, -0.05, 0.05), b});
        }
    }
    return set;
}

bool references_only_live_points(const SketchCollection &set) {
    for (const Sketch &s : set.sketches) {
        if (!s.alive) {
            continue;
        }
        for (const std::size_t idx : s.ctrl) {
            if (idx >= set.pool.size() || !set.pool.alive[idx]) {
                return false;
            }
        }
    }
    return true;
}

Outcome topology_fixpoints() {
    constexpr double step = 0.005;
    const TopoConfig cfg;
    Checks checks;
    auto endpoint = [](const SketchCollection &set, std::size_t k, bool front) {
        const Sketch &s = set.sketches[k];
        return set.pool.points[front ? s.front() : s.back()];
    };

    { // endpoint merge: 5 mm gap joins at the midpoint
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
        add_line(set, Vec3(0.105, 0, 0), Vec3(0.2, 0.05, 0));
        const EditReport r = merge_endpoints(set, cfg);
        checks.expect(r.endpoint_merges == 1 && set.pool.live_count() == 3 &&
                          set.sketches[0].back() == set.sketches[1].front() &&
                          (endpoint(set, 0, false) - Vec3(0.1025, 0, 0)).norm() <= 1e-15,
                      "endpoint 5 mm example");
    }
    { // endpoint merge: 15 mm stays apart
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
        add_line(set, Vec3(0.115, 0, 0), Vec3(0.2, 0.05, 0));
        checks.expect(merge_endpoints(set, cfg).endpoint_merges == 0 && set.pool.live_count() == 4,
                      "endpoint 15 mm example");
    }
    { // endpoint merge: three close endpoints, greedy by distance
        const Vec3 p1(0, 0, 0);
        const Vec3 p2(0.004, 0, 0);
        const Vec3 p3(0.0015, 0.003, 0);
        SketchCollection set;
        add_line(set, p1, Vec3(-0.1, 0, 0));
        add_line(set, p2, Vec3(0.1, 0, 0));
        add_line(set, p3, Vec3(0, 0.1, 0));
        const Vec3 expected = 0.5 * (0.5 * (p1 + p3) + p2);
        const EditReport r = merge_endpoints(set, cfg);
        checks.expect(r.endpoint_merges == 2 && set.pool.live_count() == 4 &&
                          set.sketches[0].front() == set.sketches[1].front() &&
                          set.sketches[0].front() == set.sketches[2].front() &&
                          (endpoint(set, 0, true) - expected).norm() <= 1e-15,
                      "endpoint triple example");
    }
    { // overlap: short line on a long line
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
        add_line(set, Vec3(0.04, 0, 0), Vec3(0.06, 0, 0));
        const EditReport r = merge_overlapping(set, cfg, step);
        checks.expect(r.overlap_merges == 1 && set.sketches[0].alive && !set.sketches[1].alive,
                      "overlap contained example");
    }
    { // overlap: parallel lines 50 mm apart
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
        add_line(set, Vec3(0, 0.05, 0), Vec3(0.1, 0.05, 0));
        checks.expect(merge_overlapping(set, cfg, step).overlap_merges == 0, "overlap parallel example");
    }
    { // overlap: identical sketches
        SketchCollection set;
        const std::array<Vec3, 4> c = {Vec3(0, 0, 0), Vec3(0.05, 0.05, 0), Vec3(0.1, -0.05, 0),
                                       Vec3(0.15, 0, 0)};
        add_bezier(set, c);
        add_bezier(set, c);
        merge_overlapping(set, cfg, step);
        checks.expect(set.live_sketch_count() == 1, "overlap identical example");
    }
    { // colinear: touching pieces
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.4, 0, 0));
        add_line(set, Vec3(0.405, 0, 0), Vec3(1, 0, 0));
        const EditReport r = merge_colinear(set, cfg);
        bool spans = false;
        for (std::size_t k = 0; k < 2; ++k) {
            if (set.sketches[k].alive) {
                const Vec3 a = endpoint(set, k, true);
                const Vec3 b = endpoint(set, k, false);
                spans = (a == Vec3(0, 0, 0) && b == Vec3(1, 0, 0)) || (b == Vec3(0, 0, 0) && a == Vec3(1, 0, 0));
            }
        }
        checks.expect(r.colinear_merges == 1 && set.live_sketch_count() == 1 &&
                          set.pool.live_count() == 2 && spans,
                      "colinear touching example");
    }
    { // colinear: 20 mm gap
        SketchCollection set;
        add_line(set, Vec3(0, 0, 0), Vec3(0.4, 0, 0));
        add_line(set, Vec3(0.42, 0, 0), Vec3(1, 0, 0));
        checks.expect(merge_colinear(set, cfg).colinear_merges == 0, "colinear gap example");
    }
    { // colinear: 10 degrees apart
        SketchCollection set;
        const double a = 10.0 * std::numbers::pi / 180.0;
        add_line(set, Vec3(-0.4, 0, 0), Vec3(0, 0, 0));
        add_line(set, Vec3(0.001, 0, 0), Vec3(0.001 + 0.4 * std::cos(a), 0.4 * std::sin(a), 0));
        checks.expect(merge_colinear(set, cfg).colinear_merges == 0, "colinear angle example");
    }

    TestRng rng(505);
    for (int run = 0; run < 100; ++run) {
        SketchCollection set = random_topology_scene(rng);
        merge_endpoints(set, cfg);
        checks.expect(merge_endpoints(set, cfg).total_edits() == 0, "endpoint merge not idempotent");
        merge_overlapping(set, cfg, step);
        checks.expect(merge_overlapping(set, cfg, step).total_edits() == 0, "overlap merge not idempotent");
        merge_colinear(set, cfg);
        checks.expect(merge_colinear(set, cfg).total_edits() == 0, "colinear merge not idempotent");
    }

    std::vector<View> views;
    for (int i = 0; i < 3; ++i) {
        View v{axis_camera(64, 64, 60.0), EdgeImage(64, 64, 0.0)};
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 32; ++x) {
                v.gt(x, y) = 1.0;
            }
        }
        views.push_back(std::move(v));
    }
    for (int run = 0; run < 100; ++run) {
        SketchCollection set = random_topology_scene(rng);
        for (Vec3 &p : set.pool.points) {
            p.z() += 1.0;
        }
        topology_pass(set, cfg, step);
        checks.expect(references_only_live_points(set), "dead point referenced after merges");
        filter_invisible(set, views, cfg, step);
        checks.expect(references_only_live_points(set), "dead point referenced after filtering");
    }
    return {checks.ok(), checks.summary()};
}

// ------------------------------------------------------------------ 6

double brute_nearest(const Vec3 &q, const std::vector<Vec3> &set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3 &p : set) {
        best = std::min(best, (p - q).norm());
    }
    return best;
}

std::vector<Vec3> point_cloud(TestRng &rng, std::size_t n) {
    std::vector<Vec3> out;
    while (out.size() < n) {
        if (rng() % 4 == 0) {
            out.push_back(uniform_vec(rng, -0.5, 0.5));
            continue;
        }
        const Vec3 a = uniform_vec(rng, -0.3, 0.3);
        const Vec3 d = unit_vec(rng);
        const int len = 5 + static_cast<int>(rng() % 30);
        for (int i = 0; i < len && out.size() < n; ++i) {
            out.push_back(a + 0.005 * i * d + uniform_vec(rng, -0.002, 0.002));
        }
    }
    return out;
}

Outcome metrics_oracle() {
    Checks checks;
    TestRng rng(606);
    auto as_set = [](const std::vector<Vec3> &pts) {
        EdgePointSet s;
        s.points = pts;
        s.resolution = 0.005;
        return s;
    };
    for (int run = 0; run < 50; ++run) {
        const std::vector<Vec3> a = point_cloud(rng, 1 + rng() % 500);
        const std::vector<Vec3> b = point_cloud(rng, 1 + rng() % 500);
        std::vector<double> a_to_b;
        std::vector<double> b_to_a;
        for (const Vec3 &q : a) {
            a_to_b.push_back(brute_nearest(q, b));
        }
        for (const Vec3 &q : b) {
            b_to_a.push_back(brute_nearest(q, a));
        }
        auto mean = [](const std::vector<double> &v) {
            double s = 0.0;
            for (double x : v) {
                s += x;
            }
            return s / static_cast<double>(v.size());
        };
        auto percent = [](const std::vector<double> &v, double tau) {
            const auto hits = std::count_if(v.begin(), v.end(), [&](double x) { return x <= tau; });
            return 100.0 * static_cast<double>(hits) / static_cast<double>(v.size());
        };
        checks.expect(accuracy(as_set(a), as_set(b)) == mean(a_to_b), "accuracy differs");
        checks.expect(completeness(as_set(a), as_set(b)) == mean(b_to_a), "completeness differs");
        for (double tau : default_taus()) {
            const Prf r = prf(as_set(a), as_set(b), tau);
            const double p = percent(a_to_b, tau);
            const double rc = percent(b_to_a, tau);
            checks.expect(r.precision == p && r.recall == rc, "precision/recall differ");
            const double f = p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
            checks.expect(std::abs(r.fscore - f) <= 1e-12, "F-score differs");
        }
    }
    for (double x : {0.0, 25.0, 50.0, 100.0}) {
        checks.expect(fscore(x, x) == x, fmt("F(%g,%g) != %g", x, x, x));
    }
    return {checks.ok(), checks.summary()};
}

// ------------------------------------------------------------------ 7

GeoMaps flat_maps(int w, int h, double alpha = 1.0, double depth = 2.0) {
    GeoMaps m;
    m.alpha = Image(w, h, alpha);
    m.depth = Image(w, h, depth);
    m.normal = {Image(w, h, 0.0), Image(w, h, 0.0), Image(w, h, 1.0)};
    return m;
}

GeoMaps random_maps(TestRng &rng, int w, int h) {
    GeoMaps m = flat_maps(w, h, 0.0, 1.0);
    for (int r = 0; r < 4; ++r) {
        const int x0 = static_cast<int>(rng() % w);
        const int y0 = static_cast<int>(rng() % h);
        const int x1 = std::min(w, x0 + 3 + static_cast<int>(rng() % 20));
        const int y1 = std::min(h, y0 + 3 + static_cast<int>(rng() % 20));
        const double a = rng() % 2 == 0 ? 1.0 : 0.0;
        const double d = uniform(rng, 0.5, 3.0);
        const Vec3 n = unit_vec(rng);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                m.alpha(x, y) = a;
                m.depth(x, y) = d + uniform(rng, 0.0, 0.002);
                for (int c = 0; c < 3; ++c) {
                    m.normal[c](x, y) = n[c];
                }
            }
        }
    }
    return m;
}

Outcome detector_properties() {
    Checks checks;
    const DetectorConfig cfg;
    { // flat maps with a full mask give no edges
        const Image e = detect_edges(flat_maps(24, 24), cfg);
        checks.expect(std::all_of(e.data().begin(), e.data().end(), [](double v) { return v == 0.0; }),
                      "flat maps gave edges");
    }
    { // square mask: nonzero exactly within the blur radius of a boundary pixel
        const int n = 40;
        GeoMaps m = flat_maps(n, n, 0.0);
        for (int y = 12; y < 28; ++y) {
            for (int x = 12; x < 28; ++x) {
                m.alpha(x, y) = 1.0;
            }
        }
        auto boundary = [&](int u, int v) {
            bool on = false;
            bool off = false;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    (m.alpha.clamped(u + dx, v + dy) > 0.5 ? on : off) = true;
                }
            }
            return on && off;
        };
        const Image e = detect_edges(m, cfg);
        bool exact = true;
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                bool near = false;
                for (int dy = -cfg.blur_radius; dy <= cfg.blur_radius && !near; ++dy) {
                    for (int dx = -cfg.blur_radius; dx <= cfg.blur_radius && !near; ++dx) {
                        near = m.alpha.inside(x + dx, y + dy) && boundary(x + dx, y + dy);
                    }
                }
                exact = exact && (e(x, y) > 0.0) == near && e(x, y) <= 1.0;
            }
        }
        checks.expect(exact, "square mask support differs");
    }
    { // depth step: symmetric blurred band around the step
        const int w = 31;
        GeoMaps m = flat_maps(w, 20);
        for (int y = 0; y < 20; ++y) {
            for (int x = 15; x < w; ++x) {
                m.depth(x, y) = 2.5;
            }
        }
        const Image e = detect_edges(m, cfg);
        bool symmetric = true;
        for (int y = 0; y < 20; ++y) {
            for (int d = 0; d < 14; ++d) {
                symmetric = symmetric && std::abs(e(14 - d, y) - e(15 + d, y)) <= 1e-6;
            }
            symmetric = symmetric && e(14, y) > e(12, y) && e(8, y) == 0.0;
        }
        checks.expect(symmetric, "depth step band not symmetric");
    }

    TestRng rng(707);
    for (int run = 0; run < 100; ++run) {
        const GeoMaps m = random_maps(rng, 40, 32);
        GeoMaps only_alpha = flat_maps(40, 32);
        only_alpha.alpha = m.alpha;
        GeoMaps only_depth = flat_maps(40, 32);
        only_depth.depth = m.depth;
        GeoMaps only_normal = flat_maps(40, 32);
        only_normal.normal = m.normal;
        const Image all = raw_edges(m, cfg);
        bool monotone = true;
        for (const GeoMaps *part : {&only_alpha, &only_depth, &only_normal}) {
            const Image sub = raw_edges(*part, cfg);
            for (std::size_t i = 0; i < all.size(); ++i) {
                monotone = monotone && all.data()[i] >= sub.data()[i];
            }
        }
        checks.expect(monotone, "adding a cue removed an edge pixel");
    }

    const GeoMaps m = random_maps(rng, 64, 48);
    const Image first = detect_edges(m, cfg);
    bool deterministic = true;
    for (int i = 0; i < 5; ++i) {
        deterministic = deterministic && detect_edges(m, cfg) == first;
    }
    checks.expect(deterministic, "repeated runs differ");
    return {checks.ok(), checks.summary()};
}

} // namespace

int main(int argc, char **argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > 8) {
            std::fprintf(stderr, "usage: %s [criterion 1-8 ...]\n", argv[0]);
            return 2;
        }
        wanted.insert(n);
    }
    auto enabled = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };

    bool all_pass = true;
    auto report = [&](int n, const char *name, const std::function<Outcome()> &fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all_pass = all_pass && o.pass;
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
        std::fflush(stdout);
    };

    SynthCache cache;
    std::optional<RunResult> mixed_002;
    auto mixed_run = [&]() -> const RunResult & {
        if (!mixed_002) {
            mixed_002 = run_synthetic(cache, SyntheticShape::Mixed, 0.02, 1, true);
        }
        return *mixed_002;
    };

    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"gradient check", [] { return gradient_check(); }},
        {"rasterizer oracle", [] { return rasterizer_oracle(); }},
        {"synthetic convergence", [&] { return synthetic_convergence(mixed_run()); }},
        {"compactness via topology", [&] { return compactness(cache); }},
        {"topology fixpoints", [] { return topology_fixpoints(); }},
        {"metrics oracle", [] { return metrics_oracle(); }},
        {"detector properties", [] { return detector_properties(); }},
        {"noise robustness", [&] { return noise_curve(cache, mixed_002); }},
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (enabled(n)) {
            report(n, criteria[i].first, criteria[i].second);
        }
    }
    return all_pass ? 0 : 1;
}
