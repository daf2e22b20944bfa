// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/topology.hpp"

#include "edgesplat/errors.hpp"
#include "edgesplat/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <tuple>

namespace edgesplat {

void validate(const TopoConfig &cfg) {
    require(cfg.th_connect > 0.0 && cfg.th_neighbor > 0.0 && cfg.th_offset > 0.0,
            "topology: length thresholds must be positive");
    for (const double r : {cfg.th_overlap, cfg.th_vis, cfg.view_invis_ratio}) {
        require(r > 0.0 && r < 1.0, "topology: ratios must lie in (0,1)");
    }
    require(cfg.th_dir_deg > 0.0 && cfg.th_dir_deg < 90.0, "topology: th_dir must lie in (0,90)");
    require(cfg.edge_intensity_floor >= 0.0 && cfg.edge_intensity_floor <= 1.0,
            "topology: edge_intensity_floor must lie in [0,1]");
}

EditReport &EditReport::operator+=(const EditReport &o) {
    endpoint_merges += o.endpoint_merges;
    overlap_merges += o.overlap_merges;
    colinear_merges += o.colinear_merges;
    filtered += o.filtered;
    points_removed += o.points_removed;
    moved_points.insert(moved_points.end(), o.moved_points.begin(), o.moved_points.end());
    return *this;
}

namespace {

struct EndpointPair {
    double distance;
    std::size_t a;
    std::size_t b;
};

std::size_t find_root(std::vector<std::size_t> &parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

std::size_t merge_endpoints_once(SketchCollection &set, const TopoConfig &cfg, EditReport &report) {
    ControlPointPool &pool = set.pool;

    // pool point -> sketches using it as an endpoint
    std::vector<std::set<std::size_t>> owners(pool.size());
    std::vector<std::size_t> endpoints;
    for (std::size_t s = 0; s < set.sketches.size(); ++s) {
        const Sketch &sk = set.sketches[s];
        if (!sk.alive) {
            continue;
        }
        for (const std::size_t p : {sk.front(), sk.back()}) {
            if (owners[p].empty()) {
                endpoints.push_back(p);
            }
            owners[p].insert(s);
        }
    }
    std::sort(endpoints.begin(), endpoints.end());

    std::vector<EndpointPair> pairs;
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
            const std::size_t a = endpoints[i];
            const std::size_t b = endpoints[j];
            const double d = (pool.points[a] - pool.points[b]).norm();
            if (d >= cfg.th_connect) {
                continue;
            }
            // a sketch's own two endpoints are never joined
            const bool shared = std::any_of(owners[a].begin(), owners[a].end(),
                                            [&](std::size_t s) { return owners[b].count(s) > 0; });
            if (!shared) {
                pairs.push_back({d, a, b});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const EndpointPair &x, const EndpointPair &y) {
        return std::tie(x.distance, x.a, x.b) < std::tie(y.distance, y.a, y.b);
    });

    std::vector<std::size_t> parent(pool.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::size_t merges = 0;
    for (const EndpointPair &pr : pairs) {
        std::size_t ra = find_root(parent, pr.a);
        std::size_t rb = find_root(parent, pr.b);
        if (ra == rb) {
            continue;
        }
        const bool shared = std::any_of(owners[ra].begin(), owners[ra].end(),
                                        [&](std::size_t s) { return owners[rb].count(s) > 0; });
        if (shared) {
            continue;
        }
        if ((pool.points[ra] - pool.points[rb]).norm() >= cfg.th_connect) {
            continue;
        }
        if (rb < ra) {
            std::swap(ra, rb);
        }
        pool.points[ra] = 0.5 * (pool.points[ra] + pool.points[rb]);
        pool.alive[rb] = false;
        parent[rb] = ra;
        owners[ra].insert(owners[rb].begin(), owners[rb].end());
        owners[rb].clear();
        report.moved_points.push_back(ra);
        ++merges;
    }
    if (merges == 0) {
        return 0;
    }
    for (Sketch &sk : set.sketches) {
        if (!sk.alive) {
            continue;
        }
        for (std::size_t &idx : sk.ctrl) {
            idx = find_root(parent, idx);
        }
    }
    return merges;
}

void finish(SketchCollection &set, EditReport &report) {
    report.points_removed += collect_garbage(set);
    std::sort(report.moved_points.begin(), report.moved_points.end());
    report.moved_points.erase(std::unique(report.moved_points.begin(), report.moved_points.end()),
                              report.moved_points.end());
    std::erase_if(report.moved_points, [&](std::size_t p) { return !set.pool.is_live(p); });
}

/// Fraction of `from` samples with some `to` sample closer than radius.
double covered_fraction(const std::vector<SamplePoint> &from, const std::vector<SamplePoint> &to,
                        double radius) {
    if (from.empty()) {
        return 0.0;
    }
    const double r2 = radius * radius;
    std::size_t hits = 0;
    for (const SamplePoint &p : from) {
        for (const SamplePoint &q : to) {
            if ((p.position - q.position).squaredNorm() < r2) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(from.size());
}

} // namespace

EditReport merge_endpoints(SketchCollection &set, const TopoConfig &cfg) {
    validate(cfg);
    check_structure(set);
    EditReport report;
    const std::size_t before = set.pool.live_count();
    while (const std::size_t merged = merge_endpoints_once(set, cfg, report)) {
        report.endpoint_merges += merged;
    }
    report.points_removed += before - set.pool.live_count();
    finish(set, report);
    return report;
}

EditReport merge_overlapping(SketchCollection &set, const TopoConfig &cfg, double step) {
    validate(cfg);
    require(step > 0.0, "merge_overlapping: step must be positive");
    check_structure(set);
    EditReport report;

    bool changed = true;
    while (changed) {
        changed = false;
        const std::size_t n = set.sketches.size();
        std::vector<std::vector<SamplePoint>> samples(n);
        std::vector<Aabb> boxes(n);
        std::vector<double> lengths(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Sketch &sk = set.sketches[i];
            if (!sk.alive) {
                continue;
            }
            samples[i] = sample_points(sk, set.pool, step, i);
            boxes[i] = sketch_aabb(sk, set.pool, cfg.th_neighbor);
            lengths[i] = arc_length(sk, set.pool);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n && set.sketches[i].alive; ++j) {
                if (!set.sketches[j].alive || !boxes[i].overlaps(boxes[j])) {
                    continue;
                }
                const double r_ij = covered_fraction(samples[i], samples[j], cfg.th_neighbor);
                const double r_ji = covered_fraction(samples[j], samples[i], cfg.th_neighbor);
                const bool i_covered = r_ij > cfg.th_overlap;
                const bool j_covered = r_ji > cfg.th_overlap;
                if (!i_covered && !j_covered) {
                    continue;
                }
                std::size_t victim = i_covered ? i : j;
                if (i_covered && j_covered) {
                    if (r_ij != r_ji) {
                        victim = r_ij > r_ji ? i : j;
                    } else if (lengths[i] != lengths[j]) {
                        victim = lengths[i] < lengths[j] ? i : j;
                    } else {
                        victim = j;
                    }
                }
                set.sketches[victim].alive = false;
                ++report.overlap_merges;
                changed = true;
            }
        }
        if (changed) {
            report.points_removed += collect_garbage(set);
        }
    }
    finish(set, report);
    return report;
}

namespace {

struct LineGeom {
    Vec3 a;
    Vec3 b;
    Vec3 dir;
    double length;
};

LineGeom line_geom(const Sketch &sk, const ControlPointPool &pool) {
    LineGeom g;
    g.a = pool.points[sk.ctrl[0]];
    g.b = pool.points[sk.ctrl[1]];
    g.length = (g.b - g.a).norm();
    g.dir = g.length > 0.0 ? Vec3((g.b - g.a) / g.length) : Vec3::Zero();
    return g;
}

double offset_from_line(const Vec3 &p, const LineGeom &line) {
    const Vec3 rel = p - line.a;
    return (rel - line.dir * rel.dot(line.dir)).norm();
}

} // namespace

EditReport merge_colinear(SketchCollection &set, const TopoConfig &cfg) {
    validate(cfg);
    check_structure(set);
    EditReport report;
    const double cos_limit = std::cos(cfg.th_dir_deg * std::numbers::pi / 180.0);
    const double pad = std::max(cfg.th_connect, cfg.th_offset);

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < set.sketches.size(); ++i) {
            for (std::size_t j = i + 1; j < set.sketches.size(); ++j) {
                Sketch &si = set.sketches[i];
                Sketch &sj = set.sketches[j];
                if (!si.alive || !sj.alive || si.kind != SketchKind::Line ||
                    sj.kind != SketchKind::Line) {
                    continue;
                }
                if (!sketch_aabb(si, set.pool, pad).overlaps(sketch_aabb(sj, set.pool, pad))) {
                    continue;
                }
                const LineGeom li = line_geom(si, set.pool);
                const LineGeom lj = line_geom(sj, set.pool);
                if (li.length <= 0.0 || lj.length <= 0.0) {
                    continue;
                }
                if (std::abs(li.dir.dot(lj.dir)) < cos_limit) {
                    continue;
                }
                const double offset =
                    std::max({offset_from_line(lj.a, li), offset_from_line(lj.b, li),
                              offset_from_line(li.a, lj), offset_from_line(li.b, lj)});
                if (offset > cfg.th_offset) {
                    continue;
                }
                // project both onto the longer line
                const bool i_longer = li.length >= lj.length;
                const LineGeom &ref = i_longer ? li : lj;
                const std::array<std::size_t, 4> ids = {si.ctrl[0], si.ctrl[1], sj.ctrl[0],
                                                        sj.ctrl[1]};
                std::array<double, 4> proj{};
                for (std::size_t k = 0; k < 4; ++k) {
                    proj[k] = (set.pool.points[ids[k]] - ref.a).dot(ref.dir);
                }
                const double lo_i = std::min(proj[0], proj[1]);
                const double hi_i = std::max(proj[0], proj[1]);
                const double lo_j = std::min(proj[2], proj[3]);
                const double hi_j = std::max(proj[2], proj[3]);
                const double gap = std::max(lo_i, lo_j) - std::min(hi_i, hi_j);
                if (gap > cfg.th_connect) {
                    continue;
                }
                const auto lo = static_cast<std::size_t>(
                    std::min_element(proj.begin(), proj.end()) - proj.begin());
                const auto hi = static_cast<std::size_t>(
                    std::max_element(proj.begin(), proj.end()) - proj.begin());
                if (ids[lo] == ids[hi]) {
                    continue;
                }
                Sketch &keep = i_longer ? si : sj;
                Sketch &drop = i_longer ? sj : si;
                keep.ctrl = {ids[lo], ids[hi]};
                drop.alive = false;
                ++report.colinear_merges;
                changed = true;
            }
        }
        if (changed) {
            report.points_removed += collect_garbage(set);
        }
    }
    finish(set, report);
    return report;
}

bool point_visibility(const Vec3 &point, std::span<const View> views, const TopoConfig &cfg) {
    require(!views.empty(), "point_visibility: no views");
    std::size_t unsupported = 0;
    for (const View &view : views) {
        const Camera &cam = view.camera;
        const Vec3 pc = cam.to_camera(point);
        bool supported = false;
        if (pc.z() > kNearPlane) {
            const Vec2 uv = cam.project(pc);
            const auto x = static_cast<long>(std::lround(uv.x()));
            const auto y = static_cast<long>(std::lround(uv.y()));
            if (x >= 0 && y >= 0 && x < view.gt.width() && y < view.gt.height()) {
                supported = view.gt(static_cast<int>(x), static_cast<int>(y)) >=
                            cfg.edge_intensity_floor;
            }
        }
        if (!supported) {
            ++unsupported;
        }
    }
    const double fraction = static_cast<double>(unsupported) / static_cast<double>(views.size());
    return !(fraction > cfg.view_invis_ratio + 1e-12);
}

EditReport filter_invisible(SketchCollection &set, std::span<const View> views, const TopoConfig &cfg,
                            double step) {
    validate(cfg);
    require(!views.empty(), "filter_invisible: no views");
    check_structure(set);
    EditReport report;
    for (std::size_t i = 0; i < set.sketches.size(); ++i) {
        Sketch &sk = set.sketches[i];
        if (!sk.alive) {
            continue;
        }
        const auto samples = sample_points(sk, set.pool, step, i);
        std::size_t invisible = 0;
        for (const SamplePoint &s : samples) {
            if (!point_visibility(s.position, views, cfg)) {
                ++invisible;
            }
        }
        const double fraction = static_cast<double>(invisible) / static_cast<double>(samples.size());
        if (fraction > cfg.th_vis + 1e-12) {
            sk.alive = false;
            ++report.filtered;
        }
    }
    finish(set, report);
    return report;
}

EditReport topology_pass(SketchCollection &set, const TopoConfig &cfg, double step) {
    EditReport report = merge_endpoints(set, cfg);
    report += merge_overlapping(set, cfg, step);
    report += merge_colinear(set, cfg);
    finish(set, report);
    return report;
}

} // namespace edgesplat
