// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/errors.hpp"
#include "edgesplat/topology.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace edgesplat;
using namespace edgesplat::testing;

namespace {

constexpr double kStep = 0.005;

Vec3 point_of(const SketchCollection &set, std::size_t sketch, std::size_t k) {
    return set.pool.points[set.sketches[sketch].ctrl[k]];
}

/// Camera at the origin looking down +z.
View flat_view(int width, int height, double focal, double fill) {
    return {axis_camera(width, height, focal), EdgeImage(width, height, fill)};
}

SketchCollection random_topology_scene(TestRng &rng) {
    SketchCollection set;
    // a handful of anchor points so that endpoints, overlaps and colinear
    // pieces actually occur
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
        case 1: {
            const double t0 = uniform(rng, 0.0, 0.4);
            const double t1 = uniform(rng, 0.6, 1.0);
            add_line(set, a + t0 * (b - a) + uniform_vec(rng, -0.002, 0.002),
                     a + t1 * (b - a) + uniform_vec(rng, -0.002, 0.002));
            break;
        }
        default:
            add_bezier(set, {a, a + uniform_vec(rng, -0.05, 0.05), b + uniform_vec(rng, -0.05, 0.05), b});
        }
    }
    return set;
}

} // namespace

// ---------------------------------------------------------------- endpoints

TEST(MergeEndpoints, FiveMillimeterGapJoinsAtMidpoint) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
    add_line(set, Vec3(0.105, 0, 0), Vec3(0.2, 0.05, 0));
    const EditReport r = merge_endpoints(set, {});
    EXPECT_EQ(r.endpoint_merges, 1u);
    EXPECT_EQ(set.pool.live_count(), 3u);
    EXPECT_EQ(set.sketches[0].back(), set.sketches[1].front());
    EXPECT_LE((point_of(set, 0, 1) - Vec3(0.1025, 0, 0)).norm(), 1e-15);
}

TEST(MergeEndpoints, FifteenMillimetersStayApart) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
    add_line(set, Vec3(0.115, 0, 0), Vec3(0.2, 0.05, 0));
    EXPECT_EQ(merge_endpoints(set, {}).endpoint_merges, 0u);
    EXPECT_EQ(set.pool.live_count(), 4u);
}

TEST(MergeEndpoints, ThreeCloseEndpointsBecomeOneInDistanceOrder) {
    const Vec3 p1(0, 0, 0);
    const Vec3 p2(0.004, 0, 0);
    const Vec3 p3(0.0015, 0.003, 0);
    SketchCollection set;
    add_line(set, p1, Vec3(-0.1, 0, 0));
    add_line(set, p2, Vec3(0.1, 0, 0));
    add_line(set, p3, Vec3(0, 0.1, 0));
    // greedy oracle: the closest pair fuses first, its mean then absorbs the third
    const double d12 = (p1 - p2).norm();
    const double d13 = (p1 - p3).norm();
    const double d23 = (p2 - p3).norm();
    ASSERT_LT(d13, d23);
    ASSERT_LT(d23, d12);
    const Vec3 expected = 0.5 * (0.5 * (p1 + p3) + p2);
    const EditReport r = merge_endpoints(set, {});
    EXPECT_EQ(r.endpoint_merges, 2u);
    EXPECT_EQ(set.pool.live_count(), 4u);
    EXPECT_EQ(set.sketches[0].front(), set.sketches[1].front());
    EXPECT_EQ(set.sketches[0].front(), set.sketches[2].front());
    EXPECT_LE((point_of(set, 0, 0) - expected).norm(), 1e-15);
}

TEST(MergeEndpoints, SameSketchEndpointsAreNotJoined) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.004, 0, 0));
    add_bezier(set, {Vec3(0.5, 0, 0), Vec3(0.6, 0.1, 0), Vec3(0.6, -0.1, 0), Vec3(0.503, 0, 0)});
    EXPECT_EQ(merge_endpoints(set, {}).endpoint_merges, 0u);
}

TEST(MergeEndpoints, NeverChangesSketchCountAndRemovesOnePointPerMerge) {
    TestRng rng(1);
    for (int run = 0; run < 50; ++run) {
        SketchCollection set = random_topology_scene(rng);
        const std::size_t sketches = set.live_sketch_count();
        const std::size_t points = set.pool.live_count();
        const EditReport r = merge_endpoints(set, {});
        EXPECT_EQ(set.live_sketch_count(), sketches);
        EXPECT_EQ(points - set.pool.live_count(), r.endpoint_merges);
    }
}

// ---------------------------------------------------------------- overlap

TEST(MergeOverlapping, ShortLineOnLongLineIsRemoved) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
    add_line(set, Vec3(0.04, 0, 0), Vec3(0.06, 0, 0));
    const EditReport r = merge_overlapping(set, {}, kStep);
    EXPECT_EQ(r.overlap_merges, 1u);
    EXPECT_TRUE(set.sketches[0].alive);
    EXPECT_FALSE(set.sketches[1].alive);
    EXPECT_EQ(set.pool.live_count(), 2u);
}

TEST(MergeOverlapping, DistantParallelLinesSurvive) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
    add_line(set, Vec3(0, 0.05, 0), Vec3(0.1, 0.05, 0));
    EXPECT_EQ(merge_overlapping(set, {}, kStep).overlap_merges, 0u);
    EXPECT_EQ(set.live_sketch_count(), 2u);
}

TEST(MergeOverlapping, IdenticalSketchesLeaveOne) {
    SketchCollection set;
    const std::array<Vec3, 4> c = {Vec3(0, 0, 0), Vec3(0.05, 0.05, 0), Vec3(0.1, -0.05, 0),
                                   Vec3(0.15, 0, 0)};
    add_bezier(set, c);
    add_bezier(set, c);
    EXPECT_EQ(merge_overlapping(set, {}, kStep).overlap_merges, 1u);
    EXPECT_EQ(set.live_sketch_count(), 1u);
    // the tie falls to the higher id
    EXPECT_TRUE(set.sketches[0].alive);
}

TEST(MergeOverlapping, EqualRatiosKillTheShorterSketch) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.1, 0, 0));
    add_line(set, Vec3(0, 0.002, 0), Vec3(0.098, 0.002, 0));
    merge_overlapping(set, {}, kStep);
    EXPECT_EQ(set.live_sketch_count(), 1u);
    EXPECT_TRUE(set.sketches[0].alive);
}

// ---------------------------------------------------------------- colinear

TEST(MergeColinear, TouchingPiecesBecomeOneLine) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.4, 0, 0));
    add_line(set, Vec3(0.405, 0, 0), Vec3(1, 0, 0));
    const EditReport r = merge_colinear(set, {});
    EXPECT_EQ(r.colinear_merges, 1u);
    EXPECT_EQ(set.live_sketch_count(), 1u);
    EXPECT_EQ(set.pool.live_count(), 2u);
    const Sketch &s = set.sketches[0].alive ? set.sketches[0] : set.sketches[1];
    const Vec3 a = set.pool.points[s.front()];
    const Vec3 b = set.pool.points[s.back()];
    const bool forward = a.norm() < b.norm();
    EXPECT_LE(((forward ? a : b) - Vec3(0, 0, 0)).norm(), 1e-15);
    EXPECT_LE(((forward ? b : a) - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(MergeColinear, TwentyMillimeterGapStaysSplit) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.4, 0, 0));
    add_line(set, Vec3(0.42, 0, 0), Vec3(1, 0, 0));
    EXPECT_EQ(merge_colinear(set, {}).colinear_merges, 0u);
}

TEST(MergeColinear, TenDegreesApartStaysSplit) {
    SketchCollection set;
    const double a = 10.0 * std::numbers::pi / 180.0;
    add_line(set, Vec3(-0.4, 0, 0), Vec3(0, 0, 0));
    add_line(set, Vec3(0.001, 0, 0), Vec3(0.001 + 0.4 * std::cos(a), 0.4 * std::sin(a), 0));
    EXPECT_EQ(merge_colinear(set, {}).colinear_merges, 0u);
}

TEST(MergeColinear, CurvesAreLeftAlone) {
    SketchCollection set;
    add_line(set, Vec3(0, 0, 0), Vec3(0.4, 0, 0));
    add_bezier(set, {Vec3(0.405, 0, 0), Vec3(0.6, 0, 0), Vec3(0.8, 0, 0), Vec3(1, 0, 0)});
    EXPECT_EQ(merge_colinear(set, {}).colinear_merges, 0u);
}

TEST(MergeColinear, MergedLineCoversAllOriginalEndpoints) {
    TestRng rng(2);
    const TopoConfig cfg;
    int merged = 0;
    for (int run = 0; run < 200; ++run) {
        const Vec3 dir = unit_vec(rng);
        const Vec3 origin = uniform_vec(rng, -0.2, 0.2);
        const Vec3 side = dir.cross(unit_vec(rng)).normalized();
        const double split = uniform(rng, 0.1, 0.3);
        const std::array<Vec3, 4> ends = {
            origin, origin + split * dir + uniform(rng, -0.003, 0.003) * side,
            origin + (split + uniform(rng, -0.02, 0.008)) * dir + uniform(rng, -0.003, 0.003) * side,
            origin + uniform(rng, 0.35, 0.5) * dir + uniform(rng, -0.003, 0.003) * side};
        SketchCollection set;
        add_line(set, ends[0], ends[1]);
        add_line(set, ends[2], ends[3]);
        if (merge_colinear(set, cfg).colinear_merges == 0) {
            continue;
        }
        ++merged;
        const Sketch &s = set.sketches[0].alive ? set.sketches[0] : set.sketches[1];
        const Vec3 a = set.pool.points[s.front()];
        const Vec3 d = (set.pool.points[s.back()] - a).normalized();
        for (const Vec3 &e : ends) {
            const Vec3 rel = e - a;
            EXPECT_LE((rel - rel.dot(d) * d).norm(), cfg.th_offset);
        }
    }
    EXPECT_GT(merged, 50);
}

// ---------------------------------------------------------------- visibility

TEST(Visibility, BrightEverywhereIsVisible) {
    std::vector<View> views(5, flat_view(32, 32, 40.0, 1.0));
    EXPECT_TRUE(point_visibility(Vec3(0.01, 0.02, 1.0), views, {}));
}

TEST(Visibility, OutsideEveryFrustumIsInvisible) {
    std::vector<View> views(5, flat_view(32, 32, 40.0, 1.0));
    EXPECT_FALSE(point_visibility(Vec3(5.0, 0.0, 1.0), views, {}));
    EXPECT_FALSE(point_visibility(Vec3(0.0, 0.0, -1.0), views, {}));
}

TEST(Visibility, TenPercentSupportIsTheStrictBoundary) {
    std::vector<View> views(50, flat_view(32, 32, 40.0, 0.0));
    for (int i = 0; i < 5; ++i) {
        views[i].gt = EdgeImage(32, 32, 1.0);
    }
    EXPECT_TRUE(point_visibility(Vec3(0, 0, 1), views, {}));
    views[4].gt = EdgeImage(32, 32, 0.0);
    EXPECT_FALSE(point_visibility(Vec3(0, 0, 1), views, {}));
}

TEST(Visibility, IntensityFloorDecidesSupport) {
    std::vector<View> views(4, flat_view(32, 32, 40.0, 0.25));
    EXPECT_TRUE(point_visibility(Vec3(0, 0, 1), views, {}));
    for (View &v : views) {
        v.gt = EdgeImage(32, 32, 0.2499);
    }
    EXPECT_FALSE(point_visibility(Vec3(0, 0, 1), views, {}));
}

TEST(FilterInvisible, SupportedSketchIsKept) {
    std::vector<View> views(3, flat_view(64, 64, 60.0, 1.0));
    SketchCollection set;
    add_line(set, Vec3(-0.1, 0, 1), Vec3(0.1, 0.05, 1));
    EXPECT_EQ(filter_invisible(set, views, {}, kStep).filtered, 0u);
    EXPECT_EQ(set.live_sketch_count(), 1u);
}

TEST(FilterInvisible, PhantomSketchIsRemovedAndItsPointsCollected) {
    std::vector<View> views(3, flat_view(64, 64, 60.0, 0.0));
    SketchCollection set;
    add_line(set, Vec3(-0.1, 0, 1), Vec3(0.1, 0.05, 1));
    const EditReport r = filter_invisible(set, views, {}, kStep);
    EXPECT_EQ(r.filtered, 1u);
    EXPECT_EQ(set.live_sketch_count(), 0u);
    EXPECT_EQ(set.pool.live_count(), 0u);
}

TEST(FilterInvisible, HalfInvisibleIsKeptMoreIsRemoved) {
    // samples land on columns 29, 31, 33, 35; only columns <= 32 are bright
    EdgeImage half(65, 65, 0.0);
    for (int y = 0; y < 65; ++y) {
        for (int x = 0; x <= 32; ++x) {
            half(x, y) = 1.0;
        }
    }
    const std::vector<View> views(2, View{axis_camera(65, 65, 200.0), half});
    SketchCollection kept;
    add_line(kept, Vec3(-0.015, 0, 1), Vec3(0.015, 0, 1));
    ASSERT_EQ(sample_points(kept.sketches[0], kept.pool, 0.01).size(), 4u);
    EXPECT_EQ(filter_invisible(kept, views, {}, 0.01).filtered, 0u);

    SketchCollection removed;
    add_line(removed, Vec3(-0.005, 0, 1), Vec3(0.025, 0, 1));
    EXPECT_EQ(filter_invisible(removed, views, {}, 0.01).filtered, 1u);
}

// ---------------------------------------------------------------- fixpoints

TEST(Fixpoint, EveryMergeIsIdempotent) {
    TestRng rng(3);
    const TopoConfig cfg;
    for (int run = 0; run < 100; ++run) {
        SketchCollection set = random_topology_scene(rng);
        merge_endpoints(set, cfg);
        EXPECT_EQ(merge_endpoints(set, cfg).total_edits(), 0u);
        merge_overlapping(set, cfg, kStep);
        EXPECT_EQ(merge_overlapping(set, cfg, kStep).total_edits(), 0u);
        merge_colinear(set, cfg);
        EXPECT_EQ(merge_colinear(set, cfg).total_edits(), 0u);
    }
}

TEST(Fixpoint, PassesNeverOrphanOrReferenceDeadPoints) {
    TestRng rng(4);
    const TopoConfig cfg;
    std::vector<View> views(3, flat_view(64, 64, 60.0, 0.0));
    for (View &v : views) {
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 32; ++x) {
                v.gt(x, y) = 1.0;
            }
        }
    }
    for (int run = 0; run < 100; ++run) {
        SketchCollection set = random_topology_scene(rng);
        for (Vec3 &p : set.pool.points) {
            p.z() += 1.0;
        }
        const std::size_t before = set.live_sketch_count();
        topology_pass(set, cfg, kStep);
        EXPECT_NO_THROW(check_structure(set));
        EXPECT_NO_THROW(check_no_orphans(set));
        filter_invisible(set, views, cfg, kStep);
        EXPECT_NO_THROW(check_structure(set));
        EXPECT_NO_THROW(check_no_orphans(set));
        EXPECT_LE(set.live_sketch_count(), before);
    }
}

TEST(TopoConfigValidation, RejectsOutOfRangeThresholds) {
    TopoConfig cfg;
    cfg.th_connect = 0.0;
    EXPECT_THROW(validate(cfg), ContractViolation);
    cfg = {};
    cfg.th_overlap = 1.0;
    EXPECT_THROW(validate(cfg), ContractViolation);
    cfg = {};
    cfg.th_dir_deg = 90.0;
    EXPECT_THROW(validate(cfg), ContractViolation);
}
