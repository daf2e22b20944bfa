// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/sketch.hpp"
#include "edgesplat/view.hpp"

#include <span>
#include <vector>

namespace edgesplat {

/// Thresholds for the topology operations. Distances are in scene units
/// and default to 1% of a 1 m normalized scene.
struct TopoConfig {
    double th_connect = 0.010;
    double th_neighbor = 0.010;
    double th_overlap = 0.80;
    double th_dir_deg = 5.0;
    double th_offset = 0.010;
    double th_vis = 0.50;
    double view_invis_ratio = 0.90;
    double edge_intensity_floor = 0.25;
};

void validate(const TopoConfig &cfg);

struct EditReport {
    std::size_t endpoint_merges = 0;
    std::size_t overlap_merges = 0;
    std::size_t colinear_merges = 0;
    std::size_t filtered = 0;
    std::size_t points_removed = 0;
    /// Pool points whose position was rewritten by a merge.
    std::vector<std::size_t> moved_points;

    [[nodiscard]] std::size_t total_edits() const {
        return endpoint_merges + overlap_merges + colinear_merges + filtered;
    }
    EditReport &operator+=(const EditReport &o);
};

/// Joins endpoints of different sketches closer than th_connect into one
/// pool point at their mean. Candidate pairs are processed greedily in
/// ascending distance; the pass repeats until nothing merges.
EditReport merge_endpoints(SketchCollection &set, const TopoConfig &cfg);

/// Removes sketches that are almost entirely covered by another sketch.
EditReport merge_overlapping(SketchCollection &set, const TopoConfig &cfg, double step);

/// Fuses nearly co-linear, nearly touching line pairs into one line.
EditReport merge_colinear(SketchCollection &set, const TopoConfig &cfg);

/// True unless the point lacks edge support in more than view_invis_ratio
/// of the views.
bool point_visibility(const Vec3 &point, std::span<const View> views, const TopoConfig &cfg);

/// Kills sketches whose fraction of invisible samples exceeds th_vis.
EditReport filter_invisible(SketchCollection &set, std::span<const View> views, const TopoConfig &cfg,
                            double step);

/// merge_endpoints, merge_overlapping, merge_colinear in that order.
EditReport topology_pass(SketchCollection &set, const TopoConfig &cfg, double step);

} // namespace edgesplat
