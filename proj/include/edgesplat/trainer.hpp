// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/adam.hpp"
#include "edgesplat/loss.hpp"
#include "edgesplat/sketch.hpp"
#include "edgesplat/topology.hpp"
#include "edgesplat/view.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace edgesplat {

struct TrainConfig {
    int epochs = 1000;
    /// Sampling step along sketches (m).
    double step = 0.005;
    double lr_points = 2e-4;
    double lr_opacity = 1e-2;
    double lr_logscale = 5e-3;
    std::uint64_t seed = 0;
    bool topology = true;
    /// First topology pass runs after this epoch...
    int topology_warmup = 100;
    /// ...and then every `topology_interval` epochs.
    int topology_interval = 50;
    bool filter_at_end = true;
    std::size_t loss_pixels_per_class = kLossPixelsPerClass;
    /// When set, every sketch starts from this scale (m) instead of the one
    /// stored in the initialization.
    std::optional<Vec3> init_scale;
    int threads = 1;
    AdamHyper adam;
};

void validate(const TrainConfig &cfg);

/// Frozen per-sketch sample parameters for one gradient step. Entries of
/// dead sketches are empty.
using SamplingPlan = std::vector<std::vector<double>>;

SamplingPlan make_sampling_plan(const SketchCollection &set, double step);

/// Gradients of the accumulated loss, indexed like the pool and sketch list.
struct SketchGrads {
    std::vector<Vec3> points;
    std::vector<double> opacity_raw;
    std::vector<Vec3> log_scale;
    double loss = 0.0;
    std::size_t empty_views = 0;

    void reset(const SketchCollection &set);
    SketchGrads &operator+=(const SketchGrads &o);
};

/// Sample -> build -> project -> render -> sampled L1 -> backward -> chain,
/// summed over views in order. `view_seeds[v]` seeds the pixel draw of view v.
/// The plan defaults to arc-length sampling at cfg.step.
SketchGrads epoch_gradients(const SketchCollection &set, std::span<const View> views,
                            const TrainConfig &cfg, std::span<const std::uint64_t> view_seeds,
                            const SamplingPlan *plan = nullptr);

/// Per-view seeds for an epoch derived from the run seed.
std::vector<std::uint64_t> epoch_view_seeds(std::uint64_t seed, int epoch, std::size_t views);

/// All Gaussians of the live sketches under a sampling plan, in sketch order.
std::vector<Gaussian3D> sketch_gaussians(const SketchCollection &set, const SamplingPlan &plan);
/// Convenience: arc-length sampling at `step`.
std::vector<Gaussian3D> sketch_gaussians(const SketchCollection &set, double step);

/// Adam state for the three parameter classes of a sketch set.
class SketchOptimizer {
  public:
    SketchOptimizer(const SketchCollection &set, const TrainConfig &cfg);

    void step(SketchCollection &set, const SketchGrads &grads);
    /// Carries moments across a compaction; moments of `reset_points`
    /// (old indices) are zeroed.
    void remap(const CompactionMap &map, std::span<const std::size_t> reset_points);

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] long steps() const { return t_; }

  private:
    AdamMoments points_;
    AdamMoments opacity_;
    AdamMoments log_scale_;
    double lr_points_;
    double lr_opacity_;
    double lr_logscale_;
    AdamHyper hyper_;
    long t_ = 0;
};

struct TrainLogRow {
    int epoch = 0;
    double loss = 0.0;
    std::size_t sketches = 0;
    std::size_t points = 0;
    double wallclock_ms = 0.0;
};

struct TopologyEvent {
    int epoch = 0;
    EditReport report;
};

struct TrainResult {
    SketchCollection sketches;
    std::vector<TrainLogRow> log;
    std::vector<TopologyEvent> topology;
};

using EpochCallback = std::function<void(const TrainLogRow &)>;

TrainResult train(const SketchCollection &init, std::span<const View> views, const TrainConfig &cfg,
                  const TopoConfig &topo = {}, const EpochCallback &on_epoch = {});

} // namespace edgesplat
