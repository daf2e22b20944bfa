// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/trainer.hpp"

#include "edgesplat/errors.hpp"
#include "edgesplat/gaussian.hpp"
#include "edgesplat/rasterizer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace edgesplat {

void validate(const TrainConfig &cfg) {
    require(cfg.epochs >= 0, "train: epochs must be non-negative");
    require(cfg.step > 0.0, "train: step must be positive");
    require(cfg.lr_points > 0.0 && cfg.lr_opacity > 0.0 && cfg.lr_logscale > 0.0,
            "train: learning rates must be positive");
    require(cfg.topology_interval >= 1, "train: topology_interval must be >= 1");
    require(cfg.topology_warmup >= 0, "train: topology_warmup must be >= 0");
    require(cfg.loss_pixels_per_class >= 1, "train: loss_pixels_per_class must be >= 1");
    require(cfg.threads >= 1, "train: threads must be >= 1");
    if (cfg.init_scale) {
        require((cfg.init_scale->array() > 0.0).all(), "train: init_scale must be positive");
    }
}

SamplingPlan make_sampling_plan(const SketchCollection &set, double step) {
    SamplingPlan plan(set.sketches.size());
    for (std::size_t i = 0; i < set.sketches.size(); ++i) {
        if (set.sketches[i].alive) {
            plan[i] = sample_parameters(set.sketches[i], set.pool, step);
        }
    }
    return plan;
}

void SketchGrads::reset(const SketchCollection &set) {
    points.assign(set.pool.size(), Vec3::Zero());
    opacity_raw.assign(set.sketches.size(), 0.0);
    log_scale.assign(set.sketches.size(), Vec3::Zero());
    loss = 0.0;
    empty_views = 0;
}

SketchGrads &SketchGrads::operator+=(const SketchGrads &o) {
    require(points.size() == o.points.size() && opacity_raw.size() == o.opacity_raw.size(),
            "SketchGrads: shape mismatch");
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i] += o.points[i];
    }
    for (std::size_t i = 0; i < opacity_raw.size(); ++i) {
        opacity_raw[i] += o.opacity_raw[i];
        log_scale[i] += o.log_scale[i];
    }
    loss += o.loss;
    empty_views += o.empty_views;
    return *this;
}

std::vector<std::uint64_t> epoch_view_seeds(std::uint64_t seed, int epoch, std::size_t views) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::vector<std::uint32_t> words(2 * views);
    seq.generate(words.begin(), words.end());
    std::vector<std::uint64_t> out(views);
    for (std::size_t v = 0; v < views; ++v) {
        out[v] = (static_cast<std::uint64_t>(words[2 * v]) << 32) | words[2 * v + 1];
    }
    return out;
}

namespace {

struct SampledScene {
    std::vector<SamplePoint> samples;
    std::vector<Gaussian3D> gaussians;
};

SampledScene sample_scene(const SketchCollection &set, const SamplingPlan &plan) {
    require(plan.size() == set.sketches.size(), "sampling plan does not match sketch list");
    SampledScene scene;
    for (std::size_t k = 0; k < set.sketches.size(); ++k) {
        const Sketch &sk = set.sketches[k];
        if (!sk.alive) {
            continue;
        }
        const Vec3 scale = sk.scale();
        const double opacity = sk.opacity();
        for (const SamplePoint &s : sample_at(sk, set.pool, plan[k], k)) {
            scene.gaussians.push_back(build_gaussian(s, scale, opacity));
            scene.samples.push_back(s);
        }
    }
    return scene;
}

void view_gradients(const SketchCollection &set, const SampledScene &scene, const View &view,
                    const TrainConfig &cfg, std::uint64_t seed, SketchGrads &out) {
    out.reset(set);
    const SplatRaster raster(scene.gaussians, view.camera);
    require(view.gt.width() == view.camera.width && view.gt.height() == view.camera.height,
            "epoch_gradients: ground truth size does not match camera");

    Rng rng(seed);
    LossPixels drawn = draw_loss_pixels(view.gt, rng, cfg.loss_pixels_per_class);
    const std::vector<double> values = raster.shade(drawn.pixels);
    const LossResult loss = l1_at_pixels(values, view.gt, std::move(drawn));
    out.loss = loss.loss;
    if (raster.visible_count() == 0) {
        out.empty_views = 1;
        return;
    }

    const std::vector<Gaussian3DGrad> grads = raster.backward(loss.grads);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        const Gaussian3DGrad &g = grads[i];
        if (g.opacity == 0.0 && g.mean.isZero(0.0) && g.cov.isZero(0.0)) {
            continue;
        }
        const SamplePoint &s = scene.samples[i];
        const Sketch &sk = set.sketches[s.sketch_id];
        const Vec3 scale = sk.scale();
        const double opacity = sk.opacity();

        const CovarianceGrad cg = oriented_covariance_backward(s.tangent, scale, g.cov);
        out.log_scale[s.sketch_id] += cg.scale.cwiseProduct(scale);
        out.opacity_raw[s.sketch_id] += g.opacity * opacity * (1.0 - opacity);

        Vec3 d_derivative = Vec3::Zero();
        if (!s.degenerate) {
            const double n = s.derivative.norm();
            d_derivative = (cg.tangent - s.tangent * s.tangent.dot(cg.tangent)) / n;
        }
        const auto w = basis_weights(sk.kind, s.t);
        const auto dw = basis_derivative_weights(sk.kind, s.t);
        for (std::size_t k = 0; k < sk.ctrl.size(); ++k) {
            out.points[sk.ctrl[k]] += w[k] * g.mean + dw[k] * d_derivative;
        }
    }
}

} // namespace

std::vector<Gaussian3D> sketch_gaussians(const SketchCollection &set, const SamplingPlan &plan) {
    return sample_scene(set, plan).gaussians;
}

std::vector<Gaussian3D> sketch_gaussians(const SketchCollection &set, double step) {
    return sketch_gaussians(set, make_sampling_plan(set, step));
}

SketchGrads epoch_gradients(const SketchCollection &set, std::span<const View> views,
                            const TrainConfig &cfg, std::span<const std::uint64_t> view_seeds,
                            const SamplingPlan *plan) {
    require(!views.empty(), "epoch_gradients: at least one view is required");
    require(view_seeds.size() == views.size(), "epoch_gradients: one seed per view required");
    check_structure(set);

    const SamplingPlan own = plan ? SamplingPlan{} : make_sampling_plan(set, cfg.step);
    const SampledScene scene = sample_scene(set, plan ? *plan : own);

    std::vector<SketchGrads> per_view(views.size());
    const auto workers = static_cast<std::size_t>(std::max(1, cfg.threads));
    if (workers == 1 || views.size() == 1) {
        for (std::size_t v = 0; v < views.size(); ++v) {
            view_gradients(set, scene, views[v], cfg, view_seeds[v], per_view[v]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(views.size());
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, views.size()); ++w) {
            pool.emplace_back([&] {
                for (std::size_t v = next++; v < views.size(); v = next++) {
                    try {
                        view_gradients(set, scene, views[v], cfg, view_seeds[v], per_view[v]);
                    } catch (...) {
                        errors[v] = std::current_exception();
                    }
                }
            });
        }
        pool.clear();
        for (const auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    // fixed view order keeps the sum reproducible for any thread count
    SketchGrads total;
    total.reset(set);
    for (const SketchGrads &g : per_view) {
        total += g;
    }
    return total;
}

SketchOptimizer::SketchOptimizer(const SketchCollection &set, const TrainConfig &cfg)
    : lr_points_(cfg.lr_points), lr_opacity_(cfg.lr_opacity), lr_logscale_(cfg.lr_logscale),
      hyper_(cfg.adam) {
    points_.resize(3 * set.pool.size());
    opacity_.resize(set.sketches.size());
    log_scale_.resize(3 * set.sketches.size());
}

std::size_t SketchOptimizer::parameter_count() const {
    return points_.size() + opacity_.size() + log_scale_.size();
}

void SketchOptimizer::step(SketchCollection &set, const SketchGrads &grads) {
    require(points_.size() == 3 * set.pool.size() && opacity_.size() == set.sketches.size(),
            "SketchOptimizer: state does not match sketch set");
    ++t_;
    std::vector<double> p(3 * set.pool.size());
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < set.pool.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            p[3 * i + c] = set.pool.points[i][c];
            g[3 * i + c] = grads.points[i][c];
        }
    }
    std::vector<double> op(set.sketches.size());
    std::vector<double> ls(3 * set.sketches.size());
    std::vector<double> gop(op.size());
    std::vector<double> gls(ls.size());
    for (std::size_t k = 0; k < set.sketches.size(); ++k) {
        op[k] = set.sketches[k].opacity_raw;
        gop[k] = grads.opacity_raw[k];
        for (int c = 0; c < 3; ++c) {
            ls[3 * k + c] = set.sketches[k].log_scale[c];
            gls[3 * k + c] = grads.log_scale[k][c];
        }
    }
    // validate everything before touching any parameter
    for (const auto *vec : {&g, &gop, &gls}) {
        for (const double x : *vec) {
            if (!std::isfinite(x)) {
                throw NumericalAbort("non-finite gradient; aborting epoch");
            }
        }
    }
    adam_step(p, g, points_, lr_points_, t_, hyper_);
    adam_step(op, gop, opacity_, lr_opacity_, t_, hyper_);
    adam_step(ls, gls, log_scale_, lr_logscale_, t_, hyper_);
    for (std::size_t i = 0; i < set.pool.size(); ++i) {
        set.pool.points[i] = Vec3(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
    }
    for (std::size_t k = 0; k < set.sketches.size(); ++k) {
        set.sketches[k].opacity_raw = op[k];
        set.sketches[k].log_scale = Vec3(ls[3 * k], ls[3 * k + 1], ls[3 * k + 2]);
    }
}

void SketchOptimizer::remap(const CompactionMap &map, std::span<const std::size_t> reset_points) {
    require(3 * map.points.size() == points_.size() && map.sketches.size() == opacity_.size(),
            "SketchOptimizer::remap: map does not match state");
    std::vector<bool> reset(map.points.size(), false);
    for (const std::size_t p : reset_points) {
        if (p < reset.size()) {
            reset[p] = true;
        }
    }
    auto carry = [](const AdamMoments &from, const std::vector<std::size_t> &index, int width,
                    const std::vector<bool> *zero) {
        std::size_t count = 0;
        for (const std::size_t n : index) {
            count += n != CompactionMap::npos ? 1 : 0;
        }
        AdamMoments to;
        to.resize(count * static_cast<std::size_t>(width));
        for (std::size_t old = 0; old < index.size(); ++old) {
            const std::size_t n = index[old];
            if (n == CompactionMap::npos || (zero && (*zero)[old])) {
                continue;
            }
            for (int c = 0; c < width; ++c) {
                to.m[n * width + c] = from.m[old * width + c];
                to.v[n * width + c] = from.v[old * width + c];
            }
        }
        return to;
    };
    points_ = carry(points_, map.points, 3, &reset);
    opacity_ = carry(opacity_, map.sketches, 1, nullptr);
    log_scale_ = carry(log_scale_, map.sketches, 3, nullptr);
}

TrainResult train(const SketchCollection &init, std::span<const View> views, const TrainConfig &cfg,
                  const TopoConfig &topo, const EpochCallback &on_epoch) {
    validate(cfg);
    validate(topo);
    TrainResult result;
    result.sketches = init;
    if (cfg.epochs == 0) {
        return result;
    }
    require(!views.empty(), "train: at least one view is required");
    require(init.live_sketch_count() > 0, "train: no initial sketches");

    SketchCollection &set = result.sketches;
    check_structure(set);
    compact(set);
    if (cfg.init_scale) {
        for (Sketch &sk : set.sketches) {
            sk.log_scale = cfg.init_scale->array().log();
        }
    }
    SketchOptimizer optimizer(set, cfg);

    const auto start = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto seeds = epoch_view_seeds(cfg.seed, epoch, views.size());
        const SketchGrads grads = epoch_gradients(set, views, cfg, seeds);
        if (!std::isfinite(grads.loss) || grads.loss < 0.0) {
            throw NumericalAbort("epoch " + std::to_string(epoch) + ": loss is not finite");
        }
        optimizer.step(set, grads);

        if (cfg.topology && epoch >= cfg.topology_warmup && epoch < cfg.epochs &&
            (epoch - cfg.topology_warmup) % cfg.topology_interval == 0) {
            EditReport report = topology_pass(set, topo, cfg.step);
            check_structure(set);
            const CompactionMap map = compact(set);
            optimizer.remap(map, report.moved_points);
            result.topology.push_back({epoch, std::move(report)});
        }

        TrainLogRow row;
        row.epoch = epoch;
        row.loss = grads.loss;
        row.sketches = set.live_sketch_count();
        row.points = set.pool.live_count();
        row.wallclock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        result.log.push_back(row);
        if (on_epoch) {
            on_epoch(row);
        }
    }

    if (cfg.filter_at_end) {
        EditReport report = filter_invisible(set, views, topo, cfg.step);
        compact(set);
        result.topology.push_back({cfg.epochs, std::move(report)});
    }
    return result;
}

} // namespace edgesplat
