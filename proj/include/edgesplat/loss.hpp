// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/image.hpp"
#include "edgesplat/rasterizer.hpp"

#include <random>
#include <span>
#include <vector>

namespace edgesplat {

using Rng = std::mt19937_64;

/// Ground-truth intensity above which a pixel counts as foreground.
inline constexpr double kForegroundThreshold = 0.5;
/// Per-class cap on drawn loss pixels.
inline constexpr std::size_t kLossPixelsPerClass = 4096;

struct LossPixels {
    /// Foreground draws first, then background draws.
    std::vector<Pixel> pixels;
    std::size_t per_class = 0;
    /// No foreground in the ground truth; pixels were drawn uniformly.
    bool fallback = false;
};

/// Draws n = min(|fg|, |bg|, cap) pixels uniformly without replacement from
/// each class. With no foreground, draws 2n' uniform pixels over the whole
/// image where n' = min(|bg|/2, cap).
LossPixels draw_loss_pixels(const EdgeImage &gt, Rng &rng,
                            std::size_t cap = kLossPixelsPerClass);

struct LossResult {
    double loss = 0.0;
    std::vector<PixelGrad> grads;
    LossPixels drawn;
};

/// Mean absolute error over the drawn pixels and its gradient w.r.t. the
/// rendered intensities (zero at exact ties). `rendered` holds values at
/// drawn.pixels in order.
LossResult l1_at_pixels(std::span<const double> rendered, const EdgeImage &gt,
                        LossPixels drawn);

/// Balanced sampled L1 between a full rendered image and the ground truth.
LossResult sampled_l1_loss(const EdgeImage &rendered, const EdgeImage &gt, Rng &rng,
                           std::size_t cap = kLossPixelsPerClass);

} // namespace edgesplat
