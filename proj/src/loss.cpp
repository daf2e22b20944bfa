// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/loss.hpp"

#include "edgesplat/errors.hpp"

#include <cmath>

namespace edgesplat {

namespace {

// Partial Fisher-Yates: the first k entries become a uniform draw without
// replacement.
void draw_prefix(std::vector<std::size_t> &pool, std::size_t k, Rng &rng) {
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
}

Pixel to_pixel(const EdgeImage &img, std::size_t idx) {
    const auto w = static_cast<std::size_t>(img.width());
    return {static_cast<int>(idx % w), static_cast<int>(idx / w)};
}

} // namespace

LossPixels draw_loss_pixels(const EdgeImage &gt, Rng &rng, std::size_t cap) {
    require(!gt.empty(), "sampled_l1_loss: empty ground truth");
    std::vector<std::size_t> fg;
    std::vector<std::size_t> bg;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double v = gt.data()[i];
        require(v >= 0.0 && v <= 1.0, "sampled_l1_loss: ground truth outside [0,1]");
        (v > kForegroundThreshold ? fg : bg).push_back(i);
    }

    LossPixels out;
    if (fg.empty()) {
        out.fallback = true;
        const std::size_t n = std::min(bg.size() / 2, cap);
        draw_prefix(bg, 2 * n, rng);
        out.per_class = n;
        for (const std::size_t idx : bg) {
            out.pixels.push_back(to_pixel(gt, idx));
        }
        return out;
    }

    const std::size_t n = std::min({fg.size(), bg.size(), cap});
    draw_prefix(fg, n, rng);
    draw_prefix(bg, n, rng);
    out.per_class = n;
    out.pixels.reserve(2 * n);
    for (const std::size_t idx : fg) {
        out.pixels.push_back(to_pixel(gt, idx));
    }
    for (const std::size_t idx : bg) {
        out.pixels.push_back(to_pixel(gt, idx));
    }
    return out;
}

LossResult l1_at_pixels(std::span<const double> rendered, const EdgeImage &gt,
                        LossPixels drawn) {
    require(rendered.size() == drawn.pixels.size(), "l1_at_pixels: size mismatch");
    LossResult out;
    out.drawn = std::move(drawn);
    const std::size_t count = out.drawn.pixels.size();
    if (count == 0) {
        return out;
    }
    const double w = 1.0 / static_cast<double>(count);
    out.grads.reserve(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const Pixel px = out.drawn.pixels[i];
        const double diff = rendered[i] - gt(px.x, px.y);
        sum += std::abs(diff);
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        out.grads.push_back({px, sign * w});
    }
    out.loss = sum * w;
    return out;
}

LossResult sampled_l1_loss(const EdgeImage &rendered, const EdgeImage &gt, Rng &rng,
                           std::size_t cap) {
    require(rendered.width() == gt.width() && rendered.height() == gt.height(),
            "sampled_l1_loss: dimension mismatch");
    LossPixels drawn = draw_loss_pixels(gt, rng, cap);
    std::vector<double> values;
    values.reserve(drawn.pixels.size());
    for (const Pixel &px : drawn.pixels) {
        values.push_back(rendered(px.x, px.y));
    }
    return l1_at_pixels(values, gt, std::move(drawn));
}

} // namespace edgesplat
