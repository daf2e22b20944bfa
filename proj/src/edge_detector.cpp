// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/edge_detector.hpp"

#include "edgesplat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace edgesplat {

void validate(const DetectorConfig &cfg) {
    require(cfg.t_d > 0.0 && cfg.t_n > 0.0, "detector: thresholds must be positive");
    require(cfg.blur_sigma > 0.0, "detector: blur_sigma must be positive");
    require(cfg.blur_radius >= 0, "detector: blur_radius must be non-negative");
}

namespace {

bool same_size(const Image &a, const Image &b) {
    return a.width() == b.width() && a.height() == b.height();
}

} // namespace

void validate(const GeoMaps &maps) {
    const Image &a = maps.alpha;
    require(same_size(a, maps.depth) && same_size(a, maps.normal[0]) &&
                same_size(a, maps.normal[1]) && same_size(a, maps.normal[2]),
            "detect_edges: map dimensions differ");
    for (std::size_t i = 0; i < a.size(); ++i) {
        require(maps.depth.data()[i] >= 0.0, "detect_edges: negative depth");
        const double a_i = a.data()[i];
        require(a_i >= 0.0 && a_i <= 1.0, "detect_edges: alpha outside [0,1]");
        const double n2 = maps.normal[0].data()[i] * maps.normal[0].data()[i] +
                          maps.normal[1].data()[i] * maps.normal[1].data()[i] +
                          maps.normal[2].data()[i] * maps.normal[2].data()[i];
        // all-zero normals mark pixels without a defined surface
        require(n2 == 0.0 || (n2 >= 0.99 * 0.99 && n2 <= 1.01 * 1.01),
                "detect_edges: normal is not unit length");
    }
}

Image sobel_magnitude(const Image &img) {
    require(img.width() >= 3 && img.height() >= 3, "sobel_magnitude: image smaller than 3x3");
    Image out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double tl = img.clamped(x - 1, y - 1);
            const double t = img.clamped(x, y - 1);
            const double tr = img.clamped(x + 1, y - 1);
            const double l = img.clamped(x - 1, y);
            const double r = img.clamped(x + 1, y);
            const double bl = img.clamped(x - 1, y + 1);
            const double b = img.clamped(x, y + 1);
            const double br = img.clamped(x + 1, y + 1);
            const double gx = (tr + 2.0 * r + br) - (tl + 2.0 * l + bl);
            const double gy = (bl + 2.0 * b + br) - (tl + 2.0 * t + tr);
            out(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

Image sobel_magnitude(std::span<const Image> channels) {
    require(!channels.empty(), "sobel_magnitude: no channels");
    Image out = sobel_magnitude(channels.front());
    for (std::size_t c = 1; c < channels.size(); ++c) {
        require(same_size(out, channels[c]), "sobel_magnitude: channel sizes differ");
        const Image m = sobel_magnitude(channels[c]);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.data()[i] = std::max(out.data()[i], m.data()[i]);
        }
    }
    return out;
}

Image gaussian_blur(const Image &img, double sigma, int radius) {
    require(sigma > 0.0 && radius >= 0, "gaussian_blur: invalid kernel");
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += kernel[k + radius];
    }
    for (double &k : kernel) {
        k /= sum;
    }
    Image tmp(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * img.clamped(x + k, y);
            }
            tmp(x, y) = acc;
        }
    }
    Image out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * tmp.clamped(x, y + k);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

Image raw_edges(const GeoMaps &maps, const DetectorConfig &cfg) {
    validate(cfg);
    validate(maps);
    const Image boundary = sobel_magnitude(maps.alpha);
    const Image depth = sobel_magnitude(maps.depth);
    const Image normal = sobel_magnitude(std::span<const Image>(maps.normal));
    Image out(maps.alpha.width(), maps.alpha.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool edge = boundary.data()[i] > 0.5 || depth.data()[i] > cfg.t_d ||
                          normal.data()[i] > cfg.t_n;
        out.data()[i] = edge ? 1.0 : 0.0;
    }
    return out;
}

Image detect_edges(const GeoMaps &maps, const DetectorConfig &cfg) {
    Image out = gaussian_blur(raw_edges(maps, cfg), cfg.blur_sigma, cfg.blur_radius);
    for (double &v : out.data()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

} // namespace edgesplat
