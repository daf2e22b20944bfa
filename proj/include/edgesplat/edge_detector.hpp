// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/image.hpp"

#include <array>
#include <span>

namespace edgesplat {

/// Per-view geometric cues: foreground mask, depth (m) and unit normals
/// stored as three channel images.
struct GeoMaps {
    Image alpha;
    Image depth;
    std::array<Image, 3> normal;
};

struct DetectorConfig {
    /// Threshold on the Sobel magnitude of depth.
    double t_d = 0.01;
    /// Threshold on the max-channel Sobel magnitude of the normal map.
    double t_n = 0.4;
    double blur_sigma = 1.0;
    int blur_radius = 3;
};

void validate(const DetectorConfig &cfg);
/// Dimension and value checks; throws ContractViolation.
void validate(const GeoMaps &maps);

/// sqrt(Gx^2 + Gy^2) with 3x3 Sobel kernels and replicate padding.
Image sobel_magnitude(const Image &img);
/// Max over channels of the per-channel Sobel magnitude.
Image sobel_magnitude(std::span<const Image> channels);

/// Separable normalized Gaussian blur with replicate padding.
Image gaussian_blur(const Image &img, double sigma, int radius);

/// Binary edge set before smoothing: mask boundary | depth edges | normal edges.
Image raw_edges(const GeoMaps &maps, const DetectorConfig &cfg);

/// Blurred, clamped edge image from geometric cues.
Image detect_edges(const GeoMaps &maps, const DetectorConfig &cfg = {});

} // namespace edgesplat
