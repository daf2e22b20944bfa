// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/camera.hpp"
#include "edgesplat/gaussian.hpp"
#include "edgesplat/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace edgesplat {

inline constexpr double kAlphaMax = 0.99;
/// Splats whose alpha at a pixel falls below this are not composited at
/// full strength...
inline constexpr double kAlphaSkip = 0.25 / 255.0;
/// ...and below this they are dropped entirely.
inline constexpr double kAlphaFloor = 0.5 * kAlphaSkip;
inline constexpr int kTileSize = 16;

/// Alpha actually composited for a raw response o * g: zero below
/// kAlphaFloor, clamped at kAlphaMax, and blended smoothly to zero over
/// [kAlphaFloor, kAlphaSkip] so the image stays differentiable in the
/// splat parameters.
double composite_alpha(double raw);
/// d composite_alpha / d raw.
double composite_alpha_derivative(double raw);

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel &, const Pixel &) = default;
};

struct PixelGrad {
    Pixel pixel;
    double value = 0.0;
};

/// Projected, tile-binned splats for one camera. Forward and backward
/// passes both run against the same instance so their inputs cannot drift.
class SplatRaster {
  public:
    SplatRaster(std::span<const Gaussian3D> gaussians, const Camera &cam);

    [[nodiscard]] const Camera &camera() const { return camera_; }
    [[nodiscard]] std::size_t gaussian_count() const { return gaussians_.size(); }
    /// Number of splats that survived projection/culling.
    [[nodiscard]] std::size_t visible_count() const { return splats_.size(); }

    /// Full image.
    [[nodiscard]] EdgeImage render() const;
    /// Intensities at selected pixels only; identical to render() there.
    [[nodiscard]] std::vector<double> shade(std::span<const Pixel> pixels) const;

    /// Reverse-mode through compositing and projection. Returns one gradient
    /// per input Gaussian (zero for culled ones).
    [[nodiscard]] std::vector<Gaussian3DGrad> backward(std::span<const PixelGrad> d_image) const;

  private:
    struct Splat {
        Gaussian2D proj;
        std::uint32_t source = 0;
    };

    [[nodiscard]] double shade_pixel(int x, int y) const;
    [[nodiscard]] const std::vector<std::uint32_t> &tile_of(int x, int y) const;

    std::vector<Gaussian3D> gaussians_;
    Camera camera_;
    std::vector<Splat> splats_;
    int tiles_x_ = 0;
    int tiles_y_ = 0;
    /// Per tile, indices into splats_ sorted front to back.
    std::vector<std::vector<std::uint32_t>> tiles_;
};

/// Tiled forward render of the given Gaussians.
EdgeImage render(std::span<const Gaussian3D> gaussians, const Camera &cam);

/// Gradients of a scalar loss w.r.t. every Gaussian given dL/dI at pixels.
std::vector<Gaussian3DGrad> render_backward(std::span<const Gaussian3D> gaussians,
                                            const Camera &cam,
                                            std::span<const PixelGrad> d_image);

/// Straightforward per-pixel renderer with exact depth sorting, no tiling
/// and no alpha skip. Testing oracle.
EdgeImage reference_render(std::span<const Gaussian3D> gaussians, const Camera &cam);

} // namespace edgesplat
