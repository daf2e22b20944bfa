// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace edgesplat {

/// Row-major single-channel raster of doubles.
class Image {
  public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    double &operator()(int x, int y) { return data_[index(x, y)]; }
    double operator()(int x, int y) const { return data_[index(x, y)]; }
    /// Replicate-padded read.
    [[nodiscard]] double clamped(int x, int y) const;

    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool inside(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::vector<double> &data() { return data_; }
    [[nodiscard]] const std::vector<double> &data() const { return data_; }

    friend bool operator==(const Image &, const Image &) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Single-channel edge intensity image with values in [0,1]; used both as
/// supervision and as render target.
using EdgeImage = Image;

/// Max absolute per-pixel difference; images must share dimensions.
double max_abs_difference(const Image &a, const Image &b);

} // namespace edgesplat
