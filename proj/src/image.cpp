// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/image.hpp"

#include "edgesplat/errors.hpp"

#include <algorithm>
#include <cmath>

namespace edgesplat {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
    require(width >= 0 && height >= 0, "Image: negative dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

double Image::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return data_[index(x, y)];
}

double max_abs_difference(const Image &a, const Image &b) {
    require(a.width() == b.width() && a.height() == b.height(),
            "max_abs_difference: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace edgesplat
