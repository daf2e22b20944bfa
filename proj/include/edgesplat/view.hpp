// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/camera.hpp"
#include "edgesplat/image.hpp"

namespace edgesplat {

/// One calibrated training view and its ground-truth edge image.
struct View {
    Camera camera;
    EdgeImage gt;
};

} // namespace edgesplat
