// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/types.hpp"

namespace edgesplat {

/// Pinhole camera. Pixel (i, j) has its center at continuous image
/// coordinate (i, j); a camera-space point p maps to
/// (fx * p.x / p.z + cx, fy * p.y / p.z + cy).
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;
    /// World-to-camera rotation and translation: p_cam = rotation * p + translation.
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    [[nodiscard]] Vec3 to_camera(const Vec3 &world) const { return rotation * world + translation; }
    [[nodiscard]] Vec3 center() const { return -rotation.transpose() * translation; }
    [[nodiscard]] Vec2 project(const Vec3 &cam) const {
        return {fx * cam.x() / cam.z() + cx, fy * cam.y() / cam.z() + cy};
    }
};

/// Throws ContractViolation unless fx, fy > 0, size positive and the
/// rotation is orthonormal within 1e-9.
void validate(const Camera &cam);

/// Camera at `eye` looking at `target`; image y grows along -up.
Camera look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double focal, int width,
               int height);

} // namespace edgesplat
