// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/camera.hpp"

#include "edgesplat/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace edgesplat {

void validate(const Camera &cam) {
    require(cam.fx > 0.0 && cam.fy > 0.0, "camera: focal lengths must be positive");
    require(cam.width > 0 && cam.height > 0, "camera: image size must be positive");
    const double ortho = (cam.rotation * cam.rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    require(ortho <= 1e-9, "camera: rotation is not orthonormal");
    require(cam.rotation.determinant() > 0.0, "camera: rotation has negative determinant");
    require(cam.translation.allFinite(), "camera: translation not finite");
}

Camera look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double focal, int width,
               int height) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) {
        right = forward.cross(std::abs(forward.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
    }
    right.normalize();
    const Vec3 down = forward.cross(right);

    Camera cam;
    cam.fx = focal;
    cam.fy = focal;
    cam.width = width;
    cam.height = height;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * eye;
    return cam;
}

} // namespace edgesplat
