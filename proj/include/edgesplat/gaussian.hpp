// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgesplat/camera.hpp"
#include "edgesplat/sketch.hpp"
#include "edgesplat/types.hpp"

#include <optional>

namespace edgesplat {

inline constexpr double kNearPlane = 0.01;
/// Added to both diagonal entries of every projected covariance (px^2).
inline constexpr double kLowPass = 0.3;

struct Gaussian3D {
    Vec3 mean = Vec3::Zero();
    Mat3 cov = Mat3::Identity();
    double opacity = 0.0;
    std::size_t sketch_id = 0;
    double sample_t = 0.0;
};

struct Gaussian2D {
    Vec2 mean = Vec2::Zero();
    Mat2 cov = Mat2::Identity();
    /// Inverse of cov.
    Mat2 conic = Mat2::Identity();
    double depth = 0.0;
    double opacity = 0.0;
    /// Half-extent (px) outside of which opacity * g < kAlphaFloor.
    double radius = 0.0;
};

/// Orthonormal frame [t | u | v] with u = normalize(t x a), v = t x u and
/// a = +z unless |t.z| > 0.9, then +x.
Mat3 tangent_frame(const Vec3 &tangent);

/// R diag(s^2) R^T with R = tangent_frame(tangent).
Mat3 oriented_covariance(const Vec3 &tangent, const Vec3 &scale);

Gaussian3D build_gaussian(const SamplePoint &sample, const Vec3 &scale, double opacity);

/// EWA projection; nullopt when behind the near plane or when the splat's
/// support misses the image.
std::optional<Gaussian2D> project_gaussian(const Gaussian3D &g, const Camera &cam);

/// Same as project_gaussian but skips the image-rectangle cull.
std::optional<Gaussian2D> project_gaussian_unculled(const Gaussian3D &g, const Camera &cam);

struct Gaussian3DGrad {
    Vec3 mean = Vec3::Zero();
    /// Gradient w.r.t. the full (symmetric) covariance matrix entries.
    Mat3 cov = Mat3::Zero();
    double opacity = 0.0;
};

struct Gaussian2DGrad {
    Vec2 mean = Vec2::Zero();
    /// Gradient w.r.t. the full 2x2 conic entries.
    Mat2 conic = Mat2::Zero();
    double opacity = 0.0;
};

/// Reverse-mode through project_gaussian: (d mean2d, d conic) -> (d mean, d cov).
void project_gaussian_backward(const Gaussian3D &g, const Camera &cam, const Gaussian2D &proj,
                               const Gaussian2DGrad &grad2d, Gaussian3DGrad &out);

struct CovarianceGrad {
    Vec3 tangent = Vec3::Zero();
    Vec3 scale = Vec3::Zero();
};

/// Reverse-mode through oriented_covariance.
CovarianceGrad oriented_covariance_backward(const Vec3 &tangent, const Vec3 &scale,
                                            const Mat3 &d_cov);

} // namespace edgesplat
