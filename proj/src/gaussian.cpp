// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/gaussian.hpp"

#include "edgesplat/errors.hpp"
#include "edgesplat/rasterizer.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace edgesplat {

namespace {

Vec3 frame_axis(const Vec3 &tangent) {
    return std::abs(tangent.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
}

} // namespace

Mat3 tangent_frame(const Vec3 &tangent) {
    const Vec3 u = tangent.cross(frame_axis(tangent)).normalized();
    const Vec3 v = tangent.cross(u);
    Mat3 r;
    r.col(0) = tangent;
    r.col(1) = u;
    r.col(2) = v;
    return r;
}

Mat3 oriented_covariance(const Vec3 &tangent, const Vec3 &scale) {
    const Mat3 r = tangent_frame(tangent);
    return r * scale.array().square().matrix().asDiagonal() * r.transpose();
}

Gaussian3D build_gaussian(const SamplePoint &sample, const Vec3 &scale, double opacity) {
    Gaussian3D g;
    g.mean = sample.position;
    g.cov = oriented_covariance(sample.tangent, scale);
    g.opacity = opacity;
    g.sketch_id = sample.sketch_id;
    g.sample_t = sample.t;
    return g;
}

namespace {

struct Projection {
    Vec3 cam_point;
    Eigen::Matrix<double, 2, 3> jacobian;
};

Projection linearize(const Gaussian3D &g, const Camera &cam) {
    Projection p;
    p.cam_point = cam.to_camera(g.mean);
    const double x = p.cam_point.x();
    const double y = p.cam_point.y();
    const double z = p.cam_point.z();
    p.jacobian << cam.fx / z, 0.0, -cam.fx * x / (z * z), 0.0, cam.fy / z, -cam.fy * y / (z * z);
    return p;
}

} // namespace

std::optional<Gaussian2D> project_gaussian_unculled(const Gaussian3D &g, const Camera &cam) {
    const Projection p = linearize(g, cam);
    if (!(p.cam_point.z() > kNearPlane)) {
        return std::nullopt;
    }
    const Mat3 world_to_cam_cov = cam.rotation * g.cov * cam.rotation.transpose();
    Gaussian2D out;
    out.mean = cam.project(p.cam_point);
    out.cov = p.jacobian * world_to_cam_cov * p.jacobian.transpose();
    out.cov(0, 1) = out.cov(1, 0) = 0.5 * (out.cov(0, 1) + out.cov(1, 0));
    out.cov(0, 0) += kLowPass;
    out.cov(1, 1) += kLowPass;
    const double det = out.cov.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw NumericalAbort("project_gaussian: projected covariance is not invertible");
    }
    out.conic << out.cov(1, 1) / det, -out.cov(0, 1) / det, -out.cov(1, 0) / det,
        out.cov(0, 0) / det;
    out.depth = p.cam_point.z();
    out.opacity = g.opacity;

    const double mid = 0.5 * (out.cov(0, 0) + out.cov(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double level = g.opacity / kAlphaFloor;
    out.radius = level > 1.0 ? std::sqrt(2.0 * std::log(level) * lambda_max) : 0.0;
    return out;
}

std::optional<Gaussian2D> project_gaussian(const Gaussian3D &g, const Camera &cam) {
    auto out = project_gaussian_unculled(g, cam);
    if (!out || out->radius <= 0.0) {
        return std::nullopt;
    }
    const double r = out->radius;
    if (out->mean.x() + r < 0.0 || out->mean.y() + r < 0.0 ||
        out->mean.x() - r > cam.width - 1 || out->mean.y() - r > cam.height - 1) {
        return std::nullopt;
    }
    return out;
}

void project_gaussian_backward(const Gaussian3D &g, const Camera &cam, const Gaussian2D &proj,
                               const Gaussian2DGrad &grad2d, Gaussian3DGrad &out) {
    const Projection p = linearize(g, cam);
    const double x = p.cam_point.x();
    const double y = p.cam_point.y();
    const double z = p.cam_point.z();
    const Mat3 &w = cam.rotation;
    const Mat3 m = w * g.cov * w.transpose();
    const auto &j = p.jacobian;

    // conic = cov2d^-1  =>  dL/dcov2d = -conic^T G conic^T
    const Mat2 d_cov2d = -proj.conic.transpose() * grad2d.conic * proj.conic.transpose();
    const Mat2 d_sym = 0.5 * (d_cov2d + d_cov2d.transpose());

    // cov2d = J M J^T + lowpass
    const Mat3 d_m = j.transpose() * d_sym * j;
    const Eigen::Matrix<double, 2, 3> d_j = 2.0 * d_sym * j * m;

    Vec3 d_cam = Vec3::Zero();
    // mean2d = (fx x/z + cx, fy y/z + cy)
    d_cam.x() += grad2d.mean.x() * cam.fx / z;
    d_cam.y() += grad2d.mean.y() * cam.fy / z;
    d_cam.z() += -grad2d.mean.x() * cam.fx * x / (z * z) - grad2d.mean.y() * cam.fy * y / (z * z);
    // Jacobian entries as functions of the camera-space point
    const double z2 = z * z;
    const double z3 = z2 * z;
    d_cam.x() += d_j(0, 2) * (-cam.fx / z2);
    d_cam.y() += d_j(1, 2) * (-cam.fy / z2);
    d_cam.z() += d_j(0, 0) * (-cam.fx / z2) + d_j(0, 2) * (2.0 * cam.fx * x / z3) +
                 d_j(1, 1) * (-cam.fy / z2) + d_j(1, 2) * (2.0 * cam.fy * y / z3);

    out.mean += w.transpose() * d_cam;
    out.cov += w.transpose() * d_m * w;
    out.opacity += grad2d.opacity;
}

CovarianceGrad oriented_covariance_backward(const Vec3 &tangent, const Vec3 &scale,
                                            const Mat3 &d_cov) {
    const Vec3 a = frame_axis(tangent);
    const Vec3 n = tangent.cross(a);
    const double n_norm = n.norm();
    const Vec3 u = n / n_norm;
    const Vec3 v = tangent.cross(u);
    const Mat3 g = 0.5 * (d_cov + d_cov.transpose());

    CovarianceGrad out;
    const Vec3 axes[3] = {tangent, u, v};
    Vec3 d_axis[3];
    for (int k = 0; k < 3; ++k) {
        out.scale[k] = 2.0 * scale[k] * axes[k].dot(g * axes[k]);
        d_axis[k] = 2.0 * scale[k] * scale[k] * (g * axes[k]);
    }
    // v = t x u
    Vec3 d_t = d_axis[0] + u.cross(d_axis[2]);
    const Vec3 d_u = d_axis[1] + d_axis[2].cross(tangent);
    // u = n / |n|, n = t x a
    const Vec3 d_n = (d_u - u * u.dot(d_u)) / n_norm;
    d_t += a.cross(d_n);
    out.tangent = d_t;
    return out;
}

} // namespace edgesplat
