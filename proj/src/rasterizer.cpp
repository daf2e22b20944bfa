// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/rasterizer.hpp"

#include "edgesplat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edgesplat {

namespace {

// 6x^5 - 15x^4 + 10x^3 and its derivative
double smoother(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoother_derivative(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }

double gaussian_power(const Gaussian2D &g, double dx, double dy) {
    return -0.5 * (g.conic(0, 0) * dx * dx + (g.conic(0, 1) + g.conic(1, 0)) * dx * dy +
                   g.conic(1, 1) * dy * dy);
}

} // namespace

double composite_alpha(double raw) {
    if (raw >= kAlphaMax) {
        return kAlphaMax;
    }
    if (raw < kAlphaFloor) {
        return 0.0;
    }
    if (raw < kAlphaSkip) {
        return raw * smoother((raw - kAlphaFloor) / (kAlphaSkip - kAlphaFloor));
    }
    return raw;
}

double composite_alpha_derivative(double raw) {
    if (raw >= kAlphaMax || raw < kAlphaFloor) {
        return 0.0;
    }
    if (raw < kAlphaSkip) {
        const double width = kAlphaSkip - kAlphaFloor;
        const double x = (raw - kAlphaFloor) / width;
        return smoother(x) + raw * smoother_derivative(x) / width;
    }
    return 1.0;
}

SplatRaster::SplatRaster(std::span<const Gaussian3D> gaussians, const Camera &cam)
    : gaussians_(gaussians.begin(), gaussians.end()), camera_(cam) {
    validate(cam);
    tiles_x_ = (cam.width + kTileSize - 1) / kTileSize;
    tiles_y_ = (cam.height + kTileSize - 1) / kTileSize;
    tiles_.assign(static_cast<std::size_t>(tiles_x_) * static_cast<std::size_t>(tiles_y_), {});

    for (std::size_t i = 0; i < gaussians_.size(); ++i) {
        const Gaussian3D &g = gaussians_[i];
        require(g.mean.allFinite() && g.cov.allFinite() && std::isfinite(g.opacity),
                "render: non-finite gaussian");
        auto proj = project_gaussian(g, cam);
        if (!proj) {
            continue;
        }
        splats_.push_back({*proj, static_cast<std::uint32_t>(i)});
    }

    for (std::uint32_t s = 0; s < splats_.size(); ++s) {
        const Gaussian2D &p = splats_[s].proj;
        const int x0 = std::max(0, static_cast<int>(std::ceil(p.mean.x() - p.radius)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(p.mean.x() + p.radius)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(p.mean.y() - p.radius)));
        const int y1 =
            std::min(cam.height - 1, static_cast<int>(std::floor(p.mean.y() + p.radius)));
        if (x0 > x1 || y0 > y1) {
            continue;
        }
        for (int ty = y0 / kTileSize; ty <= y1 / kTileSize; ++ty) {
            for (int tx = x0 / kTileSize; tx <= x1 / kTileSize; ++tx) {
                tiles_[static_cast<std::size_t>(ty) * tiles_x_ + tx].push_back(s);
            }
        }
    }
    for (auto &list : tiles_) {
        std::sort(list.begin(), list.end(), [this](std::uint32_t a, std::uint32_t b) {
            const double da = splats_[a].proj.depth;
            const double db = splats_[b].proj.depth;
            return da < db || (da == db && splats_[a].source < splats_[b].source);
        });
    }
}

const std::vector<std::uint32_t> &SplatRaster::tile_of(int x, int y) const {
    return tiles_[static_cast<std::size_t>(y / kTileSize) * tiles_x_ + x / kTileSize];
}

double SplatRaster::shade_pixel(int x, int y) const {
    double intensity = 0.0;
    double transmittance = 1.0;
    for (const std::uint32_t s : tile_of(x, y)) {
        const Gaussian2D &p = splats_[s].proj;
        const double dx = x - p.mean.x();
        const double dy = y - p.mean.y();
        if (std::abs(dx) > p.radius || std::abs(dy) > p.radius) {
            continue;
        }
        const double alpha = composite_alpha(p.opacity * std::exp(gaussian_power(p, dx, dy)));
        if (alpha <= 0.0) {
            continue;
        }
        intensity += alpha * transmittance;
        transmittance *= 1.0 - alpha;
    }
    return std::min(intensity, 1.0);
}

EdgeImage SplatRaster::render() const {
    EdgeImage out(camera_.width, camera_.height);
    for (int y = 0; y < camera_.height; ++y) {
        for (int x = 0; x < camera_.width; ++x) {
            out(x, y) = shade_pixel(x, y);
        }
    }
    return out;
}

std::vector<double> SplatRaster::shade(std::span<const Pixel> pixels) const {
    std::vector<double> out;
    out.reserve(pixels.size());
    for (const Pixel &px : pixels) {
        require(px.x >= 0 && px.y >= 0 && px.x < camera_.width && px.y < camera_.height,
                "shade: pixel outside image");
        out.push_back(shade_pixel(px.x, px.y));
    }
    return out;
}

std::vector<Gaussian3DGrad> SplatRaster::backward(std::span<const PixelGrad> d_image) const {
    std::vector<Gaussian2DGrad> grad2d(splats_.size());

    struct Hit {
        std::uint32_t splat;
        double dx, dy, g, raw, alpha, transmittance;
    };
    std::vector<Hit> hits;
    for (const PixelGrad &pg : d_image) {
        const int x = pg.pixel.x;
        const int y = pg.pixel.y;
        require(x >= 0 && y >= 0 && x < camera_.width && y < camera_.height,
                "render_backward: pixel outside image");
        if (pg.value == 0.0) {
            continue;
        }
        hits.clear();
        double transmittance = 1.0;
        for (const std::uint32_t s : tile_of(x, y)) {
            const Gaussian2D &p = splats_[s].proj;
            const double dx = x - p.mean.x();
            const double dy = y - p.mean.y();
            if (std::abs(dx) > p.radius || std::abs(dy) > p.radius) {
                continue;
            }
            const double g = std::exp(gaussian_power(p, dx, dy));
            const double raw = p.opacity * g;
            const double alpha = composite_alpha(raw);
            if (alpha <= 0.0) {
                continue;
            }
            hits.push_back({s, dx, dy, g, raw, alpha, transmittance});
            transmittance *= 1.0 - alpha;
        }
        // dI/dalpha_i = T_i (1 - intensity composited behind i)
        double behind = 0.0;
        for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
            const double d_alpha = pg.value * it->transmittance * (1.0 - behind);
            behind = it->alpha + (1.0 - it->alpha) * behind;
            const double d_raw = d_alpha * composite_alpha_derivative(it->raw);
            if (d_raw == 0.0) {
                continue;
            }
            const Gaussian2D &p = splats_[it->splat].proj;
            Gaussian2DGrad &gg = grad2d[it->splat];
            gg.opacity += d_raw * it->g;
            const double d_power = d_raw * it->raw;
            // power = -1/2 d^T Q d with d = pixel - mean
            const Mat2 q_sym = 0.5 * (p.conic + p.conic.transpose());
            const Vec2 d(it->dx, it->dy);
            gg.mean += d_power * (q_sym * d);
            gg.conic += d_power * (-0.5 * d * d.transpose());
        }
    }

    std::vector<Gaussian3DGrad> out(gaussians_.size());
    for (std::size_t s = 0; s < splats_.size(); ++s) {
        const Gaussian2DGrad &gg = grad2d[s];
        if (gg.opacity == 0.0 && gg.mean.isZero(0.0) && gg.conic.isZero(0.0)) {
            continue;
        }
        const std::uint32_t src = splats_[s].source;
        project_gaussian_backward(gaussians_[src], camera_, splats_[s].proj, gg, out[src]);
    }
    return out;
}

EdgeImage render(std::span<const Gaussian3D> gaussians, const Camera &cam) {
    return SplatRaster(gaussians, cam).render();
}

std::vector<Gaussian3DGrad> render_backward(std::span<const Gaussian3D> gaussians,
                                            const Camera &cam,
                                            std::span<const PixelGrad> d_image) {
    return SplatRaster(gaussians, cam).backward(d_image);
}

EdgeImage reference_render(std::span<const Gaussian3D> gaussians, const Camera &cam) {
    validate(cam);
    struct Entry {
        Gaussian2D proj;
        std::size_t source;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        if (auto p = project_gaussian_unculled(gaussians[i], cam)) {
            entries.push_back({*p, i});
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry &a, const Entry &b) { return a.proj.depth < b.proj.depth; });

    EdgeImage out(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            double intensity = 0.0;
            double transmittance = 1.0;
            for (const Entry &e : entries) {
                const double dx = x - e.proj.mean.x();
                const double dy = y - e.proj.mean.y();
                const double power = gaussian_power(e.proj, dx, dy);
                // exp(-80) is below double resolution of any sum here
                if (power < -80.0) {
                    continue;
                }
                const double alpha = std::min(kAlphaMax, e.proj.opacity * std::exp(power));
                intensity += alpha * transmittance;
                transmittance *= 1.0 - alpha;
            }
            out(x, y) = std::min(intensity, 1.0);
        }
    }
    return out;
}

} // namespace edgesplat
