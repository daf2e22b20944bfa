// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace edgesplat {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moments for one parameter class.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;

    void resize(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
    [[nodiscard]] std::size_t size() const { return m.size(); }
};

/// One bias-corrected Adam update at step `t` (1-based):
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// Throws NumericalAbort if any gradient is not finite; nothing is
/// modified in that case.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments &moments,
               double lr, long t, const AdamHyper &hyper = {});

} // namespace edgesplat
