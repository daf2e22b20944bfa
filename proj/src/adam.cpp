// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#include "edgesplat/adam.hpp"

#include "edgesplat/errors.hpp"

#include <cmath>
#include <string>

namespace edgesplat {

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments &moments,
               double lr, long t, const AdamHyper &hyper) {
    require(params.size() == grads.size() && params.size() == moments.size(),
            "adam_step: shape mismatch");
    require(t >= 1, "adam_step: step counter starts at 1");
    require(lr > 0.0, "adam_step: learning rate must be positive");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericalAbort("adam_step: non-finite gradient at parameter " + std::to_string(i));
        }
    }
    const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        double &m = moments.m[i];
        double &v = moments.v[i];
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g;
        params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + hyper.epsilon);
    }
}

} // namespace edgesplat
