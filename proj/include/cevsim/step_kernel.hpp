#ifndef CEVSIM_STEP_KERNEL_HPP
#define CEVSIM_STEP_KERNEL_HPP

#include <cmath>

#include "cevsim/model.hpp"

namespace cevsim::detail {

// Precomputed per-model coefficients for the explicit one-step maps. The
// alpha = 1/2 case gets a sqrt fast path; there the Milstein factor
// x^(2*alpha-1) is the constant 1, including at x = 0 (x^0 == 1).
struct StepCoeffs {
    double sigma;
    double alpha;
    double half_alpha_sigma2; // alpha*sigma^2/2
    bool alpha_is_half;
    bool linear_drift;
    double lin_a = 0.0;
    double lin_b = 0.0;
    const DriftSpec* drift = nullptr;

    explicit StepCoeffs(const CevModel& model)
        : sigma(model.sigma),
          alpha(model.alpha),
          half_alpha_sigma2(0.5 * model.alpha * model.sigma * model.sigma),
          alpha_is_half(model.alpha == 0.5),
          linear_drift(model.drift.is_linear()),
          drift(&model.drift) {
        if (linear_drift) {
            lin_a = model.drift.as_linear().level;
            lin_b = model.drift.as_linear().reversion;
        }
    }

    double drift_at(double x) const {
        return linear_drift ? lin_a - lin_b * x : (*drift)(x);
    }

    // Raw Milstein increment value before any symmetrization or projection.
    double milstein_z(double x, double dt, double dw) const {
        double x_alpha, x_two_alpha_m1;
        if (alpha_is_half) {
            x_alpha = std::sqrt(x);
            x_two_alpha_m1 = 1.0;
        } else {
            x_alpha = std::pow(x, alpha);
            x_two_alpha_m1 = x > 0.0 ? x_alpha * x_alpha / x : 0.0;
        }
        return x + drift_at(x) * dt + sigma * x_alpha * dw +
               half_alpha_sigma2 * x_two_alpha_m1 * (dw * dw - dt);
    }

    // Euler increment value (no Milstein correction).
    double euler_z(double x, double dt, double dw) const {
        const double x_alpha = alpha_is_half ? std::sqrt(x) : std::pow(x, alpha);
        return x + drift_at(x) * dt + sigma * x_alpha * dw;
    }
};

// Drift-implicit scheme on Y = sqrt(X) for the CIR case; the update is the
// positive root of (1 + b*dt/2) Y'^2 - (Y + sigma*dW/2) Y' - (a - sigma^2/4) dt/2.
struct SqrtImplicitCoeffs {
    double a;
    double b;
    double sigma;

    double next_y(double y, double dt, double dw) const {
        const double den = 1.0 + 0.5 * b * dt;
        const double num = y + 0.5 * sigma * dw;
        const double c = (a - 0.25 * sigma * sigma) * 0.5 * dt;
        return (num + std::sqrt(num * num + 4.0 * den * c)) / (2.0 * den);
    }
};

} // namespace cevsim::detail

#endif // CEVSIM_STEP_KERNEL_HPP
