#include "cevsim/mlmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "cevsim/parallel.hpp"
#include "cevsim/rng.hpp"
#include "cevsim/step_kernel.hpp"

namespace cevsim {

CevModel ZcbModel::to_cev() const {
    return CevModel(r0, sigma, 0.5, DriftSpec::linear(a, b), maturity);
}

double zcb_closed_form(const ZcbModel& m) {
    if (!(m.a > 0.0 && m.b > 0.0 && m.sigma >= 0.0 && m.r0 > 0.0 && m.maturity > 0.0)) {
        throw std::invalid_argument("zcb_closed_form: model parameters must be positive");
    }
    const double sigma2 = m.sigma * m.sigma;
    const double lambda = std::sqrt(m.b * m.b + 2.0 * sigma2);
    const double eps = 2.0 * sigma2 / (lambda + m.b); // lambda - b without cancellation
    const double w = -std::expm1(-lambda * m.maturity);
    const double b_t = 2.0 * w / (2.0 * lambda - eps * w);
    // log A(T) = (2a/sigma^2) [ -eps T/2 - log1p(-eps w / (2 lambda)) ]
    const double x = -eps * w / (2.0 * lambda);
    const double ratio = eps > 0.0 ? std::log1p(x) / eps : -w / (2.0 * lambda);
    const double log_a =
        -2.0 * m.a * m.maturity / (lambda + m.b) - 4.0 * m.a / (lambda + m.b) * ratio;
    return std::exp(log_a - b_t * m.r0);
}

double discounted_payoff(const SchemePath& path) {
    return std::exp(-path.integral_trapezoid);
}

int level_count(double epsilon, int min_levels) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("level_count: epsilon must lie in (0,1)");
    }
    const int l = static_cast<int>(std::floor(std::log2(1.0 / epsilon) + 1e-9));
    return std::max(l, min_levels);
}

std::vector<std::uint64_t> giles_allocation(double epsilon,
                                            const std::vector<double>& variances,
                                            const std::vector<double>& dts,
                                            std::uint64_t min_trajectories) {
    if (variances.size() != dts.size() || variances.empty()) {
        throw std::invalid_argument("giles_allocation: variances/dts size mismatch");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("giles_allocation: epsilon must be positive");
    }
    double sum = 0.0;
    for (std::size_t l = 0; l < dts.size(); ++l) {
        if (!(dts[l] > 0.0) || variances[l] < 0.0) {
            throw std::invalid_argument("giles_allocation: bad variance or dt entry");
        }
        sum += std::sqrt(variances[l] / dts[l]);
    }
    std::vector<std::uint64_t> counts(dts.size());
    for (std::size_t l = 0; l < dts.size(); ++l) {
        const double n = 2.0 / (epsilon * epsilon) * std::sqrt(variances[l] * dts[l]) * sum;
        const double capped = std::min(n, 9.0e18);
        counts[l] = std::max<std::uint64_t>(
            static_cast<std::uint64_t>(std::ceil(capped)), min_trajectories);
    }
    return counts;
}

namespace {

template <int Kind> // 0: SMS, 1: PMS
double fold_integral_explicit(const detail::StepCoeffs& coeffs, double x0, double dt,
                              const double* dw, std::uint64_t n) {
    double x = x0;
    double integral = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double z = coeffs.milstein_z(x, dt, dw[k]);
        const double next = Kind == 1 ? (z > 0.0 ? z : 0.0) : std::abs(z);
        integral += 0.5 * dt * (x + next);
        x = next;
    }
    return integral;
}

double fold_integral_ais(const detail::SqrtImplicitCoeffs& coeffs, double x0, double dt,
                         const double* dw, std::uint64_t n) {
    double y = std::sqrt(x0);
    double x = x0;
    double integral = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        y = coeffs.next_y(y, dt, dw[k]);
        const double next = y * y;
        integral += 0.5 * dt * (x + next);
        x = next;
    }
    return integral;
}

struct PayoffFold {
    SchemeId scheme;
    detail::StepCoeffs coeffs;
    detail::SqrtImplicitCoeffs ais{0.0, 0.0, 0.0};
    double x0;

    PayoffFold(SchemeId s, const CevModel& model) : scheme(s), coeffs(model), x0(model.x0) {
        if (scheme == SchemeId::AIS) {
            const auto& lin = model.drift.as_linear();
            if (!(4.0 * lin.level > model.sigma * model.sigma)) {
                throw UnsupportedParameters("mlmc ais: requires 4a > sigma^2");
            }
            ais = detail::SqrtImplicitCoeffs{lin.level, lin.reversion, model.sigma};
        }
    }

    double operator()(double dt, const double* dw, std::uint64_t n) const {
        double integral;
        switch (scheme) {
            case SchemeId::SMS: integral = fold_integral_explicit<0>(coeffs, x0, dt, dw, n); break;
            case SchemeId::PMS: integral = fold_integral_explicit<1>(coeffs, x0, dt, dw, n); break;
            default: integral = fold_integral_ais(ais, x0, dt, dw, n); break;
        }
        return std::exp(-integral);
    }
};

struct LevelAcc {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t count = 0;
    std::uint64_t steps = 0;
};

// One coupled level sample: the fine payoff minus the payoff of the same
// Brownian path on the pairwise-coarsened grid (level 0: fine payoff only).
struct LevelSampler {
    const PayoffFold& fold;
    const rng::CounterRng& gen;
    double horizon;
    int level;

    double operator()(std::uint64_t stream, std::vector<double>& buf,
                      std::uint64_t& steps) const {
        const std::uint64_t n_fine = std::uint64_t{1} << (level + 1);
        const double dt_fine = horizon / static_cast<double>(n_fine);
        const double sqrt_dt = std::sqrt(dt_fine);
        buf.resize(n_fine);
        for (std::uint64_t k = 0; k < n_fine; ++k) {
            buf[k] = sqrt_dt * gen.gaussian(stream, k);
        }
        const double fine = fold(dt_fine, buf.data(), n_fine);
        steps += n_fine;
        if (level == 0) return fine;

        const std::uint64_t n_coarse = n_fine / 2;
        for (std::uint64_t k = 0; k < n_coarse; ++k) {
            buf[k] = buf[2 * k] + buf[2 * k + 1];
        }
        const double coarse = fold(2.0 * dt_fine, buf.data(), n_coarse);
        steps += n_coarse;
        return fine - coarse;
    }
};

LevelAcc run_level_phase(const LevelSampler& sampler, std::uint64_t n_samples,
                         std::uint64_t stream_tag, unsigned threads) {
    const std::uint64_t chunk =
        std::max<std::uint64_t>(1, (std::uint64_t{1} << 18) >> (sampler.level + 1));
    auto worker = [&](LevelAcc& acc, std::uint64_t begin, std::uint64_t end) {
        std::vector<double> buf;
        for (std::uint64_t i = begin; i < end; ++i) {
            const double s = sampler((stream_tag << 40) + i, buf, acc.steps);
            acc.sum += s;
            acc.sum_sq += s * s;
            ++acc.count;
        }
    };
    auto combine = [](LevelAcc& total, const LevelAcc& part) {
        total.sum += part.sum;
        total.sum_sq += part.sum_sq;
        total.count += part.count;
        total.steps += part.steps;
    };
    return chunked_reduce<LevelAcc>(n_samples, chunk, threads, worker, combine);
}

} // namespace

MlmcResult mlmc_estimate(const ZcbModel& model, const MlmcConfig& cfg) {
    if (cfg.scheme != SchemeId::SMS && cfg.scheme != SchemeId::PMS &&
        cfg.scheme != SchemeId::AIS) {
        throw std::invalid_argument("mlmc_estimate: scheme must be sms, pms, or ais");
    }
    if (cfg.min_trajectories < 2 || cfg.warmup_samples < 2) {
        throw std::invalid_argument(
            "mlmc_estimate: need at least 2 warm-up samples per level");
    }
    const auto start = std::chrono::steady_clock::now();

    const CevModel cev = model.to_cev();
    const PayoffFold fold(cfg.scheme, cev);
    const rng::CounterRng gen(cfg.seed);

    const int levels = level_count(cfg.epsilon, cfg.min_levels);
    const int n_entries = levels + 1;

    std::vector<double> dts(n_entries);
    for (int l = 0; l < n_entries; ++l) {
        dts[l] = model.maturity / static_cast<double>(std::uint64_t{1} << (l + 1));
    }

    // Warm-up: per-level variance estimates from coupled samples.
    std::vector<LevelAcc> warm(n_entries);
    std::vector<double> variances(n_entries);
    for (int l = 0; l < n_entries; ++l) {
        const LevelSampler sampler{fold, gen, model.maturity, l};
        warm[l] = run_level_phase(sampler, cfg.warmup_samples,
                                  static_cast<std::uint64_t>(2 * l), cfg.threads);
        const double n = static_cast<double>(warm[l].count);
        const double mean = warm[l].sum / n;
        variances[l] =
            std::max(0.0, (warm[l].sum_sq - n * mean * mean) / (n - 1.0));
    }

    const std::vector<std::uint64_t> allocation =
        giles_allocation(cfg.epsilon, variances, dts, cfg.min_trajectories);

    MlmcResult result;
    result.levels = levels;
    result.closed_form = zcb_closed_form(model);

    double estimator = 0.0;
    std::uint64_t total_steps = 0;
    for (int l = 0; l < n_entries; ++l) {
        const LevelSampler sampler{fold, gen, model.maturity, l};
        const std::uint64_t target = allocation[l];
        LevelAcc acc = warm[l];
        if (target > acc.count) {
            const LevelAcc extra =
                run_level_phase(sampler, target - acc.count,
                                static_cast<std::uint64_t>(2 * l + 1), cfg.threads);
            acc.sum += extra.sum;
            acc.sum_sq += extra.sum_sq;
            acc.count += extra.count;
            acc.steps += extra.steps;
        }
        const double n = static_cast<double>(acc.count);
        const double mean = acc.sum / n;
        const double var = std::max(0.0, (acc.sum_sq - n * mean * mean) / (n - 1.0));
        result.per_level.push_back(MlmcLevel{dts[l], acc.count, var, mean});
        estimator += mean;
        total_steps += acc.steps;
    }

    result.estimator = estimator;
    result.observed_error = std::abs(estimator - result.closed_form);
    result.total_fine_steps = total_steps;
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace cevsim
