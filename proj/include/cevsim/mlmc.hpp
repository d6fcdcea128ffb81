#ifndef CEVSIM_MLMC_HPP
#define CEVSIM_MLMC_HPP

#include <cstdint>
#include <vector>

#include "cevsim/model.hpp"
#include "cevsim/schemes.hpp"

namespace cevsim {

// CIR short-rate model dr = (a - b r) dt + sigma sqrt(r) dW used for
// zero-coupon bond pricing over [0, maturity].
struct ZcbModel {
    double a;
    double b;
    double sigma;
    double r0;
    double maturity;

    CevModel to_cev() const;
};

// Closed-form bond price B(0,T) = A(T) exp(-B(T) r0). Evaluated through
// log1p/expm1 so the price stays accurate down to sigma -> 0, where the
// exponent 2a/sigma^2 blows up while the base tends to 1.
double zcb_closed_form(const ZcbModel& m);

// exp(-trapezoidal integral of the simulated rate path).
double discounted_payoff(const SchemePath& path);

// Number of correction levels: max(floor(log2(1/epsilon)), min_levels).
int level_count(double epsilon, int min_levels = 6);

// Per-level sample counts from the variance/step-size allocation formula,
// floored at min_trajectories. variances and dts must have one entry per
// level (coarsest first).
std::vector<std::uint64_t> giles_allocation(double epsilon,
                                            const std::vector<double>& variances,
                                            const std::vector<double>& dts,
                                            std::uint64_t min_trajectories);

struct MlmcConfig {
    double epsilon = 1e-3;
    SchemeId scheme = SchemeId::SMS;
    std::uint64_t min_trajectories = 500;
    int min_levels = 6;
    std::uint64_t warmup_samples = 500;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct MlmcLevel {
    double dt;
    std::uint64_t n_samples;
    double variance;
    double mean_correction;
};

struct MlmcResult {
    int levels = 0; // L: number of correction levels; per_level has L+1 entries
    std::vector<MlmcLevel> per_level;
    double estimator = 0.0;
    double closed_form = 0.0;
    double observed_error = 0.0;
    std::uint64_t total_fine_steps = 0;
    double wall_time_s = 0.0;
};

// Multilevel estimator of the bond price: level dt ladder T/2^(l+1), variance
// warm-up with warmup_samples coupled trajectories per level, one-shot sample
// allocation, then the telescoping sum. Everything except wall_time_s is a
// pure function of (model, cfg).
MlmcResult mlmc_estimate(const ZcbModel& model, const MlmcConfig& cfg);

} // namespace cevsim

#endif // CEVSIM_MLMC_HPP
