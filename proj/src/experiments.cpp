#include "cevsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cevsim/parallel.hpp"
#include "cevsim/report_io.hpp"
#include "cevsim/rng.hpp"
#include "cevsim/step_kernel.hpp"

namespace cevsim {

OlsFit ols_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        throw InsufficientPoints("ols_loglog: need at least 2 points");
    }
    for (const auto& [dt, err] : points) {
        if (!(dt > 0.0) || !(err > 0.0)) {
            throw DegenerateRegression("ols_loglog: dt and err must be positive");
        }
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [dt, err] : points) {
        const double x = std::log(dt);
        const double y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        throw DegenerateRegression("ols_loglog: all dt values are equal");
    }
    OlsFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    const double mean_y = sy / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [dt, err] : points) {
        const double y = std::log(err);
        const double pred = fit.intercept + fit.slope * std::log(dt);
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

// Terminal state of an explicit scheme folded over raw increments.
template <int Kind> // 0: SMS, 1: PMS, 2: SES
double fold_explicit(const detail::StepCoeffs& coeffs, double x0, double dt,
                     const double* dw, std::uint64_t n) {
    double x = x0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double z = Kind == 2 ? coeffs.euler_z(x, dt, dw[k])
                                   : coeffs.milstein_z(x, dt, dw[k]);
        x = Kind == 1 ? (z > 0.0 ? z : 0.0) : std::abs(z);
    }
    return x;
}

double fold_sqrt_implicit(const detail::SqrtImplicitCoeffs& coeffs, double x0, double dt,
                          const double* dw, std::uint64_t n) {
    double y = std::sqrt(x0);
    for (std::uint64_t k = 0; k < n; ++k) {
        y = coeffs.next_y(y, dt, dw[k]);
    }
    return y * y;
}

struct TerminalFold {
    SchemeId scheme;
    detail::StepCoeffs coeffs;
    detail::SqrtImplicitCoeffs ais{0.0, 0.0, 0.0};

    TerminalFold(SchemeId s, const CevModel& model) : scheme(s), coeffs(model) {
        if (scheme == SchemeId::AIS) {
            if (model.alpha != 0.5 || !model.drift.is_linear()) {
                throw UnsupportedParameters(
                    "ais: requires alpha = 1/2 and a linear drift");
            }
            const auto& lin = model.drift.as_linear();
            if (!(4.0 * lin.level > model.sigma * model.sigma)) {
                throw UnsupportedParameters("ais: requires 4a > sigma^2");
            }
            ais = detail::SqrtImplicitCoeffs{lin.level, lin.reversion, model.sigma};
        }
    }

    double operator()(double x0, double dt, const double* dw, std::uint64_t n) const {
        switch (scheme) {
            case SchemeId::SMS: return fold_explicit<0>(coeffs, x0, dt, dw, n);
            case SchemeId::PMS: return fold_explicit<1>(coeffs, x0, dt, dw, n);
            case SchemeId::SES: return fold_explicit<2>(coeffs, x0, dt, dw, n);
            case SchemeId::AIS: return fold_sqrt_implicit(ais, x0, dt, dw, n);
        }
        return x0;
    }
};

// In-place pairwise coarsening of the first n entries; returns n/2.
std::uint64_t coarsen_in_place(double* dw, std::uint64_t n) {
    const std::uint64_t half = n / 2;
    for (std::uint64_t k = 0; k < half; ++k) {
        dw[k] = dw[2 * k] + dw[2 * k + 1];
    }
    return half;
}

struct StrongErrorAcc {
    std::vector<double> sum_abs;
    std::vector<double> sum_sq;
    std::uint64_t count = 0;
};

double resolve_base_step(const LadderConfig& cfg) {
    double delta_max = 0.0;
    bool delta_defined = false;
    try {
        delta_max = derive_constants(cfg.model).delta_max();
        delta_defined = true;
    } catch (const NonPositiveBSigma&) {
        if (!cfg.base_step) throw;
    }
    const double base = cfg.base_step.value_or(delta_max);
    if (!(base > 0.0)) {
        throw std::invalid_argument("estimate_strong_error: base_step must be positive");
    }
    if (delta_defined && base > delta_max * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "estimate_strong_error: base_step " << base << " exceeds delta_max "
            << delta_max;
        throw std::invalid_argument(msg.str());
    }
    return base;
}

} // namespace

StrongErrorReport estimate_strong_error(const LadderConfig& cfg) {
    if (cfg.ladder_min < 0 || cfg.ladder_min > cfg.ladder_max) {
        throw std::invalid_argument("estimate_strong_error: bad ladder exponent range");
    }
    if (cfg.reference_exponent <= cfg.ladder_max) {
        throw std::invalid_argument(
            "estimate_strong_error: reference_exponent must exceed the ladder maximum");
    }
    const int n_levels = cfg.ladder_max - cfg.ladder_min + 1;
    if (n_levels < 3) {
        throw InsufficientPoints("estimate_strong_error: need at least 3 ladder points");
    }
    if (cfg.n_trajectories < 2) {
        throw std::invalid_argument("estimate_strong_error: need at least 2 trajectories");
    }

    const CevModel& model = cfg.model;
    const double base = resolve_base_step(cfg);
    const std::uint64_t base_steps =
        static_cast<std::uint64_t>(std::ceil(model.horizon / base - 1e-12));
    const std::uint64_t n_ref = base_steps << cfg.reference_exponent;
    const double dt_ref = model.horizon / static_cast<double>(n_ref);

    const TerminalFold ref_fold(cfg.reference_scheme, model);
    const TerminalFold test_fold(cfg.scheme_under_test, model);
    const rng::CounterRng gen(cfg.seed);

    auto worker = [&](StrongErrorAcc& acc, std::uint64_t begin, std::uint64_t end) {
        acc.sum_abs.assign(n_levels, 0.0);
        acc.sum_sq.assign(n_levels, 0.0);
        std::vector<double> buf(n_ref);
        const double sqrt_dt_ref = std::sqrt(dt_ref);
        for (std::uint64_t i = begin; i < end; ++i) {
            const std::uint64_t stream = cfg.stream_base + i;
            for (std::uint64_t k = 0; k < n_ref; ++k) {
                buf[k] = sqrt_dt_ref * gen.gaussian(stream, k);
            }
            const double ref_terminal = ref_fold(model.x0, dt_ref, buf.data(), n_ref);

            std::uint64_t n = n_ref;
            for (int e = cfg.reference_exponent; e > cfg.ladder_max; --e) {
                n = coarsen_in_place(buf.data(), n);
            }
            for (int e = cfg.ladder_max; e >= cfg.ladder_min; --e) {
                const double dt = model.horizon / static_cast<double>(n);
                const double terminal = test_fold(model.x0, dt, buf.data(), n);
                const double err = std::abs(ref_terminal - terminal);
                const int j = e - cfg.ladder_min;
                acc.sum_abs[j] += err;
                acc.sum_sq[j] += err * err;
                if (e > cfg.ladder_min) n = coarsen_in_place(buf.data(), n);
            }
            ++acc.count;
        }
    };
    auto combine = [&](StrongErrorAcc& total, const StrongErrorAcc& part) {
        if (total.sum_abs.empty()) {
            total.sum_abs.assign(n_levels, 0.0);
            total.sum_sq.assign(n_levels, 0.0);
        }
        for (int j = 0; j < n_levels; ++j) {
            total.sum_abs[j] += part.sum_abs[j];
            total.sum_sq[j] += part.sum_sq[j];
        }
        total.count += part.count;
    };

    const StrongErrorAcc acc = chunked_reduce<StrongErrorAcc>(
        cfg.n_trajectories, 64, cfg.threads, worker, combine);

    StrongErrorReport report;
    const double n_traj = static_cast<double>(acc.count);
    std::vector<std::pair<double, double>> fit_points;
    for (int e = cfg.ladder_min; e <= cfg.ladder_max; ++e) {
        const int j = e - cfg.ladder_min;
        const double dt = model.horizon / static_cast<double>(base_steps << e);
        const double mean = acc.sum_abs[j] / n_traj;
        const double var =
            std::max(0.0, (acc.sum_sq[j] - n_traj * mean * mean) / (n_traj - 1.0));
        report.points.push_back(ErrorPoint{dt, mean, std::sqrt(var / n_traj)});
        fit_points.emplace_back(dt, mean);
    }
    // Largest step first.
    std::sort(report.points.begin(), report.points.end(),
              [](const ErrorPoint& a, const ErrorPoint& b) { return a.dt > b.dt; });

    const OlsFit fit = ols_loglog(fit_points);
    report.rho_hat = fit.slope;
    report.intercept = fit.intercept;
    report.r_squared = fit.r_squared;
    return report;
}

namespace {

struct DiagnosticsAcc {
    std::vector<double> sum_dx2;
    std::vector<double> sum_corr2;
    std::vector<std::uint64_t> steps;
    std::vector<std::uint64_t> flips;
    std::vector<std::uint64_t> diverged;
    std::uint64_t count = 0;
};

} // namespace

DiagnosticsReport run_diagnostics(const CevModel& model,
                                  const std::vector<double>& dt_ladder,
                                  std::uint64_t n_trajectories, std::uint64_t seed,
                                  unsigned threads) {
    if (dt_ladder.size() < 2) {
        throw InsufficientPoints("run_diagnostics: need at least 2 dt values");
    }
    if (n_trajectories < 1) {
        throw std::invalid_argument("run_diagnostics: need at least 1 trajectory");
    }
    const std::size_t n_dts = dt_ladder.size();
    std::vector<std::uint64_t> n_steps(n_dts);
    std::vector<double> actual_dt(n_dts);
    for (std::size_t d = 0; d < n_dts; ++d) {
        if (!(dt_ladder[d] > 0.0)) {
            throw std::invalid_argument("run_diagnostics: dt values must be positive");
        }
        n_steps[d] = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(model.horizon / dt_ladder[d])));
        actual_dt[d] = model.horizon / static_cast<double>(n_steps[d]);
    }

    const detail::StepCoeffs coeffs(model);
    const rng::CounterRng gen(seed);
    const double sigma = model.sigma;
    const double alpha = model.alpha;
    const double alpha_sigma2 = alpha * sigma * sigma;
    const bool alpha_half = alpha == 0.5;

    auto pow_alpha = [&](double x) { return alpha_half ? std::sqrt(x) : std::pow(x, alpha); };
    auto pow_2am1 = [&](double x, double x_alpha) {
        if (alpha_half) return 1.0;
        return x > 0.0 ? x_alpha * x_alpha / x : 0.0;
    };

    auto worker = [&](DiagnosticsAcc& acc, std::uint64_t begin, std::uint64_t end) {
        acc.sum_dx2.assign(n_dts, 0.0);
        acc.sum_corr2.assign(n_dts, 0.0);
        acc.steps.assign(n_dts, 0);
        acc.flips.assign(n_dts, 0);
        acc.diverged.assign(n_dts, 0);
        for (std::uint64_t i = begin; i < end; ++i) {
            for (std::size_t d = 0; d < n_dts; ++d) {
                const double dt = actual_dt[d];
                const double sqrt_dt = std::sqrt(dt);
                const std::uint64_t stream = (static_cast<std::uint64_t>(d) << 40) + i;
                double x = model.x0;
                double x_pms = model.x0;
                bool diverged = false;
                for (std::uint64_t k = 0; k < n_steps[d]; ++k) {
                    const double dw = sqrt_dt * gen.gaussian(stream, k);
                    const double z = coeffs.milstein_z(x, dt, dw);
                    const double next = std::abs(z);
                    if (z <= 0.0) ++acc.flips[d];

                    const double x_alpha = pow_alpha(x);
                    const double corrected = sigma * pow_alpha(next) - sigma * x_alpha -
                                             alpha_sigma2 * pow_2am1(x, x_alpha) * dw;
                    const double dx = next - x;
                    acc.sum_dx2[d] += dx * dx;
                    acc.sum_corr2[d] += corrected * corrected;

                    const double z_pms = coeffs.milstein_z(x_pms, dt, dw);
                    x_pms = z_pms > 0.0 ? z_pms : 0.0;
                    if (x_pms != next) diverged = true;

                    x = next;
                }
                acc.steps[d] += n_steps[d];
                if (diverged) ++acc.diverged[d];
            }
            ++acc.count;
        }
    };
    auto combine = [&](DiagnosticsAcc& total, const DiagnosticsAcc& part) {
        if (total.sum_dx2.empty()) {
            total.sum_dx2.assign(n_dts, 0.0);
            total.sum_corr2.assign(n_dts, 0.0);
            total.steps.assign(n_dts, 0);
            total.flips.assign(n_dts, 0);
            total.diverged.assign(n_dts, 0);
        }
        for (std::size_t d = 0; d < n_dts; ++d) {
            total.sum_dx2[d] += part.sum_dx2[d];
            total.sum_corr2[d] += part.sum_corr2[d];
            total.steps[d] += part.steps[d];
            total.flips[d] += part.flips[d];
            total.diverged[d] += part.diverged[d];
        }
        total.count += part.count;
    };

    const DiagnosticsAcc acc =
        chunked_reduce<DiagnosticsAcc>(n_trajectories, 64, threads, worker, combine);

    DiagnosticsReport report;
    std::vector<std::pair<double, double>> dx_points, corr_points;
    for (std::size_t d = 0; d < n_dts; ++d) {
        const double steps = static_cast<double>(acc.steps[d]);
        dx_points.emplace_back(actual_dt[d], std::sqrt(acc.sum_dx2[d] / steps));
        corr_points.emplace_back(actual_dt[d], std::sqrt(acc.sum_corr2[d] / steps));
        report.sign_flip_freq_by_dt.emplace_back(
            actual_dt[d], static_cast<double>(acc.flips[d]) / steps);
        report.pms_sms_divergence_freq_by_dt.emplace_back(
            actual_dt[d], static_cast<double>(acc.diverged[d]) /
                              static_cast<double>(acc.count));
    }
    report.local_error_slope = ols_loglog(dx_points).slope;
    report.corrected_local_error_slope = ols_loglog(corr_points).slope;
    return report;
}

TableReport reproduce_table(int table_id, const TableScale& scale,
                            const std::filesystem::path& out_csv, std::uint64_t seed,
                            unsigned threads) {
    if (table_id != 3 && table_id != 4) {
        throw std::invalid_argument("reproduce_table: table id must be 3 or 4");
    }

    struct RowSpec {
        double alpha;
        double sigma_squared;
    };
    std::vector<RowSpec> rows;
    std::vector<std::string> columns;
    if (table_id == 3) {
        for (double s2 : {1.0, 4.0, 6.25, 9.0, 36.0}) rows.push_back({0.5, s2});
        columns = {"sms", "ais", "bms", "mes", "ses"};
    } else {
        for (double s2 : {49.0, 53.29, 144.0}) rows.push_back({0.6, s2});
        for (double s2 : {64.0, 81.0, 225.0}) rows.push_back({0.7, s2});
        columns = {"sms", "bms", "ses"};
    }

    TableReport report{table_id, {}};
    std::uint64_t cell_index = 0;
    for (const RowSpec& row : rows) {
        TableRow out_row{row.alpha, row.sigma_squared, {}};
        const CevModel model(1.0, std::sqrt(row.sigma_squared), row.alpha,
                             DriftSpec::linear(10.0, 10.0), 1.0);
        // In the strongly sublinear rows the drift margin b_sigma is
        // nonpositive and delta_max is undefined; fall back to the step-size
        // cap branch so those rows remain computable.
        const DerivedConstants dc = derive_constants(model);
        std::optional<double> base_step;
        if (!(dc.b_sigma_alpha() > 0.0)) {
            base_step = row.alpha == 0.5
                            ? std::min(1.0 / (4.0 * model.drift.lipschitz_constant()), model.x0)
                            : 1.0 / (4.0 * row.alpha * dc.k_alpha());
        }
        for (const std::string& column : columns) {
            TableCell cell;
            cell.scheme = column;
            if (column == "bms" || column == "mes") {
                out_row.cells.push_back(cell); // no published update rule
                ++cell_index;
                continue;
            }
            LadderConfig cfg(model);
            cfg.base_step = base_step;
            cfg.scheme_under_test = scheme_from_string(column);
            cfg.reference_scheme = row.alpha == 0.5 ? SchemeId::AIS : SchemeId::SMS;
            cfg.ladder_min = scale.ladder_min;
            cfg.ladder_max = scale.ladder_max;
            cfg.reference_exponent = scale.reference_exponent;
            cfg.n_trajectories = scale.n_trajectories;
            cfg.seed = seed;
            cfg.stream_base = cell_index << 40;
            cfg.threads = threads;
            const StrongErrorReport cell_report = estimate_strong_error(cfg);
            cell.available = true;
            cell.rho_hat = cell_report.rho_hat;
            cell.intercept = cell_report.intercept;
            cell.r_squared = cell_report.r_squared;
            out_row.cells.push_back(cell);
            ++cell_index;
        }
        report.rows.push_back(std::move(out_row));
    }

    write_table_csv(report, out_csv);
    return report;
}

} // namespace cevsim
