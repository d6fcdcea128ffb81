#ifndef CEVSIM_EXPERIMENTS_HPP
#define CEVSIM_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cevsim/model.hpp"
#include "cevsim/schemes.hpp"

namespace cevsim {

struct InsufficientPoints : std::runtime_error {
    explicit InsufficientPoints(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateRegression : std::runtime_error {
    explicit DegenerateRegression(const std::string& what) : std::runtime_error(what) {}
};

struct OlsFit {
    double slope;
    double intercept;
    double r_squared;
};

// Ordinary least squares of log(err) on log(dt). Natural logarithms.
OlsFit ols_loglog(const std::vector<std::pair<double, double>>& points);

// Step-size ladder for the strong-error protocol. Exponent n stands for the
// step size base/2^n; the base defaults to delta_max(alpha) and is rounded to
// base_n_steps = ceil(horizon/base) grid steps so every ladder member divides
// the reference grid exactly.
struct LadderConfig {
    explicit LadderConfig(CevModel m) : model(std::move(m)) {}

    CevModel model;
    SchemeId scheme_under_test = SchemeId::SMS;
    SchemeId reference_scheme = SchemeId::SMS;
    int ladder_min = 1;
    int ladder_max = 9;
    int reference_exponent = 12;
    std::uint64_t n_trajectories = 50000;
    std::optional<double> base_step; // default: delta_max(alpha)
    std::uint64_t seed = 0;
    std::uint64_t stream_base = 0; // offset added to trajectory ids
    unsigned threads = 0;          // 0 = hardware count
};

struct ErrorPoint {
    double dt;
    double mean_abs_error;
    double standard_error;
};

struct StrongErrorReport {
    std::vector<ErrorPoint> points; // sorted by dt descending
    double rho_hat = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Couples every trajectory to one fine Brownian path: the reference scheme
// runs at the reference exponent, the test scheme on each coarsened ladder
// grid, and E|X^ref_T - X_T| is estimated per step size.
StrongErrorReport estimate_strong_error(const LadderConfig& cfg);

struct DiagnosticsReport {
    double local_error_slope = 0.0;
    double corrected_local_error_slope = 0.0;
    std::vector<std::pair<double, double>> sign_flip_freq_by_dt;
    std::vector<std::pair<double, double>> pms_sms_divergence_freq_by_dt;
};

// One-step statistics of the SMS along whole paths: RMS displacement (order
// dt^1/2), RMS of the Milstein-corrected diffusion increment (order dt),
// grid-level frequency of nonpositive raw increments, and the frequency of
// PMS/SMS path divergence. dt values are snapped to horizon/round(horizon/dt).
DiagnosticsReport run_diagnostics(const CevModel& model,
                                  const std::vector<double>& dt_ladder,
                                  std::uint64_t n_trajectories, std::uint64_t seed,
                                  unsigned threads = 0);

struct TableScale {
    std::uint64_t n_trajectories;
    int ladder_min;
    int ladder_max;
    int reference_exponent;

    static TableScale desk() { return TableScale{5000, 1, 7, 10}; }
    static TableScale full() { return TableScale{50000, 1, 9, 12}; }
};

struct TableCell {
    std::string scheme;
    bool available = false; // false: emitted as n/a
    double rho_hat = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct TableRow {
    double alpha;
    double sigma_squared;
    std::vector<TableCell> cells;
};

struct TableReport {
    int table_id;
    std::vector<TableRow> rows;
};

// Convergence-rate tables for the benchmark drift b(x) = 10 - 10x, x0 = 1,
// T = 1: table 3 is the CIR family over sigma^2, table 4 the alpha > 1/2
// families. Cells for schemes without a published update rule are n/a.
TableReport reproduce_table(int table_id, const TableScale& scale,
                            const std::filesystem::path& out_csv,
                            std::uint64_t seed = 0, unsigned threads = 0);

} // namespace cevsim

#endif // CEVSIM_EXPERIMENTS_HPP
