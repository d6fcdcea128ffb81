#ifndef CEVSIM_REPORT_IO_HPP
#define CEVSIM_REPORT_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cevsim/experiments.hpp"
#include "cevsim/mlmc.hpp"
#include "cevsim/schemes.hpp"

namespace cevsim {

// CSV dialect used everywhere: comma separated, '.' decimal point, one header
// row, LF line endings, doubles printed with 17 significant digits so a rerun
// reproduces files byte for byte.
std::string format_double(double value);

void write_strong_error_csv(const StrongErrorReport& report,
                            const std::filesystem::path& file);

struct RegressionSummaryRow {
    std::string scheme;
    double rho_hat;
    double intercept;
    double r_squared;
};
void write_regression_summary_csv(const std::vector<RegressionSummaryRow>& rows,
                                  const std::filesystem::path& file);

void write_diagnostics_csv(const DiagnosticsReport& report,
                           const std::filesystem::path& file);

void write_table_csv(const TableReport& report, const std::filesystem::path& file);

void write_path_csv(const SchemePath& path, const std::filesystem::path& file);

void write_mlmc_csv(const MlmcResult& result, const std::filesystem::path& file);

// gnuplot script: one log-log series per entry plus an identity-slope
// reference line. Each CSV is expected to carry (dt, mean_abs_error, ...)
// columns as written by write_strong_error_csv.
struct PlotSeries {
    std::string label;
    std::filesystem::path csv;
};
void emit_plot_script(const std::vector<PlotSeries>& series,
                      const std::filesystem::path& out_path);

} // namespace cevsim

#endif // CEVSIM_REPORT_IO_HPP
