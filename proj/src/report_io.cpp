#include "cevsim/report_io.hpp"

#include <cstdio>
#include <fstream>

namespace cevsim {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary); // binary: keep LF endings everywhere
    if (!out) {
        throw std::runtime_error("cannot open output file " + file.string());
    }
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_strong_error_csv(const StrongErrorReport& report,
                            const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "dt,mean_abs_error,std_error\n";
    for (const ErrorPoint& p : report.points) {
        out << format_double(p.dt) << ',' << format_double(p.mean_abs_error) << ','
            << format_double(p.standard_error) << '\n';
    }
}

void write_regression_summary_csv(const std::vector<RegressionSummaryRow>& rows,
                                  const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "scheme,rho_hat,intercept,r_squared\n";
    for (const auto& row : rows) {
        out << row.scheme << ',' << format_double(row.rho_hat) << ','
            << format_double(row.intercept) << ',' << format_double(row.r_squared)
            << '\n';
    }
}

void write_diagnostics_csv(const DiagnosticsReport& report,
                           const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "dt,sign_flip_freq,pms_sms_divergence_freq\n";
    for (std::size_t i = 0; i < report.sign_flip_freq_by_dt.size(); ++i) {
        out << format_double(report.sign_flip_freq_by_dt[i].first) << ','
            << format_double(report.sign_flip_freq_by_dt[i].second) << ','
            << format_double(report.pms_sms_divergence_freq_by_dt[i].second) << '\n';
    }
    std::filesystem::path summary = file;
    summary.replace_extension(".summary.csv");
    auto sum_out = open_out(summary);
    sum_out << "metric,value\n"
            << "local_error_slope," << format_double(report.local_error_slope) << '\n'
            << "corrected_local_error_slope,"
            << format_double(report.corrected_local_error_slope) << '\n';
}

void write_table_csv(const TableReport& report, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "alpha,sigma_squared,scheme,rho_hat,intercept,r_squared\n";
    for (const TableRow& row : report.rows) {
        for (const TableCell& cell : row.cells) {
            out << format_double(row.alpha) << ',' << format_double(row.sigma_squared)
                << ',' << cell.scheme << ',';
            if (cell.available) {
                out << format_double(cell.rho_hat) << ',' << format_double(cell.intercept)
                    << ',' << format_double(cell.r_squared);
            } else {
                out << "n/a,n/a,n/a";
            }
            out << '\n';
        }
    }
}

void write_path_csv(const SchemePath& path, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "step,time,state\n";
    const double dt = path.grid.dt();
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        out << k << ',' << format_double(static_cast<double>(k) * dt) << ','
            << format_double(path.states[k]) << '\n';
    }
}

void write_mlmc_csv(const MlmcResult& result, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "level,dt,n_samples,variance,mean_correction\n";
    for (std::size_t l = 0; l < result.per_level.size(); ++l) {
        const MlmcLevel& lv = result.per_level[l];
        out << l << ',' << format_double(lv.dt) << ',' << lv.n_samples << ','
            << format_double(lv.variance) << ',' << format_double(lv.mean_correction)
            << '\n';
    }
}

void emit_plot_script(const std::vector<PlotSeries>& series,
                      const std::filesystem::path& out_path) {
    if (series.empty()) {
        throw std::invalid_argument("emit_plot_script: no series to plot");
    }
    auto out = open_out(out_path);
    out << "# gnuplot script: strong error vs step size (log-log)\n"
        << "set logscale xy\n"
        << "set xlabel 'dt'\n"
        << "set ylabel 'E|error at T|'\n"
        << "set key left top\n"
        << "set datafile separator ','\n";
    out << "plot \\\n";
    for (const PlotSeries& s : series) {
        out << "  '" << s.csv.string() << "' every ::1 using 1:2 with linespoints title '"
            << s.label << "', \\\n";
    }
    out << "  x with lines dashtype 2 title 'slope 1 reference'\n";
}

} // namespace cevsim
