#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cevsim/config.hpp"
#include "cevsim/experiments.hpp"
#include "cevsim/mlmc.hpp"
#include "cevsim/model.hpp"
#include "cevsim/paths.hpp"
#include "cevsim/report_io.hpp"
#include "cevsim/schemes.hpp"
#include "cevsim/version.hpp"

namespace fs = std::filesystem;
using namespace cevsim;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string scale;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "experiment seed (overrides config and env)");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware count)");
    cmd->add_option("--scale", args.scale, "experiment scale: desk or full")
        ->check(CLI::IsMember({"desk", "full"}));
}

KeyValueConfig load_config(const CommonArgs& args) {
    KeyValueConfig cfg;
    if (!args.config_path.empty()) {
        cfg = KeyValueConfig::parse_file(args.config_path);
    }
    // Seed precedence: --seed flag, then CEVSIM_SEED, then config.
    if (const char* env = std::getenv("CEVSIM_SEED"); env != nullptr && !args.seed) {
        cfg.set("seed", env);
    }
    if (args.seed) {
        cfg.set_uint("seed", *args.seed);
    }
    if (args.threads != 0) cfg.set_uint("threads", args.threads);
    if (!args.scale.empty()) cfg.set("scale", args.scale);
    if (!cfg.has("scale")) cfg.set("scale", "desk");
    return cfg;
}

CevModel model_from_config(const KeyValueConfig& cfg) {
    const double x0 = cfg.get_double("x0");
    const double sigma = cfg.get_double("sigma");
    const double alpha = cfg.get_double("alpha");
    const double horizon = cfg.get_double("T");
    const std::string kind = cfg.get_string_or("drift.kind", "linear");
    if (kind != "linear") {
        throw ConfigError("drift.kind",
                          "drift.kind `" + kind + "` not supported in config files; "
                          "custom drifts are API-only");
    }
    return CevModel(x0, sigma, alpha,
                    DriftSpec::linear(cfg.get_double("drift.a"), cfg.get_double("drift.b")),
                    horizon);
}

ZcbModel zcb_from_config(const KeyValueConfig& cfg) {
    return ZcbModel{cfg.get_double_or("a", 10.0), cfg.get_double_or("b", 10.0),
                    cfg.get_double_or("sigma", 1.0), cfg.get_double_or("r0", 1.0),
                    cfg.get_double_or("T", 1.0)};
}

TableScale scale_from_config(const KeyValueConfig& cfg) {
    TableScale scale =
        cfg.get_string_or("scale", "desk") == "full" ? TableScale::full() : TableScale::desk();
    scale.n_trajectories = cfg.get_uint_or("experiment.trajectories", scale.n_trajectories);
    scale.ladder_min =
        static_cast<int>(cfg.get_uint_or("experiment.ladder_min", scale.ladder_min));
    scale.ladder_max =
        static_cast<int>(cfg.get_uint_or("experiment.ladder_max", scale.ladder_max));
    scale.reference_exponent = static_cast<int>(
        cfg.get_uint_or("experiment.reference_exponent", scale.reference_exponent));
    return scale;
}

SchemeId default_reference(const CevModel& model) {
    if (model.alpha == 0.5 && model.drift.is_linear() &&
        4.0 * model.drift.as_linear().level > model.sigma * model.sigma) {
        return SchemeId::AIS;
    }
    return SchemeId::SMS;
}

void write_manifest(const KeyValueConfig& cfg, const std::string& command,
                    const fs::path& out_dir) {
    KeyValueConfig manifest = cfg;
    manifest.set("command", command);
    manifest.write_file(out_dir / "manifest.cfg",
                        {std::string("cevsim ") + kVersion,
                         "rerun with: cevsim " + command + " --config manifest.cfg"});
}

int run_strong_error(const CommonArgs& args) {
    KeyValueConfig cfg = load_config(args);
    const CevModel model = model_from_config(cfg);
    const TableScale scale = scale_from_config(cfg);

    LadderConfig ladder(model);
    ladder.scheme_under_test =
        scheme_from_string(cfg.get_string_or("experiment.scheme", "sms"));
    ladder.reference_scheme =
        cfg.has("experiment.reference_scheme")
            ? scheme_from_string(cfg.get_string("experiment.reference_scheme"))
            : default_reference(model);
    ladder.ladder_min = scale.ladder_min;
    ladder.ladder_max = scale.ladder_max;
    ladder.reference_exponent = scale.reference_exponent;
    ladder.n_trajectories = scale.n_trajectories;
    if (cfg.has("experiment.base_step")) {
        ladder.base_step = cfg.get_double("experiment.base_step");
    }
    ladder.seed = cfg.get_uint_or("seed", 0);
    ladder.threads = static_cast<unsigned>(cfg.get_uint_or("threads", 0));

    const StrongErrorReport report = estimate_strong_error(ladder);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const std::string scheme_name(to_string(ladder.scheme_under_test));
    write_strong_error_csv(report, out / "strong_error.csv");
    write_regression_summary_csv(
        {{scheme_name, report.rho_hat, report.intercept, report.r_squared}},
        out / "regression.csv");
    emit_plot_script({{scheme_name, "strong_error.csv"}}, out / "strong_error.gp");
    write_manifest(cfg, "strong-error", out);

    std::cout << "dt,mean_abs_error,std_error\n";
    for (const ErrorPoint& p : report.points) {
        std::cout << format_double(p.dt) << ',' << format_double(p.mean_abs_error) << ','
                  << format_double(p.standard_error) << '\n';
    }
    std::cout << "scheme=" << scheme_name << " rho_hat=" << format_double(report.rho_hat)
              << " intercept=" << format_double(report.intercept)
              << " r_squared=" << format_double(report.r_squared) << '\n';
    return 0;
}

int run_diagnostics_cmd(const CommonArgs& args) {
    KeyValueConfig cfg = load_config(args);
    const CevModel model = model_from_config(cfg);

    std::vector<double> dts;
    if (cfg.has("experiment.dts")) {
        std::stringstream ss(cfg.get_string("experiment.dts"));
        std::string item;
        while (std::getline(ss, item, ';')) {
            if (!item.empty()) dts.push_back(std::stod(item));
        }
    } else {
        const double base = derive_constants(model).delta_max();
        for (int n = 1; n <= 6; ++n) dts.push_back(base / (1 << n));
    }
    const std::uint64_t n_traj = cfg.get_uint_or("experiment.trajectories", 2000);
    const std::uint64_t seed = cfg.get_uint_or("seed", 0);
    const unsigned threads = static_cast<unsigned>(cfg.get_uint_or("threads", 0));

    const DiagnosticsReport report = run_diagnostics(model, dts, n_traj, seed, threads);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    write_diagnostics_csv(report, out / "diagnostics.csv");
    write_manifest(cfg, "diagnostics", out);

    std::cout << "local_error_slope=" << format_double(report.local_error_slope)
              << " corrected_local_error_slope="
              << format_double(report.corrected_local_error_slope) << '\n';
    for (std::size_t i = 0; i < report.sign_flip_freq_by_dt.size(); ++i) {
        std::cout << "dt=" << format_double(report.sign_flip_freq_by_dt[i].first)
                  << " sign_flip_freq="
                  << format_double(report.sign_flip_freq_by_dt[i].second)
                  << " pms_sms_divergence_freq="
                  << format_double(report.pms_sms_divergence_freq_by_dt[i].second) << '\n';
    }
    return 0;
}

int run_table(const CommonArgs& args, int table_id) {
    KeyValueConfig cfg = load_config(args);
    const TableScale scale = scale_from_config(cfg);
    const std::uint64_t seed = cfg.get_uint_or("seed", 0);
    const unsigned threads = static_cast<unsigned>(cfg.get_uint_or("threads", 0));

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const fs::path csv = out / ("table" + std::to_string(table_id) + ".csv");
    const TableReport report = reproduce_table(table_id, scale, csv, seed, threads);
    write_manifest(cfg, "table --id " + std::to_string(table_id), out);

    std::cout << "alpha,sigma_squared,scheme,rho_hat,r_squared\n";
    for (const TableRow& row : report.rows) {
        for (const TableCell& cell : row.cells) {
            std::cout << format_double(row.alpha) << ','
                      << format_double(row.sigma_squared) << ',' << cell.scheme << ',';
            if (cell.available) {
                std::cout << format_double(cell.rho_hat) << ','
                          << format_double(cell.r_squared);
            } else {
                std::cout << "n/a,n/a";
            }
            std::cout << '\n';
        }
    }
    return 0;
}

int run_mlmc(const CommonArgs& args, std::optional<double> epsilon_flag,
             const std::string& scheme_flag) {
    KeyValueConfig cfg = load_config(args);
    if (epsilon_flag) cfg.set_double("mlmc.epsilon", *epsilon_flag);
    if (!scheme_flag.empty()) cfg.set("mlmc.scheme", scheme_flag);

    const ZcbModel model = zcb_from_config(cfg);
    MlmcConfig mc;
    mc.epsilon = cfg.get_double_or("mlmc.epsilon", 1e-3);
    mc.scheme = scheme_from_string(cfg.get_string_or("mlmc.scheme", "sms"));
    mc.min_trajectories = cfg.get_uint_or("mlmc.min_trajectories", 500);
    mc.min_levels = static_cast<int>(cfg.get_uint_or("mlmc.min_levels", 6));
    mc.warmup_samples = cfg.get_uint_or("mlmc.warmup", mc.min_trajectories);
    mc.seed = cfg.get_uint_or("seed", 0);
    mc.threads = static_cast<unsigned>(cfg.get_uint_or("threads", 0));

    const MlmcResult result = mlmc_estimate(model, mc);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    write_mlmc_csv(result, out / "mlmc_levels.csv");
    {
        std::ofstream summary(out / "mlmc_summary.csv", std::ios::binary);
        summary << "epsilon,estimator,closed_form,observed_error,total_fine_steps,seconds\n"
                << format_double(mc.epsilon) << ',' << format_double(result.estimator)
                << ',' << format_double(result.closed_form) << ','
                << format_double(result.observed_error) << ',' << result.total_fine_steps
                << ',' << format_double(result.wall_time_s) << '\n';
    }
    write_manifest(cfg, "mlmc", out);

    std::cout << "epsilon=" << format_double(mc.epsilon)
              << " estimator=" << format_double(result.estimator)
              << " closed_form=" << format_double(result.closed_form)
              << " observed_error=" << format_double(result.observed_error)
              << " total_fine_steps=" << result.total_fine_steps
              << " seconds=" << format_double(result.wall_time_s) << '\n';
    return 0;
}

int run_path_dump(const CommonArgs& args) {
    KeyValueConfig cfg = load_config(args);
    const CevModel model = model_from_config(cfg);
    const SchemeId scheme =
        scheme_from_string(cfg.get_string_or("experiment.scheme", "sms"));
    const std::uint64_t n_steps = cfg.get_uint_or("path.n_steps", 256);
    const std::uint64_t trajectory = cfg.get_uint_or("path.trajectory", 0);
    const std::uint64_t seed = cfg.get_uint_or("seed", 0);

    const BrownianGrid grid =
        generate(GridSpec{model.horizon, n_steps}, SeedId{seed, trajectory});
    const SchemePath path = simulate_path(scheme, model, grid);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    write_path_csv(path, out / "path.csv");
    if (cfg.get_uint_or("path.dump_increments", 1) != 0) {
        dump_increments(grid, out / "increments.bin");
    }
    write_manifest(cfg, "path-dump", out);

    std::cout << "steps=" << n_steps << " terminal=" << format_double(path.states.back())
              << " reflections=" << path.reflect_count
              << " integral=" << format_double(path.integral_trapezoid) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cevsim: simulation and convergence experiments for CEV-like SDEs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs strong_args, diag_args, table_args, mlmc_args, path_args;
    int table_id = 3;
    std::optional<double> mlmc_epsilon;
    std::string mlmc_scheme;

    CLI::App* strong = app.add_subcommand("strong-error", "terminal strong-error ladder");
    add_common(strong, strong_args);

    CLI::App* diag = app.add_subcommand("diagnostics", "one-step and sign-flip statistics");
    add_common(diag, diag_args);

    CLI::App* table = app.add_subcommand("table", "convergence-rate table");
    add_common(table, table_args);
    table->add_option("--id", table_id, "table id (3 or 4)")->check(CLI::IsMember({3, 4}));

    CLI::App* mlmc = app.add_subcommand("mlmc", "multilevel bond-pricing experiment");
    add_common(mlmc, mlmc_args);
    mlmc->add_option("--epsilon", mlmc_epsilon, "target RMS error");
    mlmc->add_option("--scheme", mlmc_scheme, "sms, pms, or ais");

    CLI::App* dump = app.add_subcommand("path-dump", "dump one simulated path as CSV");
    add_common(dump, path_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (strong->parsed()) return run_strong_error(strong_args);
        if (diag->parsed()) return run_diagnostics_cmd(diag_args);
        if (table->parsed()) return run_table(table_args, table_id);
        if (mlmc->parsed()) return run_mlmc(mlmc_args, mlmc_epsilon, mlmc_scheme);
        if (dump->parsed()) return run_path_dump(path_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
