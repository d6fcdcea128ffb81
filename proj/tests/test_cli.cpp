#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cevsim/config.hpp"
#include "cevsim/paths.hpp"
#include "cevsim/report_io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "cevsim_cli_test";
    fs::create_directories(dir);
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = std::string(CEVSIM_BIN) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "cevsim_cli_test";
    fs::create_directories(dir);
    const fs::path file = dir / name;
    std::ofstream out(file, std::ios::binary);
    out << body;
    return file;
}

const std::string kSmallStrongError =
    "x0 = 1\n"
    "sigma = 1\n"
    "alpha = 0.5\n"
    "T = 1\n"
    "drift.kind = linear\n"
    "drift.a = 10\n"
    "drift.b = 10\n"
    "experiment.scheme = sms\n"
    "experiment.trajectories = 100\n"
    "experiment.ladder_min = 1\n"
    "experiment.ladder_max = 3\n"
    "experiment.reference_exponent = 6\n"
    "seed = 31\n";

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cevsim_cli_test" / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("missing required key names the key and exits 1") {
    const fs::path cfg = write_config("missing_alpha.cfg",
                                      "x0 = 1\nsigma = 1\nT = 1\n"
                                      "drift.kind = linear\ndrift.a = 10\ndrift.b = 10\n");
    const RunResult r = run("strong-error --config " + cfg.string() + " --out " +
                            fresh_dir("missing").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("alpha") != std::string::npos);
}

TEST_CASE("unknown subcommand or flag exits nonzero") {
    CHECK(run("frobnicate").exit_code != 0);
    CHECK(run("mlmc --no-such-flag").exit_code != 0);
}

TEST_CASE("strong-error writes CSVs, gnuplot script, and manifest") {
    const fs::path cfg = write_config("small.cfg", kSmallStrongError);
    const fs::path out = fresh_dir("strong");
    const RunResult r = run("strong-error --config " + cfg.string() + " --out " +
                            out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("rho_hat=") != std::string::npos);

    CHECK(fs::exists(out / "strong_error.csv"));
    CHECK(fs::exists(out / "regression.csv"));
    CHECK(fs::exists(out / "strong_error.gp"));
    CHECK(fs::exists(out / "manifest.cfg"));

    const std::string csv = slurp(out / "strong_error.csv");
    CHECK(csv.rfind("dt,mean_abs_error,std_error\n", 0) == 0);
    CHECK(csv.find("\r") == std::string::npos); // LF only

    const std::string regression = slurp(out / "regression.csv");
    CHECK(regression.find("rho_hat") != std::string::npos);
    CHECK(regression.find("sms,") != std::string::npos);

    const std::string plot = slurp(out / "strong_error.gp");
    CHECK(plot.find("logscale xy") != std::string::npos);
    CHECK(plot.find("slope 1 reference") != std::string::npos);
    CHECK(plot.find("strong_error.csv") != std::string::npos);
}

TEST_CASE("manifest round-trip reproduces outputs byte for byte") {
    const fs::path cfg = write_config("small.cfg", kSmallStrongError);
    const fs::path out_a = fresh_dir("manifest_a");
    const fs::path out_b = fresh_dir("manifest_b");
    REQUIRE(run("strong-error --config " + cfg.string() + " --out " + out_a.string())
                .exit_code == 0);
    REQUIRE(run("strong-error --config " + (out_a / "manifest.cfg").string() +
                " --out " + out_b.string())
                .exit_code == 0);
    CHECK(slurp(out_a / "strong_error.csv") == slurp(out_b / "strong_error.csv"));
    CHECK(slurp(out_a / "regression.csv") == slurp(out_b / "regression.csv"));
}

TEST_CASE("determinism across thread counts through the CLI") {
    const fs::path cfg = write_config("small.cfg", kSmallStrongError);
    const fs::path out_1 = fresh_dir("threads_1");
    const fs::path out_2 = fresh_dir("threads_2");
    REQUIRE(run("strong-error --config " + cfg.string() + " --threads 1 --out " +
                out_1.string())
                .exit_code == 0);
    REQUIRE(run("strong-error --config " + cfg.string() + " --threads 2 --out " +
                out_2.string())
                .exit_code == 0);
    CHECK(slurp(out_1 / "strong_error.csv") == slurp(out_2 / "strong_error.csv"));
}

TEST_CASE("CEVSIM_SEED overrides the config seed; --seed beats both") {
    const fs::path cfg = write_config("small.cfg", kSmallStrongError); // seed = 31
    const fs::path out_env = fresh_dir("seed_env");
    const fs::path out_flag = fresh_dir("seed_flag");
    const fs::path out_plain = fresh_dir("seed_plain");

    setenv("CEVSIM_SEED", "77", 1);
    REQUIRE(run("strong-error --config " + cfg.string() + " --out " + out_env.string())
                .exit_code == 0);
    REQUIRE(run("strong-error --config " + cfg.string() + " --seed 31 --out " +
                out_flag.string())
                .exit_code == 0);
    unsetenv("CEVSIM_SEED");
    REQUIRE(run("strong-error --config " + cfg.string() + " --out " + out_plain.string())
                .exit_code == 0);

    // env seed 77 differs from config seed 31; the explicit flag restores 31.
    CHECK(slurp(out_env / "strong_error.csv") != slurp(out_plain / "strong_error.csv"));
    CHECK(slurp(out_flag / "strong_error.csv") == slurp(out_plain / "strong_error.csv"));
}

TEST_CASE("mlmc subcommand defaults to the bond benchmark model") {
    const fs::path out = fresh_dir("mlmc");
    const RunResult r =
        run("mlmc --epsilon 1e-2 --scheme sms --seed 9 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("observed_error=") != std::string::npos);
    CHECK(fs::exists(out / "mlmc_levels.csv"));
    CHECK(fs::exists(out / "mlmc_summary.csv"));
    const std::string summary = slurp(out / "mlmc_summary.csv");
    CHECK(summary.rfind("epsilon,estimator,closed_form,observed_error,total_fine_steps,seconds\n",
                        0) == 0);
}

TEST_CASE("runtime failures exit 2") {
    // AIS as the scheme under test with alpha = 0.7 is unsupported.
    const fs::path cfg = write_config(
        "bad_ais.cfg",
        "x0 = 1\nsigma = 1\nalpha = 0.7\nT = 1\n"
        "drift.kind = linear\ndrift.a = 10\ndrift.b = 10\n"
        "experiment.scheme = ais\n"
        "experiment.trajectories = 10\nexperiment.ladder_min = 1\n"
        "experiment.ladder_max = 3\nexperiment.reference_exponent = 6\n");
    const RunResult r =
        run("strong-error --config " + cfg.string() + " --out " + fresh_dir("bad").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("ais") != std::string::npos);
}

TEST_CASE("path-dump emits the states CSV and the raw increment dump") {
    const fs::path cfg = write_config("dump.cfg",
                                      "x0 = 1\nsigma = 1\nalpha = 0.5\nT = 1\n"
                                      "drift.kind = linear\ndrift.a = 10\ndrift.b = 10\n"
                                      "path.n_steps = 64\npath.trajectory = 3\nseed = 12\n");
    const fs::path out = fresh_dir("dump");
    const RunResult r = run("path-dump --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(out / "path.csv"));
    const std::string csv = slurp(out / "path.csv");
    CHECK(csv.rfind("step,time,state\n", 0) == 0);

    // The dumped increments reload to exactly the grid the run used.
    const cevsim::BrownianGrid dumped = cevsim::load_increments(out / "increments.bin");
    const cevsim::BrownianGrid regen = cevsim::generate(cevsim::GridSpec{1.0, 64},
                                                        cevsim::SeedId{12, 3});
    CHECK(dumped.increments == regen.increments);
}

TEST_CASE("config files: parsing, typed access, manifest echo") {
    using cevsim::ConfigError;
    using cevsim::KeyValueConfig;
    const KeyValueConfig cfg = KeyValueConfig::parse_string(
        "# comment\n"
        "x0 = 1.5\n"
        "drift.kind = linear   # trailing comment\n"
        "experiment.trajectories = 250\n"
        "\n");
    CHECK(cfg.get_double("x0") == 1.5);
    CHECK(cfg.get_string("drift.kind") == "linear");
    CHECK(cfg.get_uint("experiment.trajectories") == 250);
    CHECK(cfg.get_double_or("sigma", 2.0) == 2.0);

    CHECK_THROWS_AS(cfg.get_double("alpha"), ConfigError);
    try {
        cfg.get_double("alpha");
    } catch (const ConfigError& e) {
        CHECK(e.key == "alpha");
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
    CHECK_THROWS_AS(KeyValueConfig::parse_string("x0 1.5\n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_uint("x0"), ConfigError); // 1.5 is not an integer

    // write_file -> parse_file round trip preserves every entry.
    const fs::path file = fs::temp_directory_path() / "cevsim_cfg_roundtrip.cfg";
    cfg.write_file(file, {"header comment"});
    const KeyValueConfig back = KeyValueConfig::parse_file(file);
    CHECK(back.entries() == cfg.entries());
    fs::remove(file);
}

TEST_CASE("emit_plot_script: one series per scheme plus the reference line") {
    using cevsim::emit_plot_script;
    using cevsim::PlotSeries;
    const fs::path script = fs::temp_directory_path() / "cevsim_multi.gp";
    emit_plot_script({PlotSeries{"sms", "sms.csv"}, PlotSeries{"ses", "ses.csv"}}, script);
    const std::string text = slurp(script);
    CHECK(text.find("title 'sms'") != std::string::npos);
    CHECK(text.find("title 'ses'") != std::string::npos);
    CHECK(text.find("slope 1 reference") != std::string::npos);
    fs::remove(script);

    CHECK_THROWS_AS(emit_plot_script({}, script), std::invalid_argument);
}

TEST_CASE("table subcommand writes the CSV with n/a comparator cells") {
    const fs::path cfg = write_config("table.cfg",
                                      "experiment.trajectories = 40\n"
                                      "experiment.ladder_min = 1\n"
                                      "experiment.ladder_max = 3\n"
                                      "experiment.reference_exponent = 6\n"
                                      "seed = 4\n");
    const fs::path out = fresh_dir("table");
    const RunResult r =
        run("table --id 3 --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(out / "table3.csv"));
    const std::string csv = slurp(out / "table3.csv");
    CHECK(csv.find("sms") != std::string::npos);
    CHECK(csv.find("bms,n/a") != std::string::npos);
    CHECK(csv.find("mes,n/a") != std::string::npos);
}
