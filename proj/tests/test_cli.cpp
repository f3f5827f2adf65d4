// test_cli.cpp — config parsing, signed semantics, artefact determinism and process exit codes
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "polaron/cli.hpp"

using namespace polaron;
using namespace polaron::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("polaron_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const io::Column& column(const std::vector<io::Column>& cols, const std::string& name) {
    for (const auto& c : cols)
        if (c.name == name) return c;
    throw std::runtime_error("missing column " + name);
}

struct ThreadsEnv {
    explicit ThreadsEnv(const char* v) { ::setenv("POLARON_THREADS", v, 1); }
    ~ThreadsEnv() { ::unsetenv("POLARON_THREADS"); }
};

int run_process(const std::string& args) {
    const char* bin = std::getenv("POLARON_RUN");
    if (!bin) return -1;
    const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesCommentsOverridesAndPiSuffix) {
    const RunConfig c = parse_config(
        "# demo\n"
        "scenario = phase-sweep\n"
        "system.epsilon = 1.5   # eV\n"
        "system.epsilon = 1.25\n"
        "\n"
        "system.drive_phase = 0.5pi\n"
        "output.svg = no\n");
    EXPECT_EQ(c.scenario, Scenario::phase_sweep);
    EXPECT_DOUBLE_EQ(c.epsilon, 1.25);
    EXPECT_DOUBLE_EQ(c.drive_phase, 0.5 * kPi);
    EXPECT_FALSE(c.svg);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("system.nonsense = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("system.epsilon = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("system.epsilon 1\n"), ConfigError);
    EXPECT_THROW(parse_config("scenario = nowhere\n"), ConfigError);
    EXPECT_THROW(parse_config("numerics.route = maybe\n"), ConfigError);
    RunConfig c;
    c.schema = 2;
    EXPECT_THROW(resolve(c), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/polaron.cfg"), ConfigError);
}

TEST(Config, ErrorNamesTheField) {
    try {
        resolve(parse_config("bath.cutoff = -1\n"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "cutoff");
    }
}

TEST(Config, EveryKeyRoundTripsThroughSet) {
    const auto keys = known_keys();
    EXPECT_GT(keys.size(), 40u);
    EXPECT_TRUE(is_numeric_key("dipole.d_delta"));
    EXPECT_FALSE(is_numeric_key("scenario"));
    EXPECT_FALSE(is_numeric_key("no.such.key"));
}

TEST(Resolve, SignedDriveAndDipoleCarryOrientation) {
    RunConfig c;
    c.drive = -0.05;
    c.drive_phase = 0.2;
    c.d_delta = -0.3;
    const Point p = resolve(c);
    EXPECT_DOUBLE_EQ(p.sys.drive_magnitude, 0.05);
    EXPECT_NEAR(p.sys.drive_phase, wrap_angle(0.2 + kPi), 1e-15);
    EXPECT_DOUBLE_EQ(p.geom.d_delta, 0.3);
    EXPECT_NEAR(std::abs(p.geom.theta_mu_delta), kPi, 1e-15);
    c.solid_angle_factor = 2.0;
    EXPECT_THROW(resolve(c), ConfigError);
}

TEST(Sweep, DefaultsAndExplicitAxes) {
    RunConfig c;
    c.scenario = Scenario::rates_sweep;
    const auto v = sweep_values(c);
    ASSERT_EQ(v.size(), 101u);
    EXPECT_DOUBLE_EQ(v.front(), -0.5);
    EXPECT_DOUBLE_EQ(v.back(), 0.5);
    c.scenario = Scenario::phase_sweep;
    EXPECT_EQ(sweep_values(c).size(), 73u);
    c.sweep = {"bath.cutoff", 0.2, 1.0, 3};
    const auto x = sweep_values(c);
    ASSERT_EQ(x.size(), 3u);
    EXPECT_DOUBLE_EQ(x[0], 0.2);
    EXPECT_DOUBLE_EQ(x[1], 0.6);
    EXPECT_DOUBLE_EQ(x[2], 1.0);
    c.scenario = Scenario::spectrum;
    EXPECT_THROW(sweep_values(c), ConfigError);
    EXPECT_THROW(set_key(c, "sweep.parameter", "numerics.rel_tol"), ConfigError);
    EXPECT_THROW(set_key(c, "sweep.parameter", "scenario"), ConfigError);
}

TEST(Threads, EnvironmentIsValidated) {
    {
        ThreadsEnv e("3");
        EXPECT_EQ(worker_threads(), 3u);
    }
    {
        ThreadsEnv e("zero");
        EXPECT_THROW(worker_threads(), ConfigError);
    }
    EXPECT_GE(worker_threads(), 1u);
}

TEST(Run, SinglePointMatchesDirectLibraryCall) {
    RunConfig c = parse_config("system.drive = 0.05\ndipole.d_delta = -0.2\nsystem.drive_phase = 0.4\n");
    c.out_dir = scratch("single");
    run(c);
    const auto cols = io::read_csv(c.out_dir / "custom.csv");
    const Point p = resolve(c);
    const SecularRates s = RateEngine(p.bath, c.rates).secular_rates(p.sys, p.geom);
    EXPECT_NEAR(column(cols, "gamma_down").values.at(0), s.gamma_down, 1e-11 * s.gamma_down);
    EXPECT_NEAR(column(cols, "gamma_d").values.at(0), s.gamma_d, 1e-11 * s.gamma_d);
    const auto summary = nlohmann::json::parse(slurp(c.out_dir / "summary.json"));
    EXPECT_EQ(summary["schema"], kSchemaVersion);
    EXPECT_EQ(summary["scenario"], "custom");
    EXPECT_DOUBLE_EQ(summary["config"]["dipole.d_delta"].get<double>(), -0.2);
}

TEST(Run, CsvCarriesUnitsAndLfEndings) {
    RunConfig c = parse_config("scenario = rates-sweep\nsweep.parameter = dipole.d_delta\nsweep.from = 0\n"
                               "sweep.to = 0.2\nsweep.steps = 3\n");
    c.out_dir = scratch("units");
    run(c);
    const std::string body = slurp(c.out_dir / "rates-sweep.csv");
    EXPECT_EQ(body.find('\r'), std::string::npos);
    ASSERT_FALSE(body.empty());
    EXPECT_EQ(body.back(), '\n');
    const std::string header = body.substr(0, body.find('\n'));
    EXPECT_EQ(header.rfind("dipole.d_delta,", 0), 0u) << header;
    EXPECT_NE(header.find("gamma_down [eV]"), std::string::npos) << header;
    EXPECT_NE(header.find("kappa_sq"), std::string::npos);
    EXPECT_TRUE(fs::exists(c.out_dir / "rates-sweep_rates.svg"));
    EXPECT_EQ(slurp(c.out_dir / "rates-sweep_rates.svg").rfind("<svg", 0), 0u);
}

TEST(Run, ManifestHashesEveryArtefact) {
    RunConfig c = parse_config("scenario = phase-sweep\nsweep.steps = 4\nsystem.drive = 0.05\ndipole.d_delta = 0.2\n");
    c.out_dir = scratch("manifest");
    const auto entries = run(c);
    ASSERT_FALSE(entries.empty());
    const auto m = nlohmann::json::parse(slurp(c.out_dir / "manifest.json"));
    ASSERT_EQ(m["files"].size(), entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        EXPECT_EQ(m["files"][k]["path"], entries[k].path);
        EXPECT_EQ(entries[k].sha256, io::sha256_file(c.out_dir / entries[k].path));
        EXPECT_EQ(entries[k].bytes, fs::file_size(c.out_dir / entries[k].path));
    }
    const fs::path abc = c.out_dir / "abc.txt";
    io::write_text(abc, "abc");
    EXPECT_EQ(io::sha256_file(abc), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, ByteIdenticalAcrossRunsAndThreadCounts) {
    auto once = [](const char* threads, const std::string& tag) {
        ThreadsEnv e(threads);
        RunConfig c = parse_config("scenario = rates-sweep\nsweep.steps = 9\nsystem.drive = 0.05\n");
        c.out_dir = scratch(tag);
        return run(c);
    };
    const auto a = once("1", "det1"), b = once("1", "det1b"), c = once("3", "det3");
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.size(), c.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].sha256, b[k].sha256) << a[k].path;
        EXPECT_EQ(a[k].sha256, c[k].sha256) << a[k].path;
    }
}

TEST(Io, CsvRoundTripAndRaggedRejected) {
    const fs::path dir = scratch("io");
    fs::create_directories(dir);
    io::write_csv(dir / "x.csv", {{"omega", "eV", {-1.0, 0.5}}, {"I", "", {1e-300, 3.25}}});
    const auto cols = io::read_csv(dir / "x.csv");
    ASSERT_EQ(cols.size(), 2u);
    EXPECT_EQ(cols[0].name, "omega");
    EXPECT_EQ(cols[1].values, (std::vector<double>{1e-300, 3.25}));
    EXPECT_THROW(io::write_csv(dir / "y.csv", {{"a", "", {1.0}}, {"b", "", {1.0, 2.0}}}), ConfigError);
    EXPECT_THROW(io::read_csv(dir / "missing.csv"), ConfigError);
}

TEST(Process, ExitCodes) {
    if (!std::getenv("POLARON_RUN")) GTEST_SKIP() << "POLARON_RUN not set";
    const std::string out = scratch("proc").string();
    EXPECT_EQ(run_process("run --scenario custom --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.json"));
    EXPECT_EQ(run_process("run --scenario custom --out " + out + " --set bath.nonsense=1"), 1);
    EXPECT_EQ(run_process("run --scenario custom --out " + out + " --set system.epsilon=-1"), 1);
    EXPECT_EQ(run_process("run --scenario custom"), 1);
    EXPECT_EQ(run_process("run --config /nonexistent.cfg --out " + out), 1);
    // No transition dipole and no drive: every rate vanishes and the steady state is not unique.
    EXPECT_EQ(run_process("run --scenario spectrum --out " + out + " --set dipole.d_mu=0"), 2);
}
