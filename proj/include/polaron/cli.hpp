// cli.hpp — run configuration, scenario runner and the command-line entry point
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/dynamics.hpp"
#include "polaron/io.hpp"
#include "polaron/model.hpp"
#include "polaron/rates.hpp"
#include "polaron/spectrum.hpp"

namespace polaron::cli {

inline constexpr int kSchemaVersion = 1;

enum class Scenario { rates_sweep, phase_sweep, dynamics_compare, spectrum, extract, oracle_validate, custom };
const char* to_string(Scenario s);
Scenario parse_scenario(const std::string& name);  // ConfigError on unknown names

struct SweepAxis {
    std::string parameter;  // any numeric config key; empty selects the scenario default
    double from = 0.0;
    double to = 0.0;
    int steps = 1;
};

struct DynamicsBlock {
    double t_max = 0.0;  // 0 selects five PFME relaxation times
    int points = 201;
    std::string initial = "ground";  // ground | excited
    double slip_time = -1.0;         // > 0 restarts the secular PFME from the oracle state at this time
};

struct OracleBlock {
    int modes = 0;  // 0 disables the exact few-mode run
    int cutoff = 3;
    double max_dimension = 4096;
    double drift_tol = 0.05;
};

// Flat record of every config key. The signed values drive and dipole.d_delta carry orientation:
// a negative drive adds pi to the drive phase, a negative d_delta adds pi to theta_mu_delta.
struct RunConfig {
    int schema = kSchemaVersion;
    Scenario scenario = Scenario::custom;
    double epsilon = 1.0, drive = 0.0, drive_phase = 0.0, beta = 2.0;
    double d_mu = 0.01, d_delta = 0.0, d_D = 0.0, theta_mu_delta = 0.0, vartheta_mu = 0.0;
    double solid_angle_factor = kFreeSpaceFactor;
    double huang_rhys = 1.0 / kPi, cutoff = 1.0;
    SweepAxis sweep;
    RateOptions rates;
    StepperOptions stepper;
    SpectrumOptions spectrum;
    ExtractOptions extract;
    DynamicsBlock dynamics;
    OracleBlock oracle;
    std::string extract_input;  // spectrum CSV; empty computes the spectrum in-process
    bool svg = true;
    std::filesystem::path out_dir;
};

struct Point {
    SystemParams sys;
    DipoleGeometry geom;
    BathSpec bath;
};

// Validated library parameters for one configuration.
Point resolve(const RunConfig& cfg);

// Every key accepted by set_key, in documentation order.
std::vector<std::string> known_keys();
bool is_numeric_key(const std::string& key);
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
void set_numeric(RunConfig& cfg, const std::string& key, double value);

// "key = value" lines, '#' comments, blank lines ignored. Keys may repeat; the last wins.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Sweep coordinates; a single point at `from` when steps == 1, one NaN placeholder when no sweep applies.
std::vector<double> sweep_values(const RunConfig& cfg);

// Executes the scenario, writes artefacts and manifest.json into cfg.out_dir, returns the manifest.
std::vector<io::ManifestEntry> run(const RunConfig& cfg);

// Thread count from POLARON_THREADS, defaulting to the hardware concurrency.
unsigned worker_threads();

// Process entry: parses argv, runs, prints a JSON error report on failure. Returns 0, 1 or 2.
int main_entry(int argc, char** argv);

}  // namespace polaron::cli
