// cli.cpp — config parsing, sweep worker pool and the seven scenarios
#include "polaron/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "polaron/oracle.hpp"

namespace polaron::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::rates_sweep: return "rates-sweep";
        case Scenario::phase_sweep: return "phase-sweep";
        case Scenario::dynamics_compare: return "dynamics-compare";
        case Scenario::spectrum: return "spectrum";
        case Scenario::extract: return "extract";
        case Scenario::oracle_validate: return "oracle-validate";
        case Scenario::custom: return "custom";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::rates_sweep, Scenario::phase_sweep, Scenario::dynamics_compare, Scenario::spectrum,
                       Scenario::extract, Scenario::oracle_validate, Scenario::custom})
        if (name == to_string(s)) return s;
    throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

// ---- key registry --------------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Decimal number, optionally followed by "pi" ("0.5pi", "-pi", "2pi").
double parse_number(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    double scale = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        scale = kPi;
        t = t.substr(0, t.size() - 2);
        if (t.empty() || t == "+") t = "1";
        if (t == "-") t = "-1";
    }
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, "expected a number, got '" + text + "'");
    v *= scale;
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + text + "'");
}

int as_int(const std::string& key, double v) {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer");
    return static_cast<int>(v);
}

struct KeySpec {
    std::string key;
    std::string unit;
    bool numeric = true;
    std::function<void(RunConfig&, double)> set_num;
    std::function<void(RunConfig&, const std::string&)> set_text;
    std::function<json(const RunConfig&)> get;
};

KeySpec num(std::string key, std::string unit, double RunConfig::*field) {
    KeySpec k{key, std::move(unit), true, nullptr, nullptr, nullptr};
    k.set_num = [field](RunConfig& c, double v) { c.*field = v; };
    k.get = [field](const RunConfig& c) { return json(c.*field); };
    return k;
}

template <class Get, class Set>
KeySpec num_fn(std::string key, std::string unit, Get get, Set set) {
    KeySpec k{std::move(key), std::move(unit), true, nullptr, nullptr, nullptr};
    k.set_num = set;
    k.get = [get](const RunConfig& c) { return json(get(c)); };
    return k;
}

template <class Get, class Set>
KeySpec text(std::string key, Get get, Set set) {
    KeySpec k{std::move(key), "", false, nullptr, nullptr, nullptr};
    k.set_text = set;
    k.get = [get](const RunConfig& c) { return json(get(c)); };
    return k;
}

const std::vector<KeySpec>& registry() {
    static const std::vector<KeySpec> keys = [] {
        std::vector<KeySpec> r;
        r.push_back(num_fn(
            "schema", "", [](const RunConfig& c) { return c.schema; },
            [](RunConfig& c, double v) { c.schema = as_int("schema", v); }));
        r.push_back(text(
            "scenario", [](const RunConfig& c) { return std::string(to_string(c.scenario)); },
            [](RunConfig& c, const std::string& v) { c.scenario = parse_scenario(trim(v)); }));
        r.push_back(num("system.epsilon", "eV", &RunConfig::epsilon));
        r.push_back(num("system.drive", "eV", &RunConfig::drive));
        r.push_back(num("system.drive_phase", "rad", &RunConfig::drive_phase));
        r.push_back(num("system.beta", "1/eV", &RunConfig::beta));
        r.push_back(num("dipole.d_mu", "", &RunConfig::d_mu));
        r.push_back(num("dipole.d_delta", "", &RunConfig::d_delta));
        r.push_back(num("dipole.d_D", "", &RunConfig::d_D));
        r.push_back(num("dipole.theta_mu_delta", "rad", &RunConfig::theta_mu_delta));
        r.push_back(num("dipole.vartheta_mu", "rad", &RunConfig::vartheta_mu));
        r.push_back(text(
            "dipole.field",
            [](const RunConfig& c) { return std::string(c.solid_angle_factor == 1.0 ? "aligned" : "free-space"); },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t == "free-space") c.solid_angle_factor = kFreeSpaceFactor;
                else if (t == "aligned") c.solid_angle_factor = 1.0;
                else throw ConfigError("dipole.field", "expected free-space or aligned");
            }));
        r.push_back(num("bath.huang_rhys", "", &RunConfig::huang_rhys));
        r.push_back(num("bath.cutoff", "eV", &RunConfig::cutoff));
        r.push_back(text(
            "sweep.parameter", [](const RunConfig& c) { return c.sweep.parameter; },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                const bool physical = t.rfind("system.", 0) == 0 || t.rfind("dipole.", 0) == 0 || t.rfind("bath.", 0) == 0;
                if (!t.empty() && !(physical && is_numeric_key(t)))
                    throw ConfigError("sweep.parameter", "'" + t + "' is not a system, dipole or bath number");
                c.sweep.parameter = t;
            }));
        r.push_back(num_fn(
            "sweep.from", "", [](const RunConfig& c) { return c.sweep.from; },
            [](RunConfig& c, double v) { c.sweep.from = v; }));
        r.push_back(num_fn(
            "sweep.to", "", [](const RunConfig& c) { return c.sweep.to; },
            [](RunConfig& c, double v) { c.sweep.to = v; }));
        r.push_back(num_fn(
            "sweep.steps", "", [](const RunConfig& c) { return c.sweep.steps; },
            [](RunConfig& c, double v) { c.sweep.steps = as_int("sweep.steps", v); }));
        r.push_back(text(
            "numerics.route",
            [](const RunConfig& c) { return std::string(c.rates.route == Route::series ? "series" : "quadrature"); },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t == "series") c.rates.route = Route::series;
                else if (t == "quadrature") c.rates.route = Route::quadrature;
                else throw ConfigError("numerics.route", "expected series or quadrature");
            }));
        r.push_back(num_fn(
            "numerics.s_max", "1/eV", [](const RunConfig& c) { return c.rates.s_max; },
            [](RunConfig& c, double v) { c.rates.s_max = v; }));
        r.push_back(num_fn(
            "numerics.ds", "1/eV", [](const RunConfig& c) { return c.rates.ds; },
            [](RunConfig& c, double v) { c.rates.ds = v; }));
        r.push_back(num_fn(
            "numerics.omega_max", "eV", [](const RunConfig& c) { return c.rates.omega_max; },
            [](RunConfig& c, double v) { c.rates.omega_max = v; }));
        r.push_back(num_fn(
            "numerics.zero_plus", "eV", [](const RunConfig& c) { return c.rates.zero_plus; },
            [](RunConfig& c, double v) { c.rates.zero_plus = v; }));
        r.push_back(num_fn(
            "numerics.tail_tol", "", [](const RunConfig& c) { return c.rates.tail_tol; },
            [](RunConfig& c, double v) { c.rates.tail_tol = v; }));
        r.push_back(text(
            "numerics.integrator",
            [](const RunConfig& c) {
                return std::string(c.stepper.integrator == Integrator::matrix_exponential ? "expm" : "runge-kutta");
            },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t == "runge-kutta") c.stepper.integrator = Integrator::runge_kutta;
                else if (t == "expm") c.stepper.integrator = Integrator::matrix_exponential;
                else throw ConfigError("numerics.integrator", "expected runge-kutta or expm");
            }));
        r.push_back(num_fn(
            "numerics.rel_tol", "", [](const RunConfig& c) { return c.stepper.rel_tol; },
            [](RunConfig& c, double v) { c.stepper.rel_tol = v; }));
        r.push_back(num_fn(
            "numerics.abs_tol", "", [](const RunConfig& c) { return c.stepper.abs_tol; },
            [](RunConfig& c, double v) { c.stepper.abs_tol = v; }));
        r.push_back(num_fn(
            "dynamics.t_max", "1/eV", [](const RunConfig& c) { return c.dynamics.t_max; },
            [](RunConfig& c, double v) { c.dynamics.t_max = v; }));
        r.push_back(num_fn(
            "dynamics.points", "", [](const RunConfig& c) { return c.dynamics.points; },
            [](RunConfig& c, double v) { c.dynamics.points = as_int("dynamics.points", v); }));
        r.push_back(text(
            "dynamics.initial", [](const RunConfig& c) { return c.dynamics.initial; },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t != "ground" && t != "excited") throw ConfigError("dynamics.initial", "expected ground or excited");
                c.dynamics.initial = t;
            }));
        r.push_back(num_fn(
            "dynamics.slip_time", "1/eV", [](const RunConfig& c) { return c.dynamics.slip_time; },
            [](RunConfig& c, double v) { c.dynamics.slip_time = v; }));
        r.push_back(num_fn(
            "oracle.modes", "", [](const RunConfig& c) { return c.oracle.modes; },
            [](RunConfig& c, double v) { c.oracle.modes = as_int("oracle.modes", v); }));
        r.push_back(num_fn(
            "oracle.cutoff", "", [](const RunConfig& c) { return c.oracle.cutoff; },
            [](RunConfig& c, double v) { c.oracle.cutoff = as_int("oracle.cutoff", v); }));
        r.push_back(num_fn(
            "oracle.max_dimension", "", [](const RunConfig& c) { return c.oracle.max_dimension; },
            [](RunConfig& c, double v) { c.oracle.max_dimension = as_int("oracle.max_dimension", v); }));
        r.push_back(num_fn(
            "oracle.drift_tol", "", [](const RunConfig& c) { return c.oracle.drift_tol; },
            [](RunConfig& c, double v) { c.oracle.drift_tol = v; }));
        r.push_back(num_fn(
            "spectrum.step", "eV", [](const RunConfig& c) { return c.spectrum.step; },
            [](RunConfig& c, double v) { c.spectrum.step = v; }));
        r.push_back(num_fn(
            "spectrum.below", "", [](const RunConfig& c) { return c.spectrum.below; },
            [](RunConfig& c, double v) { c.spectrum.below = v; }));
        r.push_back(num_fn(
            "spectrum.above", "", [](const RunConfig& c) { return c.spectrum.above; },
            [](RunConfig& c, double v) { c.spectrum.above = v; }));
        r.push_back(num_fn(
            "spectrum.peak_points", "", [](const RunConfig& c) { return c.spectrum.peak_points; },
            [](RunConfig& c, double v) { c.spectrum.peak_points = as_int("spectrum.peak_points", v); }));
        r.push_back(text(
            "spectrum.secular", [](const RunConfig& c) { return c.spectrum.secular; },
            [](RunConfig& c, const std::string& v) { c.spectrum.secular = parse_bool("spectrum.secular", v); }));
        r.push_back(text(
            "extract.input", [](const RunConfig& c) { return c.extract_input; },
            [](RunConfig& c, const std::string& v) { c.extract_input = trim(v); }));
        r.push_back(num_fn(
            "extract.region_fwhm", "", [](const RunConfig& c) { return c.extract.region_fwhm; },
            [](RunConfig& c, double v) { c.extract.region_fwhm = v; }));
        r.push_back(num_fn(
            "extract.min_peak_rel", "", [](const RunConfig& c) { return c.extract.min_peak_rel; },
            [](RunConfig& c, double v) { c.extract.min_peak_rel = v; }));
        r.push_back(text(
            "extract.tail_correction", [](const RunConfig& c) { return c.extract.tail_correction; },
            [](RunConfig& c, const std::string& v) {
                c.extract.tail_correction = parse_bool("extract.tail_correction", v);
            }));
        r.push_back(text(
            "output.svg", [](const RunConfig& c) { return c.svg; },
            [](RunConfig& c, const std::string& v) { c.svg = parse_bool("output.svg", v); }));
        return r;
    }();
    return keys;
}

const KeySpec& lookup(const std::string& key) {
    for (const auto& k : registry())
        if (k.key == key) return k;
    throw ConfigError(key, "unknown key");
}

std::string unit_of(const std::string& key) { return lookup(key).unit; }

}  // namespace

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& k : registry()) out.push_back(k.key);
    return out;
}

bool is_numeric_key(const std::string& key) {
    for (const auto& k : registry())
        if (k.key == key) return k.numeric;
    return false;
}

void set_numeric(RunConfig& cfg, const std::string& key, double value) {
    const KeySpec& k = lookup(key);
    if (!k.numeric) throw ConfigError(key, "not a numeric key");
    if (!std::isfinite(value)) throw ConfigError(key, "must be finite");
    k.set_num(cfg, value);
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    const KeySpec& k = lookup(trim(key));
    if (k.numeric) k.set_num(cfg, parse_number(k.key, value));
    else k.set_text(cfg, value);
}

RunConfig parse_config(const std::string& body) {
    RunConfig cfg;
    std::istringstream in(body);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (cfg.schema != kSchemaVersion)
        throw ConfigError("schema", "unsupported version " + std::to_string(cfg.schema));
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

Point resolve(const RunConfig& c) {
    if (c.schema != kSchemaVersion) throw ConfigError("schema", "unsupported version " + std::to_string(c.schema));
    Point p;
    p.sys = make_system(c.epsilon, std::abs(c.drive), c.drive_phase + (c.drive < 0.0 ? kPi : 0.0), c.beta);
    p.geom.d_mu = c.d_mu;
    p.geom.d_delta = std::abs(c.d_delta);
    p.geom.d_D = c.d_D;
    p.geom.theta_mu_delta = wrap_angle(c.theta_mu_delta + (c.d_delta < 0.0 ? kPi : 0.0));
    p.geom.vartheta_mu = c.vartheta_mu;
    p.geom.solid_angle_factor = c.solid_angle_factor;
    validate(p.geom);
    p.bath = BathSpec{c.huang_rhys, c.cutoff, c.beta};
    validate(p.bath);
    return p;
}

// ---- sweeps --------------------------------------------------------------------------------------

namespace {

struct Axis {
    std::string parameter;  // empty: single point at the configured values
    std::vector<double> values;
};

Axis resolve_axis(const RunConfig& cfg) {
    Axis a;
    SweepAxis s = cfg.sweep;
    if (s.parameter.empty()) {
        if (cfg.scenario == Scenario::rates_sweep) s = {"dipole.d_delta", -0.5, 0.5, 101};
        else if (cfg.scenario == Scenario::phase_sweep) s = {"system.drive_phase", 0.0, kTwoPi, 73};
        else return {"", {std::numeric_limits<double>::quiet_NaN()}};
    } else if (cfg.scenario == Scenario::dynamics_compare || cfg.scenario == Scenario::spectrum ||
               cfg.scenario == Scenario::extract) {
        throw ConfigError("sweep.parameter", std::string("scenario ") + to_string(cfg.scenario) + " takes no sweep");
    }
    if (s.steps < 1) throw ConfigError("sweep.steps", "must be >= 1");
    a.parameter = s.parameter;
    for (int k = 0; k < s.steps; ++k)
        a.values.push_back(s.steps == 1 ? s.from : s.from + (s.to - s.from) * k / double(s.steps - 1));
    return a;
}

RunConfig at_point(const RunConfig& cfg, const Axis& axis, std::size_t i) {
    RunConfig c = cfg;
    if (!axis.parameter.empty()) set_numeric(c, axis.parameter, axis.values[i]);
    return c;
}

bool same_bath(const BathSpec& a, const BathSpec& b) {
    return a.huang_rhys == b.huang_rhys && a.cutoff == b.cutoff && a.beta == b.beta;
}

// Per-worker engines, rebuilt only when the bath changes between sweep points.
class Workspace {
public:
    explicit Workspace(const RunConfig& cfg) : opt_(cfg.rates) {}

    const RateEngine& engine(const BathSpec& bath, Route route) {
        auto& slot = engines_[static_cast<int>(route)];
        if (!slot.second || !same_bath(slot.first, bath)) {
            RateOptions o = opt_;
            o.route = route;
            slot = {bath, std::make_unique<RateEngine>(bath, o)};
        }
        return *slot.second;
    }

    const QuadratureOracle& oracle(const BathSpec& bath) {
        if (!oracle_ || !same_bath(oracle_bath_, bath)) {
            OracleOptions o;
            o.omega_max = opt_.omega_max;
            oracle_ = std::make_unique<QuadratureOracle>(bath, o);
            oracle_bath_ = bath;
        }
        return *oracle_;
    }

private:
    RateOptions opt_;
    std::map<int, std::pair<BathSpec, std::unique_ptr<RateEngine>>> engines_;
    BathSpec oracle_bath_;
    std::unique_ptr<QuadratureOracle> oracle_;
};

// Evaluates f(i, workspace) for every point; results land in index order, the lowest-index failure is rethrown.
template <class R, class F>
std::vector<R> parallel_map(const RunConfig& cfg, std::size_t n, F f) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        Workspace ws(cfg);
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i, ws);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(worker_threads(), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---- artefact context ----------------------------------------------------------------------------

struct Output {
    const RunConfig& cfg;
    fs::path dir;
    std::vector<std::string> files;
    json summary;

    void csv(const std::string& name, const std::vector<io::Column>& cols,
             const std::vector<std::pair<std::string, std::vector<std::string>>>& text_cols = {}) {
        io::write_csv(dir / name, cols, text_cols);
        files.push_back(name);
    }
    void svg(const std::string& name, const std::string& title, const std::string& xl, const std::string& yl,
             const std::vector<io::Series>& s, bool log_y = false) {
        if (!cfg.svg) return;
        io::write_text(dir / name, io::svg_plot(title, xl, yl, s, log_y));
        files.push_back(name);
    }
};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(n == 1 ? a : a + (b - a) * k / double(n - 1));
    return v;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

json secular_json(const SecularRates& r) {
    return json{{"gamma_down", r.gamma_down}, {"gamma_up", r.gamma_up}, {"gamma_d", r.gamma_d},
                {"eta", r.eta},               {"eta_bar", r.eta_bar}};
}

// gamma_down split by process: 2 Re of each component of Gamma_{--}(eta).
std::array<double, 4> down_parts(const RateEngine& eng, const Point& p, const EigenFrame& frame) {
    const Coupling c = eng.couple(p.sys, p.geom);
    const auto [a, b] = channel_coefficients(Channel::minus, frame);
    const double w = frame.eta;
    const RateComponent dd = eng.corr_ft(CorrKind::DagDot, w, c), dg = eng.corr_ft(CorrKind::DotDag, w, c),
                        gg = eng.corr_ft(CorrKind::DagDag, w, c), oo = eng.corr_ft(CorrKind::DotDot, w, c);
    auto part = [&](cd RateComponent::*m) {
        return 2.0 * (a * a * dd.*m + b * b * dg.*m + a * b * (gg.*m + oo.*m)).real();
    };
    return {part(&RateComponent::one_photon), part(&RateComponent::two_photon), part(&RateComponent::drive_one),
            part(&RateComponent::drive_zero)};
}

json config_json(const RunConfig& cfg) {
    json j;
    for (const auto& k : registry()) j[k.key] = k.get(cfg);
    return j;
}

json numerics_json(const RunConfig& cfg, const RateEngine& eng) {
    const auto& t = eng.table();
    return json{{"route", cfg.rates.route == Route::series ? "series" : "quadrature"},
                {"s_grid_max", t.s.empty() ? 0.0 : t.s.back()},
                {"s_grid_step", t.ds},
                {"s_grid_points", t.size()},
                {"omega_max", cfg.rates.omega_max},
                {"zero_plus", cfg.rates.zero_plus},
                {"tail_tol", cfg.rates.tail_tol},
                {"integrator", cfg.stepper.integrator == Integrator::matrix_exponential ? "expm" : "runge-kutta"},
                {"rel_tol", cfg.stepper.rel_tol},
                {"abs_tol", cfg.stepper.abs_tol}};
}

// ---- rates-sweep, phase-sweep, custom ------------------------------------------------------------

struct RateRow {
    double kappa_sq = 0, eta = 0;
    SecularRates sec, dfme;
    NonSecularRates ns;
    std::array<double, 4> parts{};
    double rho_thermal = 0, rho_ratio = 0;
};

void run_rates(Output& o, const Axis& axis, bool extended) {
    const RunConfig& cfg = o.cfg;
    auto rows = parallel_map<RateRow>(cfg, axis.values.size(), [&](std::size_t i, Workspace& ws) {
        const Point p = resolve(at_point(cfg, axis, i));
        const RateEngine& eng = ws.engine(p.bath, cfg.rates.route);
        const RateTable t = eng.rate_table(p.sys, p.geom);
        RateRow r;
        r.kappa_sq = t.frame.kappa * t.frame.kappa;
        r.eta = t.frame.eta;
        r.sec = t.secular();
        r.parts = down_parts(eng, p, t.frame);
        if (extended) {
            r.ns = t.nonsecular();
            r.dfme = eng.dfme_table(p.sys, p.geom).secular();
            r.rho_thermal = thermal_excited_population(p.sys, t.frame.kappa);
            const double g = r.sec.gamma_up + r.sec.gamma_down;
            r.rho_ratio = g > 0.0 ? r.sec.gamma_up / g : std::numeric_limits<double>::quiet_NaN();
        }
        return r;
    });

    std::vector<io::Column> cols;
    if (!axis.parameter.empty()) cols.push_back({axis.parameter, unit_of(axis.parameter), axis.values});
    auto add = [&](const std::string& name, const std::string& unit, auto get) {
        io::Column c{name, unit, {}};
        for (const auto& r : rows) c.values.push_back(get(r));
        cols.push_back(std::move(c));
    };
    add("gamma_down", "eV", [](const RateRow& r) { return r.sec.gamma_down; });
    add("gamma_up", "eV", [](const RateRow& r) { return r.sec.gamma_up; });
    add("gamma_d", "eV", [](const RateRow& r) { return r.sec.gamma_d; });
    add("down_one_photon", "eV", [](const RateRow& r) { return r.parts[0]; });
    add("down_two_photon", "eV", [](const RateRow& r) { return r.parts[1]; });
    add("down_drive_one", "eV", [](const RateRow& r) { return r.parts[2]; });
    add("down_drive_zero", "eV", [](const RateRow& r) { return r.parts[3]; });
    add("kappa_sq", "", [](const RateRow& r) { return r.kappa_sq; });
    add("eta", "eV", [](const RateRow& r) { return r.eta; });
    add("eta_bar", "eV", [](const RateRow& r) { return r.sec.eta_bar; });
    if (extended) {
        add("rho_ee_thermal", "", [](const RateRow& r) { return r.rho_thermal; });
        add("rho_ee_rate_ratio", "", [](const RateRow& r) { return r.rho_ratio; });
        add("abs_gamma_bar", "eV", [](const RateRow& r) { return std::abs(r.ns.gamma_bar); });
        add("abs_k_1", "eV", [](const RateRow& r) { return std::abs(r.ns.k_1); });
        add("abs_k_plus", "eV", [](const RateRow& r) { return std::abs(r.ns.k_plus); });
        add("abs_k_minus", "eV", [](const RateRow& r) { return std::abs(r.ns.k_minus); });
        add("dfme_gamma_down", "eV", [](const RateRow& r) { return r.dfme.gamma_down; });
        add("dfme_gamma_d", "eV", [](const RateRow& r) { return r.dfme.gamma_d; });
    }
    const std::string stem = to_string(cfg.scenario);
    o.csv(stem + ".csv", cols);

    if (!axis.parameter.empty()) {
        auto series = [&](const std::string& label, std::size_t col) {
            return io::Series{label, axis.values, cols[col].values};
        };
        const std::string xl = axis.parameter + (unit_of(axis.parameter).empty() ? "" : " [" + unit_of(axis.parameter) + "]");
        o.svg(stem + "_rates.svg", "Transition and decoherence rates", xl, "rate [eV]",
              {series("gamma_down", 1), series("gamma_up", 2), series("gamma_d", 3)}, true);
        o.svg(stem + "_parts.svg", "Contributions to gamma_down", xl, "rate [eV]",
              {series("one-photon", 4), series("two-photon", 5), series("drive, one-photon", 6),
               series("drive, zero-photon", 7)});
    }

    double lo = INFINITY, hi = -INFINITY;
    std::size_t ilo = 0, ihi = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].sec.gamma_down < lo) lo = rows[i].sec.gamma_down, ilo = i;
        if (rows[i].sec.gamma_down > hi) hi = rows[i].sec.gamma_down, ihi = i;
    }
    json res{{"points", rows.size()},
             {"gamma_down_min", lo},
             {"gamma_down_max", hi},
             {"gamma_down_min_over_max", hi > 0.0 ? lo / hi : 0.0}};
    if (!axis.parameter.empty()) {
        res["argmin"] = axis.values[ilo];
        res["argmax"] = axis.values[ihi];
    }
    if (rows.size() == 1) {
        res["secular"] = secular_json(rows[0].sec);
        res["kappa_sq"] = rows[0].kappa_sq;
        res["down_parts"] = rows[0].parts;
        if (extended) {
            res["nonsecular"] = json{{"gamma_bar", cjson(rows[0].ns.gamma_bar)},
                                     {"k_1", cjson(rows[0].ns.k_1)},
                                     {"k_plus", cjson(rows[0].ns.k_plus)},
                                     {"k_minus", cjson(rows[0].ns.k_minus)}};
            res["rho_ee_thermal"] = rows[0].rho_thermal;
            res["rho_ee_rate_ratio"] = rows[0].rho_ratio;
        }
    }
    o.summary["results"] = res;
}

// ---- dynamics-compare ----------------------------------------------------------------------------

io::Column rho_col(const std::string& name, const Trajectory& t, int a, int b, bool absval) {
    io::Column c{name, "", {}};
    for (const auto& r : t.rho) c.values.push_back(absval ? std::abs(r.m(a, b)) : r.m(a, b).real());
    return c;
}

void write_trajectory(Output& o, const std::string& name, const Trajectory& t) {
    std::vector<io::Column> cols{{"t", "1/eV", t.t}};
    const char* lab[2] = {"e", "g"};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            io::Column re{std::string("re_rho_") + lab[a] + lab[b], "", {}}, im{std::string("im_rho_") + lab[a] + lab[b], "", {}};
            for (const auto& r : t.rho) {
                re.values.push_back(r.m(a, b).real());
                im.values.push_back(r.m(a, b).imag());
            }
            cols.push_back(re);
            cols.push_back(im);
        }
    o.csv(name, cols,
          {{"frame", std::vector<std::string>(t.t.size(), to_string(t.frame))},
           {"equation", std::vector<std::string>(t.t.size(), to_string(t.equation))}});
}

double max_abs_diff(const io::Column& a, const io::Column& b, std::size_t upto) {
    double m = 0.0;
    for (std::size_t k = 0; k < std::min({upto, a.values.size(), b.values.size()}); ++k)
        m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

void run_dynamics(Output& o) {
    const RunConfig& cfg = o.cfg;
    const Point p = resolve(cfg);
    if (cfg.dynamics.points < 2) throw ConfigError("dynamics.points", "must be >= 2");
    if (cfg.dynamics.t_max < 0.0) throw ConfigError("dynamics.t_max", "must be >= 0");
    if (cfg.dynamics.slip_time > 0.0 && cfg.oracle.modes <= 0)
        throw ConfigError("dynamics.slip_time", "needs the exact oracle (oracle.modes > 0)");
    Workspace ws(cfg);
    const RateEngine& eng = ws.engine(p.bath, cfg.rates.route);
    const RateTable tab = eng.rate_table(p.sys, p.geom);
    const SecularRates sec = tab.secular();
    const double kap = tab.frame.kappa;
    const double relax = 1.0 / (sec.gamma_up + sec.gamma_down);
    double t_max = cfg.dynamics.t_max;
    if (t_max == 0.0) {
        if (!std::isfinite(relax)) throw ConfigError("dynamics.t_max", "rates vanish; set the window explicitly");
        t_max = 5.0 * relax;
    }
    const std::vector<double> t = linspace(0.0, t_max, cfg.dynamics.points);
    DensityMatrix rho0 = ground_state();
    if (cfg.dynamics.initial == "excited") rho0.m << 1.0, 0.0, 0.0, 0.0;

    const Trajectory ps = simulate(Equation::pfme_secular, eng, p.sys, p.geom, rho0, t, cfg.stepper);
    const Trajectory pn = simulate(Equation::pfme_nonsecular, eng, p.sys, p.geom, rho0, t, cfg.stepper);
    const Trajectory dn = simulate(Equation::dfme_nonsecular, eng, p.sys, p.geom, rho0, t, cfg.stepper);
    const Trajectory ps_lab = to_lab_frame(ps, kap), pn_lab = to_lab_frame(pn, kap);

    std::vector<io::Column> cols{{"t", "1/eV", t},
                                 rho_col("rho_gg_pfme_secular", ps, 1, 1, false),
                                 rho_col("rho_gg_pfme_nonsecular", pn, 1, 1, false),
                                 rho_col("rho_gg_dfme_nonsecular", dn, 1, 1, false),
                                 rho_col("abs_rho_eg_pfme_secular_lab", ps_lab, 0, 1, true),
                                 rho_col("abs_rho_eg_pfme_nonsecular_lab", pn_lab, 0, 1, true),
                                 rho_col("abs_rho_eg_dfme_nonsecular", dn, 0, 1, true)};
    write_trajectory(o, "traj_pfme_secular.csv", ps);
    write_trajectory(o, "traj_pfme_nonsecular.csv", pn);
    write_trajectory(o, "traj_dfme_nonsecular.csv", dn);

    json res{{"kappa", kap},
             {"secular", secular_json(sec)},
             {"relaxation_time", relax},
             {"t_max", t_max},
             {"rho_gg_final",
              {{"pfme_secular", cols[1].values.back()},
               {"pfme_nonsecular", cols[2].values.back()},
               {"dfme_nonsecular", cols[3].values.back()}}},
             {"rho_ee_steady",
              {{"rate_ratio", steady_state(p.sys, p.geom, eng, SteadyMode::rate_ratio).m(0, 0).real()},
               {"thermal", steady_state(p.sys, p.geom, eng, SteadyMode::thermal).m(0, 0).real()}}}};

    std::vector<io::Series> pop{{"PFME secular", t, cols[1].values},
                                {"PFME non-secular", t, cols[2].values},
                                {"DFME non-secular", t, cols[3].values}};
    std::vector<io::Series> coh{{"PFME secular (lab)", t, cols[4].values}, {"DFME non-secular", t, cols[6].values}};

    if (cfg.oracle.modes > 0) {
        const DiscreteBath db = discretise_bath(p.bath, p.geom, cfg.oracle.modes);
        FockConfig fc;
        fc.cutoffs.assign(static_cast<std::size_t>(cfg.oracle.modes), cfg.oracle.cutoff);
        fc.max_dimension = static_cast<std::size_t>(cfg.oracle.max_dimension);
        fc.dimension();
        const Eigen::MatrixXcd h = build_effective_hamiltonian(db, p.sys, fc);
        const ExactResult ex = exact_evolve(h, db, fc, p.sys.beta, t);
        const double drift = cutoff_drift(db, p.sys, fc, t, cfg.oracle.drift_tol);
        write_trajectory(o, "traj_exact.csv", ex.trajectory);
        cols.push_back(rho_col("rho_gg_exact", ex.trajectory, 1, 1, false));
        cols.push_back(rho_col("abs_rho_eg_exact", ex.trajectory, 0, 1, true));
        pop.push_back({"exact few-mode", t, cols[7].values});
        coh.push_back({"exact few-mode", t, cols[8].values});
        const auto window = static_cast<std::size_t>(
            std::upper_bound(t.begin(), t.end(), 3.0 * relax) - t.begin());
        const EffectiveParams ep = effective_parameters(db, p.sys);
        res["oracle"] = json{{"modes", db.size()},
                             {"cutoff", cfg.oracle.cutoff},
                             {"dimension", fc.dimension()},
                             {"ensemble_members", ex.members},
                             {"truncated_weight", ex.truncated_weight},
                             {"trace_error", ex.trace_error},
                             {"cutoff_drift", drift},
                             {"discretisation_errors",
                              {{"lambda", db.lambda_error}, {"mu1", db.mu1_error}, {"mu2", db.mu2_error}, {"phi0", db.phi0_error}}},
                             {"epsilon_tilde", ep.epsilon_tilde},
                             {"v_tilde", cjson(ep.v_tilde)},
                             {"rho_gg_final", cols[7].values.back()},
                             {"max_error_three_relaxation_times",
                              {{"pfme_secular", max_abs_diff(cols[1], cols[7], window)},
                               {"pfme_nonsecular", max_abs_diff(cols[2], cols[7], window)},
                               {"dfme_nonsecular", max_abs_diff(cols[3], cols[7], window)}}}};

        if (cfg.dynamics.slip_time > 0.0) {
            // Secular PFME restarted from the exact state at t_slip; lab coherence is kappa times the polaron one.
            const ExactResult at = exact_evolve(h, db, fc, p.sys.beta, {cfg.dynamics.slip_time});
            DensityMatrix r = at.trajectory.rho.front();
            if (kap > 0.0) r.m(0, 1) /= kap, r.m(1, 0) /= kap;
            std::vector<double> shifted;
            std::size_t first = t.size();
            for (std::size_t k = 0; k < t.size(); ++k)
                if (t[k] >= cfg.dynamics.slip_time) {
                    if (first == t.size()) first = k;
                    shifted.push_back(t[k] - cfg.dynamics.slip_time);
                }
            io::Column c{"abs_rho_eg_slip_lab", "", std::vector<double>(t.size(), std::numeric_limits<double>::quiet_NaN())};
            if (!shifted.empty()) {
                const Trajectory sl = to_lab_frame(simulate(Equation::pfme_secular, eng, p.sys, p.geom, r, shifted, cfg.stepper), kap);
                for (std::size_t k = 0; k < sl.rho.size(); ++k) c.values[first + k] = std::abs(sl.rho[k].m(0, 1));
            }
            cols.push_back(c);
            coh.push_back({"PFME secular, slip start", t, c.values});
            res["slip_time"] = cfg.dynamics.slip_time;
        }
    }
    o.csv("dynamics.csv", cols);
    o.svg("dynamics_population.svg", "Ground-state population", "t [1/eV]", "rho_gg", pop);
    o.svg("dynamics_coherence.svg", "Lab-frame coherence", "t [1/eV]", "|rho_eg|", coh);
    o.summary["numerics"] = numerics_json(cfg, eng);
    o.summary["results"] = res;
}

// ---- spectrum ------------------------------------------------------------------------------------

json spectrum_json(const SpectrumSeries& s) {
    json lines = json::array();
    for (const auto& l : s.lines) lines.push_back({{"center", l.center}, {"hwhm", l.hwhm}, {"weight", l.weight}});
    const double P = spectrum_power(s, true);
    return json{{"power", P},
                {"power_continuous", spectrum_power(s, false)},
                {"elastic_weight", s.elastic_weight},
                {"kappa_sq", s.kappa_sq},
                {"rho_ee", s.rho_ee},
                {"pi_rho_ee", kPi * s.rho_ee},
                {"power_sum_rule_rel_error", std::abs(P - kPi * s.rho_ee) / P},
                {"tail_mass", s.tail_mass},
                {"grid_points", s.omega.size()},
                {"lines", lines}};
}

void run_spectrum(Output& o) {
    const RunConfig& cfg = o.cfg;
    const Point p = resolve(cfg);
    Workspace ws(cfg);
    const RateEngine& eng = ws.engine(p.bath, cfg.rates.route);
    const SpectrumVariant vs[3] = {SpectrumVariant::with_sideband, SpectrumVariant::no_sideband, SpectrumVariant::no_pd};
    // Each variant refines around its own lines; a second pass puts all three on the union grid.
    std::vector<double> grid;
    for (auto v : vs) {
        const SpectrumSeries s = polarisation_spectrum(p.sys, p.geom, eng, v, cfg.spectrum);
        grid.insert(grid.end(), s.omega.begin(), s.omega.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    SpectrumOptions so = cfg.spectrum;
    so.extra_points = grid;
    std::vector<SpectrumSeries> ss;
    for (auto v : vs) ss.push_back(polarisation_spectrum(p.sys, p.geom, eng, v, so));
    for (const auto& s : ss)
        if (s.omega != ss[0].omega) throw NumericsError("spectrum", "variant grids failed to merge", 0.0);

    std::vector<io::Column> cols{{"omega", "eV", ss[0].omega}};
    std::vector<io::Series> plot;
    json per;
    for (const auto& s : ss) {
        cols.push_back({std::string("I_") + to_string(s.variant), "1/eV", s.intensity});
        plot.push_back({to_string(s.variant), s.omega, s.intensity});
        per[to_string(s.variant)] = spectrum_json(s);
    }
    o.csv("spectrum.csv", cols);
    o.svg("spectrum.svg", "Polarisation spectrum (continuous part)", "omega [eV]", "I [1/eV]", plot, true);
    const double P = spectrum_power(ss[0], true), Px = spectrum_power(ss[1], true);
    o.summary["numerics"] = numerics_json(cfg, eng);
    o.summary["results"] = json{{"variants", per},
                                {"sideband_free_fraction", Px / P},
                                {"sideband_free_fraction_minus_kappa_sq", Px / P - ss[0].kappa_sq}};
}

// ---- extract -------------------------------------------------------------------------------------

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void run_extract(Output& o) {
    const RunConfig& cfg = o.cfg;
    const Point p = resolve(cfg);
    Workspace ws(cfg);
    SpectrumSeries s;
    std::string source;
    if (!cfg.extract_input.empty()) {
        const auto cols = io::read_csv(cfg.extract_input);
        const io::Column* w = nullptr;
        const io::Column* y = nullptr;
        for (const auto& c : cols) {
            if (c.name == "omega") w = &c;
            if (c.name == "I_with_sideband" || c.name == "intensity") y = &c;
        }
        if (!w || !y) throw ConfigError("extract.input", "needs columns omega and I_with_sideband (or intensity)");
        s.omega = w->values;
        s.intensity = y->values;
        for (std::size_t k = 0; k < s.omega.size(); ++k) {
            if (!std::isfinite(s.omega[k]) || !std::isfinite(s.intensity[k]))
                throw ConfigError("extract.input", "non-numeric sample at row " + std::to_string(k + 2));
            if (k > 0 && !(s.omega[k] > s.omega[k - 1]))
                throw ConfigError("extract.input", "omega must be strictly increasing");
        }
        source = cfg.extract_input;
    } else {
        s = polarisation_spectrum(p.sys, p.geom, ws.engine(p.bath, cfg.rates.route), SpectrumVariant::with_sideband,
                                  cfg.spectrum);
        source = "computed";
    }
    const ExtractionReport r = extract_parameters(s, p.sys.beta, p.bath, p.geom.solid_angle_factor, cfg.extract);

    io::Column c{"center", "eV", {}}, h{"hwhm", "eV", {}}, a{"area", "", {}}, lo{"region_lo", "eV", {}},
        hi{"region_hi", "eV", {}};
    json peaks = json::array();
    for (const auto& pk : r.peaks) {
        c.values.push_back(pk.center);
        h.values.push_back(pk.hwhm);
        a.values.push_back(pk.area);
        lo.values.push_back(pk.region.lo);
        hi.values.push_back(pk.region.hi);
        peaks.push_back({{"center", pk.center},
                         {"hwhm", pk.hwhm},
                         {"area", pk.area},
                         {"region", {pk.region.lo, pk.region.hi}}});
    }
    o.csv("extract_peaks.csv", {c, h, a, lo, hi});

    // Reference values from the configured parameters, for the tolerance flags.
    const double k2 = std::pow(kappa(p.bath, coupling_weights(p.geom).omega_deltadelta), 2);
    const double rho = thermal_excited_population(p.sys, std::sqrt(k2));
    json ref{{"kappa_sq", k2},
             {"rho_ee_inf", rho},
             {"epsilon", p.sys.epsilon},
             {"v", p.sys.drive_magnitude},
             {"d_delta", p.geom.d_delta}};
    auto flag = [](const std::optional<double>& v, double target, double tol) {
        return v ? json(std::abs(*v - target) <= tol) : json(nullptr);
    };
    json flags{{"kappa_sq", flag(r.kappa_sq, k2, 0.01)},
               {"rho_ee_inf", flag(r.rho_ee_inf, rho, 0.01)},
               {"epsilon", flag(r.epsilon_hat, p.sys.epsilon, 0.08)},
               {"v", flag(r.v_hat, p.sys.drive_magnitude, 0.5 * p.sys.drive_magnitude)},
               {"d_delta", flag(r.d_delta_hat, p.geom.d_delta, 0.01)}};
    json errs = json::array();
    for (const auto& e : r.errors) errs.push_back({{"field", e.first}, {"reason", e.second}});
    o.summary["results"] = json{{"source", source},
                                {"power", r.power},
                                {"kappa_sq", opt_json(r.kappa_sq)},
                                {"rho_ee_inf", opt_json(r.rho_ee_inf)},
                                {"eta_bar", opt_json(r.eta_bar)},
                                {"epsilon", opt_json(r.epsilon_hat)},
                                {"v", opt_json(r.v_hat)},
                                {"d_delta", opt_json(r.d_delta_hat)},
                                {"peaks", peaks},
                                {"reference", ref},
                                {"within_tolerance", flags},
                                {"errors", errs}};
}

// ---- oracle-validate -----------------------------------------------------------------------------

struct OracleRow {
    std::vector<std::array<cd, 3>> corr;  // quadrature, series, oracle per (kind, slot)
    std::array<SecularRates, 3> sec;
    double eta = 0;
};

const CorrKind kKinds[4] = {CorrKind::DagDot, CorrKind::DotDag, CorrKind::DagDag, CorrKind::DotDot};
const char* kind_name(CorrKind k) {
    switch (k) {
        case CorrKind::DagDot: return "dag-dot";
        case CorrKind::DotDag: return "dot-dag";
        case CorrKind::DagDag: return "dag-dag";
        case CorrKind::DotDot: return "dot-dot";
    }
    return "?";
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void run_oracle(Output& o, const Axis& axis) {
    const RunConfig& cfg = o.cfg;
    auto rows = parallel_map<OracleRow>(cfg, axis.values.size(), [&](std::size_t i, Workspace& ws) {
        const Point p = resolve(at_point(cfg, axis, i));
        const RateEngine& q = ws.engine(p.bath, Route::quadrature);
        const RateEngine& s = ws.engine(p.bath, Route::series);
        const QuadratureOracle& orc = ws.oracle(p.bath);
        OracleRow r;
        const Coupling cq = q.couple(p.sys, p.geom), cs = s.couple(p.sys, p.geom);
        r.eta = build_eigenframe(p.sys, std::sqrt(cq.kappa_sq)).eta;
        for (CorrKind k : kKinds)
            for (double w : {-r.eta, 0.0, r.eta})
                r.corr.push_back({q.corr_ft(k, w, cq).total(), s.corr_ft(k, w, cs).total(),
                                  orc.corr_ft(k, w, p.sys, p.geom).total()});
        r.sec = {q.secular_rates(p.sys, p.geom), s.secular_rates(p.sys, p.geom), orc.secular_rates(p.sys, p.geom)};
        return r;
    });

    std::vector<io::Column> cols;
    std::vector<std::string> kinds;
    if (!axis.parameter.empty()) cols.push_back({axis.parameter, unit_of(axis.parameter), {}});
    for (const char* n : {"omega", "re_quadrature", "im_quadrature", "re_series", "im_series", "re_oracle", "im_oracle",
                          "rel_err_quadrature", "rel_err_series"})
        cols.push_back({n, std::string(n).rfind("rel", 0) == 0 ? "" : "eV", {}});
    const std::size_t off = axis.parameter.empty() ? 0 : 1;
    double worst_q = 0, worst_s = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t j = 0;
        for (CorrKind k : kKinds)
            for (double w : {-rows[i].eta, 0.0, rows[i].eta}) {
                const auto& v = rows[i].corr[j++];
                if (off) cols[0].values.push_back(axis.values[i]);
                const double eq = rel(v[0], v[2]), es = rel(v[1], v[2]);
                const double vals[9] = {w, v[0].real(), v[0].imag(), v[1].real(), v[1].imag(), v[2].real(), v[2].imag(), eq, es};
                for (std::size_t c = 0; c < 9; ++c) cols[off + c].values.push_back(vals[c]);
                kinds.push_back(kind_name(k));
                worst_q = std::max(worst_q, eq);
                worst_s = std::max(worst_s, es);
            }
    }
    o.csv("oracle_corr.csv", cols, {{"kind", kinds}});

    std::vector<io::Column> rc;
    if (off) rc.push_back({axis.parameter, unit_of(axis.parameter), axis.values});
    double worst_rq = 0, worst_rs = 0;
    auto member = [](const SecularRates& s, int m) { return m == 0 ? s.gamma_down : m == 1 ? s.gamma_up : s.gamma_d; };
    const char* names[3] = {"gamma_down", "gamma_up", "gamma_d"};
    for (int m = 0; m < 3; ++m) {
        io::Column cq{std::string(names[m]) + "_quadrature", "eV", {}}, cs{std::string(names[m]) + "_series", "eV", {}},
            co{std::string(names[m]) + "_oracle", "eV", {}};
        for (const auto& r : rows) {
            cq.values.push_back(member(r.sec[0], m));
            cs.values.push_back(member(r.sec[1], m));
            co.values.push_back(member(r.sec[2], m));
            worst_rq = std::max(worst_rq, rel(member(r.sec[0], m), member(r.sec[2], m)));
            worst_rs = std::max(worst_rs, rel(member(r.sec[1], m), member(r.sec[2], m)));
        }
        rc.push_back(cq);
        rc.push_back(cs);
        rc.push_back(co);
    }
    o.csv("oracle_rates.csv", rc);

    Workspace ws(cfg);
    const QuadratureOracle& orc = ws.oracle(resolve(cfg).bath);
    o.summary["results"] = json{{"max_rel_err_corr_quadrature", worst_q},
                                {"max_rel_err_corr_series", worst_s},
                                {"max_rel_err_rates_quadrature", worst_rq},
                                {"max_rel_err_rates_series", worst_rs},
                                {"quadrature_within_0.1_percent", std::max(worst_q, worst_rq) < 1e-3},
                                {"series_within_1_percent", std::max(worst_s, worst_rs) < 1e-2},
                                {"oracle_kernel_error", orc.kernel_error()},
                                {"oracle_time_nodes", orc.nodes().size()}};
}

}  // namespace

std::vector<double> sweep_values(const RunConfig& cfg) { return resolve_axis(cfg).values; }

unsigned worker_threads() {
    if (const char* env = std::getenv("POLARON_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1 && n <= 1024) return static_cast<unsigned>(n);
        throw ConfigError("POLARON_THREADS", std::string("expected an integer in [1, 1024], got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<io::ManifestEntry> run(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("out", "output directory not set");
    const Axis axis = resolve_axis(cfg);
    for (std::size_t i = 0; i < axis.values.size(); ++i) resolve(at_point(cfg, axis, i));
    if (cfg.rates.omega_max <= 0.0 || cfg.rates.zero_plus <= 0.0 || cfg.rates.s_max < 0.0 || cfg.rates.ds < 0.0 ||
        !(cfg.rates.tail_tol > 0.0 && cfg.rates.tail_tol < 1.0))
        throw ConfigError("numerics", "omega_max, zero_plus > 0; s_max, ds >= 0; tail_tol in (0, 1)");
    if (!(cfg.stepper.rel_tol > 0.0) || !(cfg.stepper.abs_tol > 0.0))
        throw ConfigError("numerics", "rel_tol and abs_tol must be > 0");
    if (cfg.oracle.modes < 0 || cfg.oracle.modes > 8) throw ConfigError("oracle.modes", "must lie in [0, 8]");
    if (cfg.oracle.cutoff < 1) throw ConfigError("oracle.cutoff", "must be >= 1");
    if (!(cfg.extract.region_fwhm > 0.0)) throw ConfigError("extract.region_fwhm", "must be > 0");
    if (!(cfg.extract.min_peak_rel > 0.0 && cfg.extract.min_peak_rel < 1.0))
        throw ConfigError("extract.min_peak_rel", "must lie in (0, 1)");

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("out", "cannot create " + cfg.out_dir.string() + ": " + ec.message());

    Output o{cfg, cfg.out_dir, {}, json{}};
    o.summary["schema"] = kSchemaVersion;
    o.summary["version"] = kVersion;
    o.summary["scenario"] = to_string(cfg.scenario);
    o.summary["config"] = config_json(cfg);
    if (!axis.parameter.empty())
        o.summary["sweep"] = json{{"parameter", axis.parameter}, {"points", axis.values.size()},
                                  {"from", axis.values.front()}, {"to", axis.values.back()}};
    switch (cfg.scenario) {
        case Scenario::rates_sweep:
        case Scenario::phase_sweep: run_rates(o, axis, false); break;
        case Scenario::custom: run_rates(o, axis, true); break;
        case Scenario::dynamics_compare: run_dynamics(o); break;
        case Scenario::spectrum: run_spectrum(o); break;
        case Scenario::extract: run_extract(o); break;
        case Scenario::oracle_validate: run_oracle(o, axis); break;
    }
    if (!o.summary.contains("numerics")) {
        Workspace ws(cfg);
        o.summary["numerics"] = numerics_json(cfg, ws.engine(resolve(cfg).bath, cfg.rates.route));
    }
    io::write_text(o.dir / "summary.json", o.summary.dump(2) + "\n");
    o.files.push_back("summary.json");

    const auto entries = io::manifest(o.dir, o.files);
    json m = json::array();
    for (const auto& e : entries) m.push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    io::write_text(o.dir / "manifest.json", json{{"files", m}}.dump(2) + "\n");
    return entries;
}

// ---- entry point ---------------------------------------------------------------------------------

int main_entry(int argc, char** argv) {
    CLI::App app{"Polaron-frame optical master equation scenarios"};
    app.require_subcommand(1);
    std::string config, scenario, out;
    std::vector<std::string> sets;
    auto* run_cmd = app.add_subcommand("run", "Execute a scenario and write CSV/JSON/SVG artefacts");
    run_cmd->add_option("--config", config, "key = value configuration file");
    run_cmd->add_option("--scenario", scenario, "rates-sweep | phase-sweep | dynamics-compare | spectrum | extract | "
                                                "oracle-validate | custom");
    run_cmd->add_option("--out", out, "output directory")->required();
    run_cmd->add_option("--set", sets, "override a config key, key=value (repeatable)");
    auto* keys_cmd = app.add_subcommand("keys", "List config keys with units");

    auto report = [](const json& j, int code) {
        std::cerr << j.dump() << "\n";
        return code;
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report(json{{"status", "error"}, {"kind", "config"}, {"field", "argv"}, {"message", e.what()}}, 1);
    }
    if (keys_cmd->parsed()) {
        for (const auto& k : registry()) std::cout << k.key << (k.unit.empty() ? "" : " [" + k.unit + "]") << "\n";
        return 0;
    }
    try {
        RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + s + "'");
            set_key(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!scenario.empty()) cfg.scenario = parse_scenario(scenario);
        cfg.out_dir = out;
        const auto entries = run(cfg);
        std::cout << json{{"status", "ok"}, {"scenario", to_string(cfg.scenario)}, {"out", out}, {"files", entries.size()}, {"threads", worker_threads()}}.dump()
                  << "\n";
        return 0;
    } catch (const ConfigError& e) {
        return report(json{{"status", "error"}, {"kind", "config"}, {"field", e.field()}, {"message", e.what()}}, 1);
    } catch (const NumericsError& e) {
        return report(json{{"status", "error"},
                           {"kind", "numerics"},
                           {"module", e.module()},
                           {"message", e.what()},
                           {"achieved_error", e.achieved_error()}},
                      2);
    } catch (const fs::filesystem_error& e) {
        return report(json{{"status", "error"}, {"kind", "config"}, {"field", "out"}, {"message", e.what()}}, 1);
    } catch (const std::exception& e) {
        return report(json{{"status", "error"}, {"kind", "numerics"}, {"module", "internal"}, {"message", e.what()}}, 2);
    }
}

}  // namespace polaron::cli
