// dynamics.cpp — closed-form secular solution, adaptive and exponential non-secular propagation
#include "polaron/dynamics.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace polaron {
namespace {

using State = std::array<double, 4>;

void check_grid(const std::vector<double>& t) {
    if (t.empty()) throw ConfigError("t_grid", "must not be empty");
    if (t.front() < 0.0) throw ConfigError("t_grid", "must start at t >= 0");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw ConfigError("t_grid", "must be strictly increasing");
}

State pack(const DensityMatrix& rho) {
    if (rho.basis != Basis::eigen) throw ConfigError("rho0", "non-secular evolution expects the eigenbasis");
    return {rho.m(0, 0).real(), rho.m(1, 1).real(), rho.m(0, 1).real(), rho.m(0, 1).imag()};
}

DensityMatrix unpack(const State& x) {
    DensityMatrix r;
    r.basis = Basis::eigen;
    r.m(0, 0) = x[0];
    r.m(1, 1) = x[1];
    r.m(0, 1) = cd(x[2], x[3]);
    r.m(1, 0) = cd(x[2], -x[3]);
    return r;
}

}  // namespace

const char* to_string(Equation e) {
    switch (e) {
        case Equation::pfme_secular: return "PFME-secular";
        case Equation::pfme_nonsecular: return "PFME-nonsecular";
        case Equation::dfme_nonsecular: return "DFME-nonsecular";
        case Equation::exact: return "exact-oracle";
    }
    return "?";
}

const char* to_string(FrameTag f) { return f == FrameTag::polaron ? "polaron" : "lab"; }

DensityMatrix ground_state() {
    DensityMatrix r;
    r.basis = Basis::bare;
    r.m(1, 1) = 1.0;
    return r;
}

Eigen::Matrix2cd eigen_to_bare(const EigenFrame& frame, double drive_phase) {
    const double c = frame.cos_half(), s = frame.sin_half();
    const cd ph = std::polar(1.0, drive_phase);
    Eigen::Matrix2cd u;
    u << c, -s * ph, s * std::conj(ph), c;
    return u;
}

DensityMatrix to_bare(const DensityMatrix& rho, const EigenFrame& frame, double drive_phase) {
    if (rho.basis == Basis::bare) return rho;
    const Eigen::Matrix2cd u = eigen_to_bare(frame, drive_phase);
    return {u * rho.m * u.adjoint(), Basis::bare};
}

DensityMatrix to_eigen(const DensityMatrix& rho, const EigenFrame& frame, double drive_phase) {
    if (rho.basis == Basis::eigen) return rho;
    const Eigen::Matrix2cd u = eigen_to_bare(frame, drive_phase);
    return {u.adjoint() * rho.m * u, Basis::eigen};
}

Eigen::Matrix4d nonsecular_generator(const SecularRates& s, const NonSecularRates& n) {
    // d rho_++ = -g_dn rho_++ + g_up rho_-- + 2 Re(conj(gbar) x)
    // d x      = -(g_d + i eta_bar) x + k1 conj(x) + k_- rho_-- + conj(k_+) rho_++
    const double gr = n.gamma_bar.real(), gi = n.gamma_bar.imag();
    const cd kp = std::conj(n.k_plus), km = n.k_minus, k1 = n.k_1;
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    L(0, 0) = -s.gamma_down;
    L(0, 1) = s.gamma_up;
    L(0, 2) = 2.0 * gr;
    L(0, 3) = 2.0 * gi;
    L.row(1) = -L.row(0);
    // x = a + i b; (k1 conj x) = (k1r a + k1i b) + i (k1i a - k1r b)
    L(2, 0) = kp.real();
    L(2, 1) = km.real();
    L(2, 2) = -s.gamma_d + k1.real();
    L(2, 3) = s.eta_bar + k1.imag();
    L(3, 0) = kp.imag();
    L(3, 1) = km.imag();
    L(3, 2) = -s.eta_bar + k1.imag();
    L(3, 3) = -s.gamma_d - k1.real();
    return L;
}

Trajectory evolve_secular(const DensityMatrix& rho0, const SecularRates& r, const std::vector<double>& t_grid) {
    check_grid(t_grid);
    if (rho0.basis != Basis::eigen) throw ConfigError("rho0", "secular evolution expects the eigenbasis");
    Trajectory out;
    out.equation = Equation::pfme_secular;
    out.t = t_grid;
    const double p0 = rho0.m(0, 0).real(), q0 = rho0.m(1, 1).real();
    const double total = p0 + q0;
    const double g = r.gamma_up + r.gamma_down;
    const double pinf = g > 0.0 ? total * r.gamma_up / g : p0;
    const cd x0 = rho0.m(0, 1);
    for (double t : t_grid) {
        const double p = g > 0.0 ? pinf + (p0 - pinf) * std::exp(-g * t) : p0;
        const cd x = x0 * std::exp(cd(-r.gamma_d * t, -r.eta_bar * t));
        DensityMatrix d;
        d.basis = Basis::eigen;
        d.m(0, 0) = p;
        d.m(1, 1) = total - p;
        d.m(0, 1) = x;
        d.m(1, 0) = std::conj(x);
        out.rho.push_back(d);
    }
    return out;
}

Trajectory evolve_nonsecular(const DensityMatrix& rho0, const SecularRates& s, const NonSecularRates& n,
                             const std::vector<double>& t_grid, Equation eq, StepperOptions opt) {
    check_grid(t_grid);
    if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw ConfigError("stepper", "tolerances must be > 0");
    const Eigen::Matrix4d L = nonsecular_generator(s, n);
    const State x0 = pack(rho0);
    Trajectory out;
    out.equation = eq;
    out.t = t_grid;

    if (opt.integrator == Integrator::matrix_exponential) {
        const Eigen::Vector4d v0(x0[0], x0[1], x0[2], x0[3]);
        for (double t : t_grid) {
            const Eigen::Matrix4d step = (L * t).exp();
            const Eigen::Vector4d v = step * v0;
            out.rho.push_back(unpack({v[0], v[1], v[2], v[3]}));
        }
        return out;
    }

    namespace ode = boost::numeric::odeint;
    auto rhs = [&L](const State& x, State& dx, double) {
        for (int i = 0; i < 4; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 4; ++j) acc += L(i, j) * x[static_cast<std::size_t>(j)];
            dx[static_cast<std::size_t>(i)] = acc;
        }
    };
    // Initial step from the fastest generator scale; the controller adapts from there.
    const double scale = std::max(L.cwiseAbs().maxCoeff(), 1e-300);
    const double dt0 = std::min(0.05 / scale, t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 1.0);
    State x = x0;
    std::vector<State> samples;
    try {
        auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
        std::vector<double> times = t_grid;
        if (times.front() > 0.0) times.insert(times.begin(), 0.0);
        ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), dt0,
                             [&](const State& xs, double) { samples.push_back(xs); });
        if (t_grid.front() > 0.0) samples.erase(samples.begin());
    } catch (const std::exception& e) {
        throw NumericsError("dynamics", std::string("stepper failure: ") + e.what(), opt.rel_tol);
    }
    if (samples.size() != t_grid.size()) throw NumericsError("dynamics", "stepper returned a short trajectory", opt.rel_tol);
    for (const auto& xs : samples) {
        for (double v : xs)
            if (!std::isfinite(v)) throw NumericsError("dynamics", "non-finite state", opt.rel_tol);
        out.rho.push_back(unpack(xs));
    }
    return out;
}

Trajectory to_basis(const Trajectory& traj, Basis target, const EigenFrame& frame, double drive_phase) {
    Trajectory out = traj;
    for (auto& r : out.rho) r = target == Basis::bare ? to_bare(r, frame, drive_phase) : to_eigen(r, frame, drive_phase);
    return out;
}

Trajectory to_lab_frame(const Trajectory& traj, double kappa) {
    if (traj.frame != FrameTag::polaron) throw ConfigError("trajectory", "already in the lab frame");
    Trajectory out = traj;
    out.frame = FrameTag::lab;
    for (auto& r : out.rho) {
        if (r.basis != Basis::bare) throw ConfigError("trajectory", "lab map needs the bare basis");
        r.m(0, 1) *= kappa;
        r.m(1, 0) *= kappa;
    }
    return out;
}

Trajectory simulate(Equation eq, const RateEngine& engine, const SystemParams& sys, const DipoleGeometry& geom,
                    const DensityMatrix& rho0_bare, const std::vector<double>& t_grid, StepperOptions opt) {
    const RateTable table = eq == Equation::dfme_nonsecular ? engine.dfme_table(sys, geom) : engine.rate_table(sys, geom);
    const DensityMatrix r0 = to_eigen(rho0_bare, table.frame, sys.drive_phase);
    Trajectory tr = eq == Equation::pfme_secular
                        ? evolve_secular(r0, table.secular(), t_grid)
                        : evolve_nonsecular(r0, table.secular(), table.nonsecular(), t_grid, eq, opt);
    tr.frame = eq == Equation::dfme_nonsecular ? FrameTag::lab : FrameTag::polaron;
    return to_basis(tr, Basis::bare, table.frame, sys.drive_phase);
}

double thermal_excited_population(const SystemParams& sys, double kappa) {
    const EigenFrame fr = build_eigenframe(sys, kappa);
    return 0.5 * (1.0 - sys.epsilon / fr.eta * std::tanh(0.5 * sys.beta * fr.eta));
}

DensityMatrix steady_state(const SystemParams& sys, const DipoleGeometry& geom, const RateEngine& engine,
                           SteadyMode mode) {
    validate(sys);
    const double k = kappa(engine.bath(), coupling_weights(geom).omega_deltadelta);
    const EigenFrame fr = build_eigenframe(sys, k);
    DensityMatrix e;
    e.basis = Basis::eigen;
    if (mode == SteadyMode::thermal) {
        // p_+ = e^{-beta eta/2}/Z = (1 - tanh(beta eta/2))/2
        const double p = 0.5 * (1.0 - std::tanh(0.5 * sys.beta * fr.eta));
        e.m(0, 0) = p;
        e.m(1, 1) = 1.0 - p;
    } else {
        const SecularRates r = engine.secular_rates(sys, geom);
        const double g = r.gamma_up + r.gamma_down;
        if (!(g > 0.0)) throw NumericsError("dynamics", "rate-ratio steady state undefined for vanishing rates", 0.0);
        e.m(0, 0) = r.gamma_up / g;
        e.m(1, 1) = r.gamma_down / g;
    }
    return to_bare(e, fr, sys.drive_phase);
}

}  // namespace polaron
