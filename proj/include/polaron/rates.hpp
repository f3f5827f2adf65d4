// rates.hpp — Fourier-transformed correlation functions and the secular/non-secular rate sets
#pragma once

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/model.hpp"

namespace polaron {

enum class Route { series, quadrature };
enum class CorrKind { DagDot, DotDag, DagDag, DotDot };

// Index order used by every alpha/beta table: 0 = z, 1 = +, 2 = -.
enum class Channel { z = 0, plus = 1, minus = 2 };

struct RateComponent {
    cd one_photon = 0.0;
    cd two_photon = 0.0;
    cd drive_one = 0.0;
    cd drive_zero = 0.0;
    cd total() const { return one_photon + two_photon + drive_one + drive_zero; }
};

struct SecularRates {
    double gamma_down = 0.0;
    double gamma_up = 0.0;
    double gamma_d = 0.0;
    double eta_bar = 0.0;
    double eta = 0.0;
};

struct NonSecularRates {
    cd gamma_bar = 0.0;
    cd k_1 = 0.0;
    cd k_plus = 0.0;
    cd k_minus = 0.0;
};

// Gamma_{alpha beta} at omega = -eta, 0, +eta (slots 0, 1, 2).
struct RateTable {
    EigenFrame frame;
    std::array<std::array<std::array<cd, 3>, 3>, 3> g{};
    cd at(Channel a, Channel b, int slot) const { return g[static_cast<std::size_t>(slot)][static_cast<int>(a)][static_cast<int>(b)]; }
    SecularRates secular() const;
    NonSecularRates nonsecular() const;
};

struct RateOptions {
    Route route = Route::quadrature;
    double s_max = 0.0;  // 0 selects 400 max(1/nu_c, beta)
    double ds = 0.0;     // 0 selects min(0.02 min(1/nu_c, beta), 0.1/omega_max)
    double omega_max = 4.0;
    double zero_plus = 1e-6;
    double tail_tol = 1e-10;
};

// Quantities fixed by (sys, geom) and shared by every channel: kappa^2, the
// drive/dipole cross amplitude and the tabulated remainders of each transform.
struct Coupling {
    CouplingWeights w;
    double phi0 = 0.0;
    double kappa_sq = 1.0;
    double v = 0.0;                 // |V|
    double vartheta = 0.0;          // theta_mu - theta_V
    double cos_theta = 1.0;         // cos theta_{mu Delta}
    double cross = 0.0;             // 2 Omega_{mu Delta} cos theta_{mu Delta}
    LineSpectrum lines_plus, lines_minus;
    // kappa^2-weighted remainders on the s-grid; each decays at least as s^-4.
    std::vector<cd> r1p, r1m, t2p, t2m, rv1, rv0p, rv0m;
};

class RateEngine {
public:
    explicit RateEngine(const BathSpec& bath, RateOptions opt = {});

    const BathSpec& bath() const { return bath_; }
    const RateOptions& options() const { return opt_; }
    const BathTable& table() const { return table_; }

    Coupling couple(const SystemParams& sys, const DipoleGeometry& geom) const;

    cd gamma_some(double w, const CouplingWeights& cw) const;
    // Without the e^{-+2i theta} phase of the minus family; corr_ft attaches it.
    cd gamma_1(double w, int sign, double omega_ab, const Coupling& c) const;
    cd gamma_2(double w, int sign, const Coupling& c) const;
    // sign -1 vanishes identically; orientation -1 is the <C(s) C^dag(0)> ordering.
    cd gamma_v1(double w, int sign, int orientation, const Coupling& c) const;
    cd gamma_v0(double w, int sign, const Coupling& c) const;

    RateComponent corr_ft(CorrKind kind, double w, const Coupling& c) const;

    cd gamma_alpha_beta(Channel a, Channel b, double w, const EigenFrame& frame, const Coupling& c) const;

    RateTable rate_table(const SystemParams& sys, const DipoleGeometry& geom) const;
    RateTable dfme_table(const SystemParams& sys, const DipoleGeometry& geom) const;

    SecularRates secular_rates(const SystemParams& sys, const DipoleGeometry& geom) const;
    NonSecularRates nonsecular_rates(const SystemParams& sys, const DipoleGeometry& geom) const;

    // Unit-weight thermal transforms, cached per frequency.
    cd transform(Moment m, double w) const;
    // int_0^inf ds e^{i w s - 0+ s} g(s) on the engine grid (composite Simpson).
    cd half_line(const std::vector<cd>& g, double w) const;

private:
    BathSpec bath_;
    RateOptions opt_;
    BathTable table_;
    mutable std::map<std::pair<int, double>, cd> cache_;
};

// Table coefficients of g_alpha = a_alpha C + b_alpha C^dag.
std::array<double, 2> channel_coefficients(Channel a, const EigenFrame& frame);

}  // namespace polaron
