// bath.hpp — super-ohmic photon bath: spectral density, propagator, kappa, single-mode lines
#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace polaron {

using cd = std::complex<double>;

// J(nu) = S nu^3 / nu_c^2 exp(-nu/nu_c) for nu > 0.
struct BathSpec {
    double huang_rhys = 1.0 / 3.14159265358979323846;
    double cutoff = 1.0;
    double beta = 2.0;
};

void validate(const BathSpec& bath);

double spectral_density(double nu, const BathSpec& bath);
double bose(double nu, double beta);  // N(nu); diverges as 1/(beta nu) at 0
double reorganisation_energy(const BathSpec& bath);

// Adaptive Gauss-Kronrod on [0, 40 nu_c]. Oscillatory at large s; prefer bath_functions there.
cd propagator_phi(double s, const BathSpec& bath, double omega_dd);
double phi_zero(const BathSpec& bath, double omega_dd);
double kappa(const BathSpec& bath, double omega_dd);

// Unit-coupling time-domain kernels, evaluated from the Bose series in closed form:
//   p(s) = phi(s) / (4 Omega_DD)
//   i(s) = int J (Nt e^{-i nu s} + N e^{i nu s})
//   f(s) = int J/nu (Nt e^{-i nu s} - N e^{i nu s})
struct BathFunctions {
    cd p, i, f;
};
BathFunctions bath_functions(double s, const BathSpec& bath);

// Uniform s-grid tabulation of bath_functions; immutable after construction.
struct BathTable {
    double ds = 0.0;
    std::vector<double> s;
    std::vector<cd> p, i, f;
    std::size_t size() const { return s.size(); }
};
BathTable tabulate(const BathSpec& bath, double s_max, double ds);

// Half-line transform int_0^inf ds e^{i w s} int_0^inf dnu h(nu) [Nt e^{-i nu s} + sigma N e^{i nu s}]
// for h = J (sigma=+1), J/nu (sigma=-1), J/nu^2 (sigma=+1). Real part is the golden-rule delta
// contribution, imaginary part the principal value by pole subtraction.
enum class Moment { J, JOverNu, JOverNu2 };
cd thermal_transform(Moment m, double w, const BathSpec& bath);

struct TruncationMode {
    double nu_s = 0.0;
    double S_s = 0.0;
    int sign = +1;
    double mu1 = 0.0;
    double mu2 = 0.0;
    bool empty() const { return S_s <= 0.0; }
};
TruncationMode truncation_mode(const BathSpec& bath, double omega_dd, int sign = +1);

// A_l for l in [-l_max, l_max]; weights[l + l_max].
struct LineSpectrum {
    int l_max = 0;
    double nu_s = 0.0;
    int sign = +1;
    std::vector<double> weights{1.0};

    double at(int l) const;
    double total() const;
};
LineSpectrum line_weights(const TruncationMode& mode, double beta, double tail_tol = 1e-10);

// K(eps) = sum_l A_l [pi delta(eps - l nu_s) + i P 1/(eps - l nu_s)].
struct SidebandKernel {
    std::vector<std::pair<double, double>> lines;  // (position, weight)

    double delta_weight_at(double eps, double tol = 1e-12) const;
    double pv_part(double eps) const;
};
SidebandKernel sideband_kernel(const LineSpectrum& lines);

}  // namespace polaron
