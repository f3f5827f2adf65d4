// bath.cpp — spectral density integrals, Bose-series kernels and single-mode line weights
#include "polaron/bath.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numeric>

#include "polaron/model.hpp"

namespace polaron {
namespace {

constexpr double kNuMaxFactor = 40.0;
constexpr double kQuadTol = 1e-10;
constexpr unsigned kQuadDepth = 18;

template <class F>
double gk(F f, double a, double b, const char* what) {
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, kQuadDepth, kQuadTol, &err);
    double scale = std::max(std::abs(v), 1e-300);
    if (!std::isfinite(v) || err > 1e-6 * scale + 1e-14) throw NumericsError("bath", what, err);
    return v;
}

// 1 + 2N(nu) = coth(beta nu / 2), with the small-argument series.
double coth_half(double nu, double beta) {
    double x = beta * nu;
    if (x < 1e-4) return 2.0 / x + x / 6.0;
    return 1.0 / std::tanh(0.5 * x);
}

// sum_{k>=1} (z + k beta)^{-p}: direct terms then an Euler-Maclaurin tail.
cd bose_tail(int p, cd z, double beta) {
    constexpr int K = 24;
    cd sum = 0.0;
    for (int k = 1; k < K; ++k) sum += std::pow(z + double(k) * beta, -p);
    const cd u = z + double(K) * beta;
    const cd inv = 1.0 / u;
    const cd up = std::pow(inv, p);
    const double pp = p;
    cd tail = u * up / ((pp - 1.0) * beta) + 0.5 * up;
    // -B2/2! f' + ... with f^(n) = (-1)^n p(p+1)...(p+n-1) beta^n u^{-p-n}
    const double b = beta;
    tail += (1.0 / 12.0) * pp * b * up * inv;
    tail -= (1.0 / 720.0) * pp * (pp + 1) * (pp + 2) * b * b * b * up * inv * inv * inv;
    tail += (1.0 / 30240.0) * pp * (pp + 1) * (pp + 2) * (pp + 3) * (pp + 4) * std::pow(b, 5) * up * std::pow(inv, 5);
    return sum + tail;
}

double moment(const BathSpec& bath, double power) {
    const double L = kNuMaxFactor * bath.cutoff;
    return gk([&](double nu) { return spectral_density(nu, bath) * std::pow(nu, power); }, 0.0, L, "moment");
}

}  // namespace

void validate(const BathSpec& bath) {
    if (!std::isfinite(bath.huang_rhys) || bath.huang_rhys < 0.0) throw ConfigError("huang_rhys", "must be >= 0");
    if (!std::isfinite(bath.cutoff) || bath.cutoff <= 0.0) throw ConfigError("cutoff", "must be > 0");
    if (!std::isfinite(bath.beta) || bath.beta <= 0.0) throw ConfigError("beta", "must be > 0");
}

double spectral_density(double nu, const BathSpec& bath) {
    if (nu <= 0.0) return 0.0;
    const double x = nu / bath.cutoff;
    return bath.huang_rhys * nu * x * x * std::exp(-x);
}

double bose(double nu, double beta) { return 1.0 / std::expm1(beta * nu); }

double reorganisation_energy(const BathSpec& bath) { return 2.0 * bath.cutoff * bath.huang_rhys; }

cd propagator_phi(double s, const BathSpec& bath, double omega_dd) {
    if (omega_dd == 0.0 || bath.huang_rhys == 0.0) return 0.0;
    const double L = kNuMaxFactor * bath.cutoff;
    auto w = [&](double nu) { return spectral_density(nu, bath) / (nu * nu); };
    double re = gk([&](double nu) { return w(nu) * coth_half(nu, bath.beta) * std::cos(nu * s); }, 0.0, L, "phi real");
    double im = s == 0.0 ? 0.0 : -gk([&](double nu) { return w(nu) * std::sin(nu * s); }, 0.0, L, "phi imag");
    return 4.0 * omega_dd * cd(re, im);
}

double phi_zero(const BathSpec& bath, double omega_dd) { return propagator_phi(0.0, bath, omega_dd).real(); }

double kappa(const BathSpec& bath, double omega_dd) { return std::exp(-0.5 * phi_zero(bath, omega_dd)); }

BathFunctions bath_functions(double s, const BathSpec& bath) {
    const double a0 = 1.0 / bath.cutoff;
    const double pref = bath.huang_rhys / (bath.cutoff * bath.cutoff);
    const cd zp(a0, s), zm(a0, -s);
    BathFunctions out;
    out.p = pref * (std::pow(zp, -2) + bose_tail(2, zp, bath.beta) + bose_tail(2, zm, bath.beta));
    out.i = 6.0 * pref * (std::pow(zp, -4) + bose_tail(4, zp, bath.beta) + bose_tail(4, zm, bath.beta));
    out.f = 2.0 * pref * (std::pow(zp, -3) + bose_tail(3, zp, bath.beta) - bose_tail(3, zm, bath.beta));
    return out;
}

BathTable tabulate(const BathSpec& bath, double s_max, double ds) {
    if (!(ds > 0.0) || !(s_max > ds)) throw ConfigError("s_grid", "need 0 < ds < s_max");
    std::size_t n = static_cast<std::size_t>(std::ceil(s_max / ds));
    if (n % 2) ++n;  // even panel count for Simpson
    BathTable t;
    t.ds = ds;
    t.s.resize(n + 1);
    t.p.resize(n + 1);
    t.i.resize(n + 1);
    t.f.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = ds * double(k);
        const BathFunctions b = bath_functions(s, bath);
        t.s[k] = s;
        t.p[k] = b.p;
        t.i[k] = b.i;
        t.f[k] = b.f;
    }
    return t;
}

cd thermal_transform(Moment m, double w, const BathSpec& bath) {
    const double beta = bath.beta;
    const double sigma = m == Moment::JOverNu ? -1.0 : 1.0;
    auto h = [&](double nu) {
        const double j = spectral_density(nu, bath);
        switch (m) {
            case Moment::J: return j;
            case Moment::JOverNu: return j / nu;
            case Moment::JOverNu2: return j / (nu * nu);
        }
        return 0.0;
    };
    auto hN = [&](double nu) { return h(nu) * bose(nu, beta); };
    auto hNt = [&](double nu) { return h(nu) * (bose(nu, beta) + 1.0); };

    const double x = std::abs(w);
    const double L = kNuMaxFactor * bath.cutoff;
    double re = 0.0;
    if (x < 1e-12) {
        const double nu0 = 1e-9 * bath.cutoff;
        re = 0.5 * kPi * (hNt(nu0) + sigma * hN(nu0));
    } else if (w > 0.0) {
        re = kPi * hNt(x);
    } else {
        re = kPi * sigma * hN(x);
    }

    // P int_0^L h [Nt/(w - nu) + sigma N/(w + nu)]; singular piece f(nu)/(x - nu).
    auto g = [&](double nu) { return hNt(nu) / (w - nu) + sigma * hN(nu) / (w + nu); };
    double im = 0.0;
    if (x < 1e-12 || x >= L) {
        im = gk(g, 0.0, L, "principal value");
    } else {
        auto fsing = [&](double nu) { return w > 0.0 ? hNt(nu) : -sigma * hN(nu); };
        const double fx = fsing(x);
        auto reg = [&](double nu) { return g(nu) - fx / (x - nu); };
        im = gk(reg, 0.0, x, "principal value") + gk(reg, x, L, "principal value") + fx * std::log(x / (L - x));
    }
    return {re, im};
}

TruncationMode truncation_mode(const BathSpec& bath, double omega_dd, int sign) {
    TruncationMode mode;
    mode.sign = sign >= 0 ? +1 : -1;
    if (omega_dd <= 0.0 || bath.huang_rhys <= 0.0) return mode;
    mode.mu1 = 4.0 * omega_dd * moment(bath, -1.0);
    mode.mu2 = 4.0 * omega_dd * moment(bath, 0.0);
    mode.nu_s = mode.mu2 / mode.mu1;
    mode.S_s = mode.mu1 * mode.mu1 / mode.mu2;
    return mode;
}

double LineSpectrum::at(int l) const {
    if (l < -l_max || l > l_max) return 0.0;
    return weights[static_cast<std::size_t>(l + l_max)];
}

double LineSpectrum::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

LineSpectrum line_weights(const TruncationMode& mode, double beta, double tail_tol) {
    if (!(tail_tol > 0.0)) throw ConfigError("tail_tol", "must be > 0");
    LineSpectrum out;
    out.sign = mode.sign;
    out.nu_s = mode.nu_s;
    if (mode.empty()) return out;

    const double S = mode.S_s;
    const double bn = beta * mode.nu_s;
    const bool cold = bn > 700.0;
    const double N = cold ? 0.0 : bose(mode.nu_s, beta);
    // A_l = exp(-S(2N+1)) ((N+1)/N)^{l/2} I_l(2 S sqrt(N(N+1))); Poisson when N = 0.
    auto weight = [&](int l) -> double {
        if (cold) {
            if (l < 0) return 0.0;
            return std::exp(-S + l * std::log(S) - std::lgamma(l + 1.0));
        }
        const double z = 2.0 * S * std::sqrt(N * (N + 1.0));
        const double lr = 0.5 * l * (std::log1p(N) - std::log(N));
        const double bess = boost::math::cyl_bessel_i(std::abs(l), z);
        if (bess == 0.0) return 0.0;
        return std::exp(-S * (2.0 * N + 1.0) + lr + std::log(bess));
    };

    constexpr int kLimit = 4000;
    std::vector<double> pos{weight(0)}, neg;
    double mass = pos[0];
    int l = 0;
    while (1.0 - mass > tail_tol) {
        ++l;
        if (l > kLimit) throw NumericsError("bath", "line weights did not converge", 1.0 - mass);
        pos.push_back(weight(l));
        neg.push_back(weight(-l));
        mass += pos.back() + neg.back();
    }
    out.l_max = l;
    out.weights.assign(static_cast<std::size_t>(2 * l + 1), 0.0);
    for (int k = 0; k <= l; ++k) out.weights[static_cast<std::size_t>(l + k)] = pos[static_cast<std::size_t>(k)];
    for (int k = 1; k <= l; ++k) out.weights[static_cast<std::size_t>(l - k)] = neg[static_cast<std::size_t>(k - 1)];
    if (out.sign < 0)
        for (int k = -l; k <= l; ++k)
            if (k % 2) out.weights[static_cast<std::size_t>(l + k)] *= -1.0;
    return out;
}

double SidebandKernel::delta_weight_at(double eps, double tol) const {
    double w = 0.0;
    for (const auto& [pos, a] : lines)
        if (std::abs(eps - pos) <= tol) w += a;
    return w;
}

double SidebandKernel::pv_part(double eps) const {
    double v = 0.0;
    for (const auto& [pos, a] : lines)
        if (eps != pos) v += a / (eps - pos);
    return v;
}

SidebandKernel sideband_kernel(const LineSpectrum& lines) {
    SidebandKernel k;
    for (int l = -lines.l_max; l <= lines.l_max; ++l) {
        const double a = lines.at(l);
        if (a != 0.0) k.lines.emplace_back(l * lines.nu_s, a);
    }
    return k;
}

}  // namespace polaron
