// rates.cpp — correlation transforms by analytic split plus tabulated remainder, and rate assembly
#include "polaron/rates.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace polaron {
namespace {

// cos theta with the rounding residue of the nearest doubles to pi/2 and 3pi/2 removed.
double dipole_cosine(double theta) {
    const double a = wrap_angle(theta);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * kTwoPi;
    if (std::abs(a - 0.5 * kPi) <= tol || std::abs(a - 1.5 * kPi) <= tol) return 0.0;
    return std::cos(a);
}

std::array<double, 3> slot_frequencies(double eta) { return {-eta, 0.0, eta}; }

}  // namespace

std::array<double, 2> channel_coefficients(Channel a, const EigenFrame& frame) {
    const double c = frame.cos_half();
    const double s = frame.sin_half();
    switch (a) {
        case Channel::minus: return {-s * s, c * c};
        case Channel::plus: return {c * c, -s * s};
        case Channel::z: return {s * c, s * c};
    }
    return {0.0, 0.0};
}

SecularRates RateTable::secular() const {
    SecularRates r;
    r.eta = frame.eta;
    const cd down = at(Channel::minus, Channel::minus, 2);
    const cd up = at(Channel::plus, Channel::plus, 0);
    r.gamma_down = 2.0 * down.real();
    r.gamma_up = 2.0 * up.real();
    r.gamma_d = 0.5 * (r.gamma_up + r.gamma_down) + 4.0 * at(Channel::z, Channel::z, 1).real();
    r.eta_bar = frame.eta + (down - up).imag();
    return r;
}

NonSecularRates RateTable::nonsecular() const {
    using C = Channel;
    NonSecularRates n;
    n.gamma_bar = at(C::minus, C::z, 1) + std::conj(at(C::plus, C::z, 1));
    n.k_1 = at(C::minus, C::plus, 0) + std::conj(at(C::plus, C::minus, 2));
    n.k_plus = -at(C::plus, C::z, 1) + std::conj(at(C::minus, C::z, 1)) + 2.0 * at(C::z, C::minus, 2);
    n.k_minus = at(C::minus, C::z, 1) - std::conj(at(C::plus, C::z, 1)) - 2.0 * at(C::z, C::plus, 0);
    return n;
}

RateEngine::RateEngine(const BathSpec& bath, RateOptions opt) : bath_(bath), opt_(opt) {
    validate(bath_);
    if (!(opt_.omega_max > 0.0)) throw ConfigError("omega_max", "must be > 0");
    if (!(opt_.zero_plus >= 0.0)) throw ConfigError("zero_plus", "must be >= 0");
    const double tau = std::min(1.0 / bath_.cutoff, bath_.beta);
    if (opt_.s_max <= 0.0) opt_.s_max = 400.0 * std::max(1.0 / bath_.cutoff, bath_.beta);
    if (opt_.ds <= 0.0) opt_.ds = std::min(0.02 * tau, 0.1 / opt_.omega_max);
    table_ = tabulate(bath_, opt_.s_max, opt_.ds);
}

cd RateEngine::transform(Moment m, double w) const {
    const auto key = std::make_pair(static_cast<int>(m), w);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const cd v = thermal_transform(m, w, bath_);
    cache_.emplace(key, v);
    return v;
}

cd RateEngine::half_line(const std::vector<cd>& g, double w) const {
    if (g.empty()) return 0.0;
    const std::size_t n = g.size() - 1;  // even
    const double h = table_.ds;
    const cd step = std::exp(cd(-opt_.zero_plus * h, w * h));
    cd ph = 1.0;
    cd odd = 0.0, even = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        if ((k & 1023u) == 0) ph = std::exp(cd(-opt_.zero_plus * h * double(k), w * h * double(k)));
        else ph *= step;
        if (k & 1u) odd += g[k] * ph;
        else even += g[k] * ph;
    }
    const cd last = g[n] * std::exp(cd(-opt_.zero_plus * h * double(n), w * h * double(n)));
    return h / 3.0 * (g[0] + 4.0 * odd + 2.0 * even + last);
}

Coupling RateEngine::couple(const SystemParams& sys, const DipoleGeometry& geom) const {
    validate(geom);
    Coupling c;
    c.w = coupling_weights(geom);
    const double odd = c.w.omega_deltadelta;
    c.phi0 = 4.0 * odd * table_.p[0].real();
    c.kappa_sq = std::exp(-c.phi0);
    c.v = sys.drive_magnitude;
    c.vartheta = relative_phase(sys, geom);
    c.cos_theta = dipole_cosine(geom.theta_mu_delta);
    c.cross = 2.0 * c.w.omega_mudelta * c.cos_theta;
    if (opt_.route == Route::series) {
        c.lines_plus = line_weights(truncation_mode(bath_, odd, +1), bath_.beta, opt_.tail_tol);
        c.lines_minus = line_weights(truncation_mode(bath_, odd, -1), bath_.beta, opt_.tail_tol);
    }
    if (odd == 0.0 || bath_.huang_rhys == 0.0) return c;

    const std::size_t n = table_.size();
    for (auto* v : {&c.r1p, &c.r1m, &c.t2p, &c.t2m, &c.rv1, &c.rv0p, &c.rv0m}) v->resize(n);
    const double k2 = c.kappa_sq;
    const bool small = c.phi0 < 50.0;
    for (std::size_t k = 0; k < n; ++k) {
        const cd phi = 4.0 * odd * table_.p[k];
        const cd ep = std::exp(phi - c.phi0);  // kappa^2 e^{phi}
        const cd em = std::exp(-phi - c.phi0);
        // kappa^2 (e^{+-phi} - 1) and kappa^2 (e^{+-phi} - 1 -+ phi), cancellation-safe when kappa ~ 1
        cd xp, xm, yp, ym;
        if (small) {
            const cd e1p = std::exp(phi) - 1.0, e1m = std::exp(-phi) - 1.0;
            xp = k2 * e1p;
            xm = k2 * e1m;
            const bool tiny = std::abs(phi) < 1e-3;
            const cd q2 = phi * phi * (0.5 + phi / 6.0 + phi * phi / 24.0 + phi * phi * phi / 120.0);
            const cd q2m = phi * phi * (0.5 - phi / 6.0 + phi * phi / 24.0 - phi * phi * phi / 120.0);
            yp = k2 * (tiny ? q2 : e1p - phi);
            ym = k2 * (tiny ? q2m : e1m + phi);
        } else {
            xp = ep - k2;
            xm = em - k2;
            yp = ep - k2 * (1.0 + phi);
            ym = em - k2 * (1.0 - phi);
        }
        const cd I = table_.i[k], F = table_.f[k];
        c.r1p[k] = xp * I;
        c.r1m[k] = xm * I;
        c.t2p[k] = ep * F * F;
        c.t2m[k] = em * F * F;
        c.rv1[k] = xp * F;
        c.rv0p[k] = yp;
        c.rv0m[k] = ym;
    }
    return c;
}

cd RateEngine::gamma_some(double w, const CouplingWeights& cw) const { return cw.omega_mumu * transform(Moment::J, w); }

cd RateEngine::gamma_1(double w, int sign, double omega_ab, const Coupling& c) const {
    if (omega_ab == 0.0) return 0.0;
    if (opt_.route == Route::series) {
        const LineSpectrum& ls = sign > 0 ? c.lines_plus : c.lines_minus;
        cd acc = 0.0;
        for (int l = -ls.l_max; l <= ls.l_max; ++l) {
            const double a = ls.at(l);
            if (a != 0.0) acc += a * transform(Moment::J, w - l * ls.nu_s);
        }
        return omega_ab * acc;
    }
    return omega_ab * (c.kappa_sq * transform(Moment::J, w) + half_line(sign > 0 ? c.r1p : c.r1m, w));
}

cd RateEngine::gamma_2(double w, int sign, const Coupling& c) const {
    if (c.cross == 0.0) return 0.0;
    return c.cross * c.cross * half_line(sign > 0 ? c.t2p : c.t2m, w);
}

cd RateEngine::gamma_v1(double w, int sign, int orientation, const Coupling& c) const {
    if (sign < 0) return 0.0;
    const double amp = orientation * 2.0 * c.v * c.cross * std::cos(c.vartheta);
    if (amp == 0.0) return 0.0;
    if (opt_.route == Route::series) {
        const LineSpectrum& ls = c.lines_plus;
        cd acc = 0.0;
        for (int l = -ls.l_max; l <= ls.l_max; ++l) {
            const double a = ls.at(l);
            if (a != 0.0) acc += a * transform(Moment::JOverNu, w - l * ls.nu_s);
        }
        return amp * acc;
    }
    return amp * (c.kappa_sq * transform(Moment::JOverNu, w) + half_line(c.rv1, w));
}

cd RateEngine::gamma_v0(double w, int sign, const Coupling& c) const {
    const double odd = c.w.omega_deltadelta;
    if (c.v == 0.0 || odd == 0.0) return 0.0;
    const cd lin = double(sign) * 4.0 * odd * c.kappa_sq * transform(Moment::JOverNu2, w);
    return c.v * c.v * (lin + half_line(sign > 0 ? c.rv0p : c.rv0m, w));
}

RateComponent RateEngine::corr_ft(CorrKind kind, double w, const Coupling& c) const {
    RateComponent r;
    const double omm = c.w.omega_mumu;
    switch (kind) {
        case CorrKind::DagDot:
        case CorrKind::DotDag: {
            const int orient = kind == CorrKind::DagDot ? +1 : -1;
            r.one_photon = gamma_1(w, +1, omm, c);
            r.two_photon = gamma_2(w, +1, c);
            r.drive_one = gamma_v1(w, +1, orient, c);
            r.drive_zero = gamma_v0(w, +1, c);
            break;
        }
        case CorrKind::DagDag:
        case CorrKind::DotDot: {
            const double sgn = kind == CorrKind::DagDag ? -1.0 : 1.0;
            const cd phase = std::polar(1.0, sgn * 2.0 * c.vartheta);
            r.one_photon = phase * gamma_1(w, -1, omm, c);
            r.two_photon = -phase * gamma_2(w, -1, c);
            r.drive_one = 0.0;
            r.drive_zero = gamma_v0(w, -1, c);
            break;
        }
    }
    return r;
}

cd RateEngine::gamma_alpha_beta(Channel a, Channel b, double w, const EigenFrame& frame, const Coupling& c) const {
    const auto [aa, ba] = channel_coefficients(a, frame);
    const auto [ab, bb] = channel_coefficients(b, frame);
    return aa * ab * corr_ft(CorrKind::DagDot, w, c).total() + ba * bb * corr_ft(CorrKind::DotDag, w, c).total() +
           aa * bb * corr_ft(CorrKind::DagDag, w, c).total() + ba * ab * corr_ft(CorrKind::DotDot, w, c).total();
}

RateTable RateEngine::rate_table(const SystemParams& sys, const DipoleGeometry& geom) const {
    validate(sys);
    const Coupling c = couple(sys, geom);
    RateTable t;
    t.frame = build_eigenframe(sys, std::sqrt(c.kappa_sq));
    const auto freqs = slot_frequencies(t.frame.eta);
    for (int slot = 0; slot < 3; ++slot) {
        const double w = freqs[static_cast<std::size_t>(slot)];
        const cd dd = corr_ft(CorrKind::DagDot, w, c).total();
        const cd dg = corr_ft(CorrKind::DotDag, w, c).total();
        const cd gg = corr_ft(CorrKind::DagDag, w, c).total();
        const cd oo = corr_ft(CorrKind::DotDot, w, c).total();
        for (Channel a : {Channel::z, Channel::plus, Channel::minus})
            for (Channel b : {Channel::z, Channel::plus, Channel::minus}) {
                const auto [aa, ba] = channel_coefficients(a, t.frame);
                const auto [ab, bb] = channel_coefficients(b, t.frame);
                t.g[static_cast<std::size_t>(slot)][static_cast<int>(a)][static_cast<int>(b)] =
                    aa * ab * dd + ba * bb * dg + aa * bb * gg + ba * ab * oo;
            }
    }
    return t;
}

RateTable RateEngine::dfme_table(const SystemParams& sys, const DipoleGeometry& geom) const {
    validate(sys);
    validate(geom);
    RateTable t;
    t.frame = build_eigenframe(sys, 1.0);
    const double c = t.frame.cos_half(), s = t.frame.sin_half();
    const double th = relative_phase(sys, geom);
    const Eigen::Vector2cd nD(1.0, 0.0);
    const Eigen::Vector2cd nM(std::cos(geom.theta_mu_delta), std::sin(geom.theta_mu_delta));
    const double dm = geom.d_mu, dd = geom.d_delta;
    std::array<Eigen::Vector2cd, 3> D;
    D[static_cast<int>(Channel::z)] = (c * c - s * s) * dd * nD + 2.0 * c * s * dm * std::cos(th) * nM;
    D[static_cast<int>(Channel::plus)] =
        -2.0 * c * s * dd * nD + dm * (c * c * std::polar(1.0, th) - s * s * std::polar(1.0, -th)) * nM;
    D[static_cast<int>(Channel::minus)] = D[static_cast<int>(Channel::plus)].conjugate();
    const auto freqs = slot_frequencies(t.frame.eta);
    for (int slot = 0; slot < 3; ++slot) {
        const cd g0 = transform(Moment::J, freqs[static_cast<std::size_t>(slot)]);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                t.g[static_cast<std::size_t>(slot)][a][b] =
                    geom.solid_angle_factor * D[static_cast<std::size_t>(a)].dot(D[static_cast<std::size_t>(b)]) * g0;
    }
    return t;
}

SecularRates RateEngine::secular_rates(const SystemParams& sys, const DipoleGeometry& geom) const {
    return rate_table(sys, geom).secular();
}

NonSecularRates RateEngine::nonsecular_rates(const SystemParams& sys, const DipoleGeometry& geom) const {
    return rate_table(sys, geom).nonsecular();
}

}  // namespace polaron
