// spectrum.cpp — regression-theorem correlation, sideband transform, sum rules, Table-style extraction
#include "polaron/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "polaron/dynamics.hpp"

namespace polaron {
namespace {

// Regression generator on y = (L_++, L_--, L_+-, L_-+) for an arbitrary (non-Hermitian) operator L.
Eigen::Matrix4cd regression_generator(const SecularRates& s, const NonSecularRates& n) {
    const cd i(0.0, 1.0);
    Eigen::Matrix4cd G = Eigen::Matrix4cd::Zero();
    G(0, 0) = -s.gamma_down;
    G(0, 1) = s.gamma_up;
    G(0, 2) = std::conj(n.gamma_bar);
    G(0, 3) = n.gamma_bar;
    G.row(1) = -G.row(0);
    G(2, 0) = std::conj(n.k_plus);
    G(2, 1) = n.k_minus;
    G(2, 2) = -(s.gamma_d + i * s.eta_bar);
    G(2, 3) = n.k_1;
    G(3, 0) = n.k_plus;
    G(3, 1) = std::conj(n.k_minus);
    G(3, 2) = std::conj(n.k_1);
    G(3, 3) = -(s.gamma_d - i * s.eta_bar);
    return G;
}

bool is_zero_mode(cd lambda, double scale) { return std::abs(lambda) <= 1e-12 * scale; }

double lambda_scale(const std::vector<cd>& lambda) {
    double m = 0.0;
    for (const cd& l : lambda) m = std::max(m, std::abs(l));
    return std::max(m, 1e-300);
}

void sort_unique(std::vector<double>& x) {
    std::sort(x.begin(), x.end());
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x)
        if (out.empty() || v - out.back() > 1e-12 * (1.0 + std::abs(v))) out.push_back(v);
    x.swap(out);
}

}  // namespace

const char* to_string(SpectrumVariant v) {
    switch (v) {
        case SpectrumVariant::with_sideband: return "with_sideband";
        case SpectrumVariant::no_sideband: return "no_sideband";
        case SpectrumVariant::no_pd: return "no_pd";
    }
    return "?";
}

cd CorrelationModel::at(double tau) const {
    cd v = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * std::exp(lambda[j] * tau);
    return v;
}

CorrelationModel qrt_model(const SystemParams& sys, const DipoleGeometry& geom, const RateEngine& engine,
                           bool secular) {
    const RateTable table = engine.rate_table(sys, geom);
    const SecularRates s = table.secular();
    const NonSecularRates n = secular ? NonSecularRates{} : table.nonsecular();
    const Eigen::Matrix4cd G = regression_generator(s, n);

    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(G);
    if (es.info() != Eigen::Success) throw NumericsError("spectrum", "regression generator eigensolver failed", 1.0);
    const Eigen::Matrix4cd V = es.eigenvectors();
    const Eigen::Vector4cd lam = es.eigenvalues();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(V);
    const double cond = svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
    if (cond > 1e12) throw NumericsError("spectrum", "regression generator is not diagonalisable", 1.0 / cond);

    std::vector<cd> lv(lam.data(), lam.data() + 4);
    const double scale = lambda_scale(lv);
    int zero = -1;
    for (int j = 0; j < 4; ++j) {
        if (!is_zero_mode(lv[static_cast<std::size_t>(j)], scale)) continue;
        if (zero >= 0) throw NumericsError("spectrum", "steady state is not unique", std::abs(lv[static_cast<std::size_t>(j)]));
        zero = j;
    }
    if (zero < 0) throw NumericsError("spectrum", "no stationary mode", lam.cwiseAbs().minCoeff());
    for (const cd& l : lv)
        if (l.real() > 1e-12 * scale) throw NumericsError("spectrum", "growing mode in the regression generator", l.real());

    Eigen::Vector4cd yss = V.col(zero);
    yss /= (yss(0) + yss(1));
    Eigen::Matrix2cd rho;
    rho << yss(0), yss(2), yss(3), yss(1);

    const Eigen::Matrix2cd u = eigen_to_bare(table.frame, sys.drive_phase);
    Eigen::Matrix2cd lower = Eigen::Matrix2cd::Zero();
    lower(1, 0) = 1.0;  // |g><e|
    const Eigen::Matrix2cd sm = u.adjoint() * lower * u;
    const Eigen::Matrix2cd sp = sm.adjoint();
    const Eigen::Matrix2cd l0 = sm * rho;
    const Eigen::Vector4cd y0(l0(0, 0), l0(1, 1), l0(0, 1), l0(1, 0));
    // Tr[sigma_+ L] = sum_ij (sigma_+)_ji L_ij
    const Eigen::Vector4cd a(sp(0, 0), sp(1, 1), sp(1, 0), sp(0, 1));
    const Eigen::Vector4cd w = V.partialPivLu().solve(y0);
    const Eigen::RowVector4cd av = a.transpose() * V;

    CorrelationModel m;
    cd total = 0.0;
    for (int j = 0; j < 4; ++j) {
        const cd cj = av(j) * w(j);
        m.c.push_back(cj);
        m.lambda.push_back(lam(j));
        total += cj;
        if (j == zero) m.elastic += cj;
    }
    m.rho_ee = total.real();
    return m;
}

std::vector<cd> qrt_correlation(const std::vector<double>& tau, const SystemParams& sys, const DipoleGeometry& geom,
                                const RateEngine& engine, bool secular) {
    const CorrelationModel m = qrt_model(sys, geom, engine, secular);
    std::vector<cd> out;
    out.reserve(tau.size());
    for (double t : tau) out.push_back(m.at(t));
    return out;
}

SpectrumSeries polarisation_spectrum(const SystemParams& sys, const DipoleGeometry& geom_in, const RateEngine& engine,
                                     SpectrumVariant variant, const SpectrumOptions& opt) {
    if (!(opt.step > 0.0) || opt.peak_points < 3 || !(opt.peak_span > 1.0) || !(opt.below > 0.0) || !(opt.above > 0.0))
        throw ConfigError("spectrum_grid", "step, spans and peak sampling must be positive");
    DipoleGeometry geom = geom_in;
    if (variant == SpectrumVariant::no_pd) geom.d_delta = 0.0;

    const CorrelationModel m = qrt_model(sys, geom, engine, opt.secular);
    const double odd = coupling_weights(geom).omega_deltadelta;
    const BathTable& tab = engine.table();
    const double phi0 = 4.0 * odd * tab.p[0].real();
    const double k2 = std::exp(-phi0);
    const double scale = lambda_scale(m.lambda);

    SpectrumSeries out;
    out.variant = variant;
    out.kappa_sq = k2;
    out.rho_ee = m.rho_ee;
    std::vector<std::size_t> decaying;
    double eta_edge = 0.0;
    for (std::size_t j = 0; j < m.c.size(); ++j) {
        if (is_zero_mode(m.lambda[j], scale)) continue;
        decaying.push_back(j);
        LorentzLine line{m.lambda[j].imag(), -m.lambda[j].real(), kPi * k2 * m.c[j].real()};
        if (!(line.hwhm > 0.0)) throw NumericsError("spectrum", "mode without damping cannot be windowed", line.hwhm);
        out.lines.push_back(line);
        eta_edge = std::max(eta_edge, std::abs(line.center));
    }
    out.elastic_weight = kPi * k2 * m.elastic.real();

    const double unit = std::max(engine.bath().cutoff, 0.1);
    double lo = -eta_edge - opt.below * unit, hi = eta_edge + opt.above * unit;
    for (double x : opt.extra_points) {
        if (!std::isfinite(x)) throw ConfigError("spectrum_grid", "extra points must be finite");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    std::vector<double>& w = out.omega;
    w = opt.extra_points;
    const auto n_uniform = static_cast<std::size_t>(std::ceil((hi - lo) / opt.step));
    for (std::size_t k = 0; k <= n_uniform; ++k) w.push_back(std::min(lo + opt.step * double(k), hi));
    const double tmax = std::atan(opt.peak_span);
    for (const LorentzLine& line : out.lines) {
        for (int k = 0; k < opt.peak_points; ++k) {
            const double th = -tmax + 2.0 * tmax * k / (opt.peak_points - 1);
            const double x = line.center + line.hwhm * std::tan(th);
            if (x > lo && x < hi) w.push_back(x);
        }
    }
    sort_unique(w);

    for (const LorentzLine& line : out.lines)
        out.tail_mass += std::abs(line.weight) / kPi *
                         (kPi - std::atan((hi - line.center) / line.hwhm) - std::atan((line.center - lo) / line.hwhm));

    const cd i(0.0, 1.0);
    out.intensity.assign(w.size(), 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) {
        cd acc = 0.0;
        for (std::size_t j : decaying) acc += m.c[j] / (i * w[k] - m.lambda[j]);
        out.intensity[k] = k2 * acc.real();
    }

    if (variant == SpectrumVariant::with_sideband && odd > 0.0) {
        // kappa^2 (e^{phi} - 1) C(tau) on the engine grid, transformed with e^{-i omega tau}.
        std::vector<cd> g(tab.size());
        for (std::size_t k = 0; k < tab.size(); ++k) {
            const cd phi = 4.0 * odd * tab.p[k];
            g[k] = k2 * (std::exp(phi) - 1.0) * m.at(tab.s[k]);
        }
        for (std::size_t k = 0; k < w.size(); ++k) out.intensity[k] += engine.half_line(g, -w[k]).real();
    }
    return out;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("series", "need matching samples");
    if (!(hi > lo)) return 0.0;
    auto interp = [&](double t) {
        auto it = std::upper_bound(x.begin(), x.end(), t);
        if (it == x.begin()) return y.front();
        if (it == x.end()) return y.back();
        const std::size_t k = static_cast<std::size_t>(it - x.begin());
        const double f = (t - x[k - 1]) / (x[k] - x[k - 1]);
        return y[k - 1] + f * (y[k] - y[k - 1]);
    };
    lo = std::max(lo, x.front());
    hi = std::min(hi, x.back());
    if (!(hi > lo)) return 0.0;
    double acc = 0.0;
    double xp = lo, yp = interp(lo);
    for (auto it = std::upper_bound(x.begin(), x.end(), lo); it != x.end() && *it < hi; ++it) {
        const std::size_t k = static_cast<std::size_t>(it - x.begin());
        acc += 0.5 * (x[k] - xp) * (y[k] + yp);
        xp = x[k];
        yp = y[k];
    }
    acc += 0.5 * (hi - xp) * (interp(hi) + yp);
    return acc;
}

double spectrum_power(const SpectrumSeries& s, bool include_elastic) {
    const double p = trapezoid(s.omega, s.intensity, s.omega.front(), s.omega.back());
    return include_elastic ? p + s.elastic_weight : p;
}

double sideband_fraction(const SpectrumSeries& s, const std::vector<Region>& regions, double p) {
    if (!(p > 0.0)) throw ConfigError("power", "must be > 0");
    std::vector<Region> r = regions;
    std::sort(r.begin(), r.end(), [](const Region& a, const Region& b) { return a.lo < b.lo; });
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (!(r[k].hi > r[k].lo)) throw ConfigError("regions", "degenerate region");
        if (k > 0 && r[k].lo < r[k - 1].hi) throw ConfigError("regions", "overlapping regions");
    }
    double acc = 0.0;
    for (const Region& g : r) acc += trapezoid(s.omega, s.intensity, g.lo, g.hi);
    return acc / p;
}

ExtractionReport extract_parameters(const SpectrumSeries& s, double beta, const BathSpec& bath_shape,
                                    double solid_angle_factor, const ExtractOptions& opt) {
    if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
    if (!(opt.region_fwhm > 0.0) || !(opt.min_peak_rel > 0.0)) throw ConfigError("extract", "options must be > 0");
    const auto& x = s.omega;
    const auto& y = s.intensity;
    const std::size_t n = x.size();
    if (n < 5) throw ConfigError("series", "too few samples");

    ExtractionReport rep;
    rep.power = spectrum_power(s, opt.include_elastic);
    rep.rho_ee_inf = rep.power / kPi;

    const double ymax = *std::max_element(y.begin(), y.end());
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (!(y[k] >= y[k - 1] && y[k] > y[k + 1] && y[k] >= opt.min_peak_rel * ymax)) continue;
        // Vertex of the parabola through three samples.
        const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
        const double d1 = (y[k] - y[k - 1]) / (x1 - x0), d2 = (y[k + 1] - y[k]) / (x2 - x1);
        const double curv = (d2 - d1) / (x2 - x0);
        const double center = curv < 0.0 ? 0.5 * (x0 + x1) - d1 / (2.0 * curv) : x1;
        const double half = 0.5 * y[k];
        std::size_t l = k, r = k;
        while (l > 0 && y[l] >= half) --l;
        while (r + 1 < n && y[r] >= half) ++r;
        if (y[l] >= half || y[r] >= half) {
            rep.errors.emplace_back("peaks", "half maximum not reached near omega=" + std::to_string(x1));
            continue;
        }
        const double xl = x[l] + (half - y[l]) * (x[l + 1] - x[l]) / (y[l + 1] - y[l]);
        const double xr = x[r - 1] + (half - y[r - 1]) * (x[r] - x[r - 1]) / (y[r] - y[r - 1]);
        PeakFit pk;
        pk.center = center;
        pk.hwhm = 0.5 * (xr - xl);
        // Region: centre +- region_fwhm FWHM, cut at the first local minimum on each side.
        const double reach = opt.region_fwhm * 2.0 * pk.hwhm;
        std::size_t a = k, b = k;
        while (a > 0 && x[a - 1] >= center - reach && y[a - 1] <= y[a]) --a;
        while (b + 1 < n && x[b + 1] <= center + reach && y[b + 1] <= y[b]) ++b;
        pk.region.lo = (a > 0 && y[a - 1] <= y[a]) ? center - reach : x[a];
        pk.region.hi = (b + 1 < n && y[b + 1] <= y[b]) ? center + reach : x[b];
        pk.area = trapezoid(x, y, pk.region.lo, pk.region.hi);
        if (opt.tail_correction && pk.hwhm > 0.0) {
            const double captured =
                (std::atan((pk.region.hi - center) / pk.hwhm) + std::atan((center - pk.region.lo) / pk.hwhm)) / kPi;
            pk.area /= captured;
        }
        rep.peaks.push_back(pk);
    }
    if (rep.peaks.empty()) {
        rep.errors.emplace_back("peaks", "no peak detected");
        return rep;
    }

    double area = 0.0;
    for (const PeakFit& p : rep.peaks) area += p.area;
    double k2 = area / rep.power;
    if (k2 > 1.0 && k2 <= 1.01) k2 = 1.0;
    if (k2 > 0.0 && k2 <= 1.0) {
        rep.kappa_sq = k2;
        BathSpec shape = bath_shape;
        shape.beta = beta;
        const double unit_phi0 = phi_zero(shape, 1.0);
        if (unit_phi0 > 0.0 && solid_angle_factor > 0.0)
            rep.d_delta_hat = std::sqrt(std::max(0.0, -std::log(k2)) / (solid_angle_factor * unit_phi0));
        else
            rep.errors.emplace_back("d_delta_hat", "bath shape has no permanent-dipole response");
    } else {
        rep.errors.emplace_back("kappa_sq", "region estimate outside (0, 1]: " + std::to_string(k2));
    }

    const PeakFit* main = nullptr;
    for (const PeakFit& p : rep.peaks)
        if (p.center > 0.0 && (!main || p.area > main->area)) main = &p;
    if (!main) {
        rep.errors.emplace_back("eta_bar", "no emission peak at positive frequency");
        return rep;
    }
    rep.eta_bar = main->center;
    const double eta = main->center;
    const double rho = *rep.rho_ee_inf;
    if (!(rho > 0.0 && rho < 0.5)) {
        rep.errors.emplace_back("epsilon_hat", "rho_ee outside (0, 1/2)");
        return rep;
    }
    const double eps = eta * (1.0 - 2.0 * rho) / std::tanh(0.5 * beta * eta);
    rep.epsilon_hat = eps;
    if (!rep.kappa_sq) {
        rep.errors.emplace_back("v_hat", "needs kappa_sq");
        return rep;
    }
    const double gap = eta * eta - eps * eps;
    if (gap < 0.0) rep.errors.emplace_back("v_hat", "eta_bar below the epsilon estimate; clamped to zero");
    rep.v_hat = std::sqrt(std::max(gap, 0.0)) / (2.0 * std::sqrt(*rep.kappa_sq));
    return rep;
}

}  // namespace polaron
