// oracle.cpp — time-domain quadrature reference and exact propagation of the few-mode effective Hamiltonian
#include "polaron/oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

namespace polaron {
namespace {

constexpr int kNuPanels0 = 144;  // nu-panels at the coarsest level
constexpr int kNuLevels = 8;

// Gauss-Legendre nodes/weights on [0, 1].
template <int N>
std::pair<std::vector<double>, std::vector<double>> unit_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    std::vector<double> x, w;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == 0.0) {
            x.push_back(0.5);
            w.push_back(0.5 * b[k]);
            continue;
        }
        x.push_back(0.5 - 0.5 * a[k]);
        w.push_back(0.5 * b[k]);
        x.push_back(0.5 + 0.5 * a[k]);
        w.push_back(0.5 * b[k]);
    }
    return {x, w};
}

// Per-node factors for the three kernels on one nu-panel level.
struct NuLevel {
    std::vector<double> nu, a_p, b_p, a_i, b_i, a_f, b_f;
};

NuLevel make_level(const BathSpec& bath, double L, int panels) {
    static const auto rule = unit_rule<24>();
    NuLevel lv;
    const double h = L / panels;
    for (int p = 0; p < panels; ++p) {
        for (std::size_t k = 0; k < rule.first.size(); ++k) {
            const double nu = h * (p + rule.first[k]);
            const double wt = h * rule.second[k];
            const double j = spectral_density(nu, bath);
            const double x = bath.beta * nu;
            const double coth = x < 1e-4 ? 2.0 / x + x / 6.0 : 1.0 / std::tanh(0.5 * x);
            lv.nu.push_back(nu);
            // p: J/nu^2 [coth cos - i sin]; i: J [coth cos - i sin]; f: J/nu [cos - i coth sin]
            lv.a_p.push_back(wt * j / (nu * nu) * coth);
            lv.b_p.push_back(wt * j / (nu * nu));
            lv.a_i.push_back(wt * j * coth);
            lv.b_i.push_back(wt * j);
            lv.a_f.push_back(wt * j / nu);
            lv.b_f.push_back(wt * j / nu * coth);
        }
    }
    return lv;
}

struct Kernels {
    cd p, i, f;
};

Kernels eval_kernels(const NuLevel& lv, double s) {
    double pr = 0, pi = 0, ir = 0, ii = 0, fr = 0, fi = 0;
    for (std::size_t k = 0; k < lv.nu.size(); ++k) {
        const double c = std::cos(lv.nu[k] * s), sn = std::sin(lv.nu[k] * s);
        pr += lv.a_p[k] * c;
        pi -= lv.b_p[k] * sn;
        ir += lv.a_i[k] * c;
        ii -= lv.b_i[k] * sn;
        fr += lv.a_f[k] * c;
        fi -= lv.b_f[k] * sn;
    }
    return {{pr, pi}, {ir, ii}, {fr, fi}};
}

// int_T^inf e^{i w s} s^{-2} ds.
cd tail_inverse_square(double w, double T) {
    if (w == 0.0) return 1.0 / T;
    const cd i(0.0, 1.0);
    auto asymptotic = [&](double from) {
        // I_n = (i/w) e^{i w a} a^{-n} - (i n / w) I_{n+1}
        cd acc = 0.0, coef = 1.0;
        for (int n = 2; n < 8; ++n) {
            acc += coef * (i / w) * std::exp(i * w * from) * std::pow(from, -n);
            coef *= -i * double(n) / w;
        }
        return acc;
    };
    const double wt = std::abs(w) * T;
    if (wt >= 40.0) return asymptotic(T);
    const double T2 = 40.0 / std::abs(w);
    static const auto rule = unit_rule<16>();
    const int panels = static_cast<int>(std::ceil((T2 - T) * std::abs(w) / 2.0)) + 1;
    const double h = (T2 - T) / panels;
    cd acc = 0.0;
    for (int p = 0; p < panels; ++p)
        for (std::size_t k = 0; k < rule.first.size(); ++k) {
            const double s = T + h * (p + rule.first[k]);
            acc += h * rule.second[k] * std::exp(i * w * s) / (s * s);
        }
    return acc + asymptotic(T2);
}

}  // namespace

QuadratureOracle::QuadratureOracle(const BathSpec& bath, OracleOptions opt) : bath_(bath), opt_(opt) {
    validate(bath_);
    if (!(opt_.omega_max > 0.0) || !(opt_.nu_max_factor > 0.0)) throw ConfigError("oracle", "options must be > 0");
    const double a0 = 1.0 / bath_.cutoff;
    if (opt_.s_max <= 0.0) opt_.s_max = 100.0 * std::max(a0, bath_.beta);
    const double L = opt_.nu_max_factor * bath_.cutoff;

    // Phase across one nu-panel stays below 10 rad.
    auto level_for = [&](double s) {
        const double need = L * s / 10.0;
        for (int l = 0; l < kNuLevels; ++l)
            if ((kNuPanels0 << l) >= need) return l;
        throw NumericsError("oracle", "s range exceeds nu-panel refinement", s);
    };
    std::vector<NuLevel> levels;
    const int top = std::min(level_for(opt_.s_max + 2.0 / opt_.omega_max + a0) + 1, kNuLevels - 1);
    for (int l = 0; l <= top; ++l) levels.push_back(make_level(bath_, L, kNuPanels0 << l));

    p0_ = eval_kernels(levels[0], 0.0).p.real();

    static const auto srule = unit_rule<16>();
    const double hs = std::min(a0, 2.0 / opt_.omega_max);
    const auto panels = static_cast<std::size_t>(std::ceil(opt_.s_max / hs));
    for (std::size_t p = 0; p < panels; ++p)
        for (std::size_t k = 0; k < srule.first.size(); ++k) {
            const double s = hs * (double(p) + srule.first[k]);
            const Kernels kk = eval_kernels(levels[static_cast<std::size_t>(level_for(s))], s);
            s_.push_back(s);
            ws_.push_back(hs * srule.second[k]);
            p_.push_back(kk.p);
            i_.push_back(kk.i);
            f_.push_back(kk.f);
        }
    opt_.s_max = hs * double(panels);

    // Refinement probe: the next level must agree at a spread of nodes.
    for (std::size_t k = 0; k < s_.size(); k += s_.size() / 7 + 1) {
        const int l = std::min(level_for(s_[k]) + 1, top);
        const Kernels kk = eval_kernels(levels[static_cast<std::size_t>(l)], s_[k]);
        kernel_error_ = std::max({kernel_error_, std::abs(kk.p - p_[k]), std::abs(kk.i - i_[k]), std::abs(kk.f - f_[k])});
    }
    if (kernel_error_ > 1e-8) throw NumericsError("oracle", "kernel quadrature unconverged", kernel_error_);
}

cd QuadratureOracle::transform(const std::vector<cd>& g, double w, bool slow_tail) const {
    cd acc = 0.0;
    for (std::size_t k = 0; k < s_.size(); ++k) acc += ws_[k] * std::exp(cd(0.0, w * s_[k])) * g[k];
    if (slow_tail) {
        const double T = opt_.s_max;
        const cd c = g.back() * s_.back() * s_.back();
        acc += c * tail_inverse_square(w, T);
    }
    return acc;
}

RateComponent QuadratureOracle::corr_ft(CorrKind kind, double w, const SystemParams& sys,
                                        const DipoleGeometry& geom) const {
    validate(geom);
    const CouplingWeights cw = coupling_weights(geom);
    const double odd = cw.omega_deltadelta;
    const double phi0 = 4.0 * odd * p0_;
    const double k2 = std::exp(-phi0);
    const double v = sys.drive_magnitude;
    const double th = relative_phase(sys, geom);
    const double cross = 2.0 * cw.omega_mudelta * std::cos(geom.theta_mu_delta);
    const bool plus = kind == CorrKind::DagDot || kind == CorrKind::DotDag;
    const double sg = plus ? 1.0 : -1.0;

    const std::size_t n = s_.size();
    std::vector<cd> one(n), two(n), v1(n), v0(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cd phi = 4.0 * odd * p_[k];
        const cd e = k2 * std::exp(sg * phi);
        one[k] = e * i_[k];
        two[k] = e * f_[k] * f_[k];
        v1[k] = e * f_[k];
        v0[k] = e - k2;
    }
    RateComponent r;
    r.one_photon = cw.omega_mumu == 0.0 ? cd(0.0) : cw.omega_mumu * transform(one, w, false);
    r.two_photon = cross == 0.0 ? cd(0.0) : cross * cross * transform(two, w, false);
    r.drive_zero = (v == 0.0 || odd == 0.0) ? cd(0.0) : v * v * transform(v0, w, true);
    if (plus) {
        const double orient = kind == CorrKind::DagDot ? 1.0 : -1.0;
        const double amp = orient * 2.0 * v * cross * std::cos(th);
        r.drive_one = amp == 0.0 ? cd(0.0) : amp * transform(v1, w, false);
    } else {
        const cd phase = std::polar(1.0, (kind == CorrKind::DagDag ? -2.0 : 2.0) * th);
        r.one_photon *= phase;
        r.two_photon *= -phase;
    }
    return r;
}

cd QuadratureOracle::gamma_alpha_beta(Channel a, Channel b, double w, const SystemParams& sys,
                                      const DipoleGeometry& geom) const {
    const double k = kappa(bath_, coupling_weights(geom).omega_deltadelta);
    const EigenFrame fr = build_eigenframe(sys, k);
    const auto [aa, ba] = channel_coefficients(a, fr);
    const auto [ab, bb] = channel_coefficients(b, fr);
    return aa * ab * corr_ft(CorrKind::DagDot, w, sys, geom).total() +
           ba * bb * corr_ft(CorrKind::DotDag, w, sys, geom).total() +
           aa * bb * corr_ft(CorrKind::DagDag, w, sys, geom).total() +
           ba * ab * corr_ft(CorrKind::DotDot, w, sys, geom).total();
}

SecularRates QuadratureOracle::secular_rates(const SystemParams& sys, const DipoleGeometry& geom) const {
    validate(sys);
    RateTable t;
    t.frame = build_eigenframe(sys, kappa(bath_, coupling_weights(geom).omega_deltadelta));
    const std::array<double, 3> freqs{-t.frame.eta, 0.0, t.frame.eta};
    for (int slot = 0; slot < 3; ++slot) {
        const double w = freqs[static_cast<std::size_t>(slot)];
        const cd dd = corr_ft(CorrKind::DagDot, w, sys, geom).total();
        const cd dg = corr_ft(CorrKind::DotDag, w, sys, geom).total();
        const cd gg = corr_ft(CorrKind::DagDag, w, sys, geom).total();
        const cd oo = corr_ft(CorrKind::DotDot, w, sys, geom).total();
        for (Channel a : {Channel::z, Channel::plus, Channel::minus})
            for (Channel b : {Channel::z, Channel::plus, Channel::minus}) {
                const auto [aa, ba] = channel_coefficients(a, t.frame);
                const auto [ab, bb] = channel_coefficients(b, t.frame);
                t.g[static_cast<std::size_t>(slot)][static_cast<int>(a)][static_cast<int>(b)] =
                    aa * ab * dd + ba * bb * dg + aa * bb * gg + ba * ab * oo;
            }
    }
    return t.secular();
}

RateComponent numeric_corr_ft(CorrKind kind, double w, const SystemParams& sys, const DipoleGeometry& geom,
                              const BathSpec& bath, OracleOptions opt) {
    return QuadratureOracle(bath, opt).corr_ft(kind, w, sys, geom);
}

// ---- few-mode exact dynamics -------------------------------------------------------------------

DiscreteBath discretise_bath(const BathSpec& bath, const DipoleGeometry& geom, int n_modes) {
    validate(bath);
    validate(geom);
    if (n_modes < 1) throw ConfigError("modes", "need at least one mode");
    const double ct = std::cos(geom.theta_mu_delta);
    if (std::abs(std::abs(ct) - 1.0) > 1e-12)
        throw ConfigError("theta_mu_delta", "few-mode oracle supports parallel or anti-parallel dipoles only");
    DiscreteBath db;
    if (bath.huang_rhys == 0.0) return db;

    using boost::math::gamma_p;
    using boost::math::gamma_p_inv;
    const double S = bath.huang_rhys, nc = bath.cutoff;
    // int_a^b J/nu = 2 S nu_c dP3, int_a^b J = 6 S nu_c^2 dP4 in x = nu/nu_c.
    double prev3 = 0.0, prev4 = 0.0;
    for (int k = 1; k <= n_modes; ++k) {
        const double q = double(k) / n_modes;
        const double x = k == n_modes ? INFINITY : gamma_p_inv(3.0, q);
        const double P3 = k == n_modes ? 1.0 : q;
        const double P4 = k == n_modes ? 1.0 : gamma_p(4.0, x);
        const double m1 = 2.0 * S * nc * (P3 - prev3);
        const double m2 = 6.0 * S * nc * nc * (P4 - prev4);
        db.nu.push_back(m2 / m1);
        db.weight.push_back(m2);
        prev3 = P3;
        prev4 = P4;
    }

    const cd i(0.0, 1.0);
    const double f = geom.solid_angle_factor;
    const cd emu = std::polar(1.0, geom.vartheta_mu);
    for (std::size_t k = 0; k < db.nu.size(); ++k) {
        const double g = std::sqrt(f * db.weight[k]);
        db.delta.push_back(i * g * geom.d_delta * ct);
        db.mu.push_back(i * g * geom.d_mu * emu);
        db.mubar.push_back(i * g * geom.d_mu * std::conj(emu));
        db.dd.push_back(i * g * geom.d_D);
    }

    const double lambda = reorganisation_energy(bath);
    double l = 0.0, m2 = 0.0, ph = 0.0;
    for (std::size_t k = 0; k < db.nu.size(); ++k) {
        l += db.weight[k] / db.nu[k];
        m2 += db.weight[k];
        ph += db.weight[k] / (db.nu[k] * db.nu[k]) / std::tanh(0.5 * bath.beta * db.nu[k]);
    }
    db.lambda_error = std::abs(l - lambda) / lambda;
    db.mu1_error = db.lambda_error;
    db.mu2_error = std::abs(m2 - 6.0 * S * nc * nc) / (6.0 * S * nc * nc);
    const double ph_exact = phi_zero(bath, 1.0) / 4.0;
    db.phi0_error = std::abs(ph - ph_exact) / ph_exact;
    return db;
}

std::size_t FockConfig::dimension() const {
    std::size_t d = 2;
    for (int c : cutoffs) {
        if (c < 1) throw ConfigError("fock_cutoff", "each cutoff must be >= 1");
        d *= static_cast<std::size_t>(c + 1);
        if (d > max_dimension) throw ConfigError("fock_cutoff", "Hilbert-space dimension exceeds the configured maximum");
    }
    return d;
}

EffectiveParams effective_parameters(const DiscreteBath& db, const SystemParams& sys) {
    EffectiveParams e;
    for (std::size_t k = 0; k < db.size(); ++k) {
        e.g_deltadelta += 2.0 * std::norm(db.delta[k]) / db.nu[k];
        e.g_mumubar += (db.mu[k] * std::conj(db.delta[k]) + std::conj(db.mubar[k]) * db.delta[k]) / db.nu[k];
    }
    e.epsilon_tilde = sys.epsilon + 2.0 * e.g_deltadelta;
    e.v_tilde = std::polar(sys.drive_magnitude, sys.drive_phase) + e.g_mumubar;
    return e;
}

Eigen::MatrixXcd build_effective_hamiltonian(const DiscreteBath& db, const SystemParams& sys, const FockConfig& fc) {
    validate(sys);
    if (fc.cutoffs.size() != db.size()) throw ConfigError("fock_cutoff", "one cutoff per mode required");
    const std::size_t dim = fc.dimension();
    const std::size_t nb = dim / 2;
    const std::size_t nm = db.size();
    std::vector<std::size_t> stride(nm, 1);
    for (std::size_t k = nm; k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(fc.cutoffs[k] + 1);

    const EffectiveParams e = effective_parameters(db, sys);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    auto at = [&](std::size_t r, std::size_t c) -> cd& { return h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); };
    const std::size_t E = 0, G = nb;  // block offsets

    std::vector<int> occ(nm, 0);
    for (std::size_t b = 0; b < nb; ++b) {
        std::size_t rem = b;
        double energy = 0.0;
        for (std::size_t k = 0; k < nm; ++k) {
            occ[k] = static_cast<int>(rem / stride[k]);
            rem %= stride[k];
            energy += db.nu[k] * occ[k];
        }
        at(E + b, E + b) = 0.5 * e.epsilon_tilde + energy;
        at(G + b, G + b) = -0.5 * e.epsilon_tilde + energy;
        at(E + b, G + b) += e.v_tilde;
        at(G + b, E + b) += std::conj(e.v_tilde);
        for (std::size_t k = 0; k < nm; ++k) {
            if (occ[k] >= fc.cutoffs[k]) continue;
            const std::size_t up = b + stride[k];
            const double amp = std::sqrt(double(occ[k] + 1));
            // 2|e><e| (Delta b^dag + conj(Delta) b)
            at(E + up, E + b) += 2.0 * db.delta[k] * amp;
            at(E + b, E + up) += 2.0 * std::conj(db.delta[k]) * amp;
            // sigma_+ (mu b^dag + conj(mubar) b) + h.c.
            at(E + up, G + b) += db.mu[k] * amp;
            at(G + b, E + up) += std::conj(db.mu[k]) * amp;
            at(E + b, G + up) += std::conj(db.mubar[k]) * amp;
            at(G + up, E + b) += db.mubar[k] * amp;
        }
    }
    return h;
}

ExactResult exact_evolve(const Eigen::MatrixXcd& h, const DiscreteBath& db, const FockConfig& fc, double beta,
                         const std::vector<double>& t_grid, ExactOptions opt) {
    if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
    if (!(opt.discard > 0.0 && opt.discard < 1.0)) throw ConfigError("discard", "must lie in (0, 1)");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw ConfigError("t_grid", "must be strictly increasing");
    const std::size_t dim = fc.dimension();
    if (static_cast<std::size_t>(h.rows()) != dim || h.rows() != h.cols()) throw ConfigError("hamiltonian", "dimension mismatch");
    const std::size_t nb = dim / 2, nm = db.size();
    std::vector<std::size_t> stride(nm, 1);
    for (std::size_t k = nm; k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(fc.cutoffs[k] + 1);

    ExactResult res;
    // Truncated Gibbs weights of every bath configuration.
    std::vector<double> w(nb, 1.0);
    double kept = 1.0;
    for (std::size_t k = 0; k < nm; ++k) {
        const double x = std::exp(-beta * db.nu[k]);
        kept *= -std::expm1(double(fc.cutoffs[k] + 1) * std::log(x));
    }
    res.truncated_weight = 1.0 - kept;
    for (std::size_t b = 0; b < nb; ++b) {
        std::size_t rem = b;
        double lw = 0.0;
        for (std::size_t k = 0; k < nm; ++k) {
            const double n = double(rem / stride[k]);
            rem %= stride[k];
            lw += -beta * db.nu[k] * n + std::log(-std::expm1(-beta * db.nu[k]));
        }
        w[b] = std::exp(lw) / kept;
    }
    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    std::vector<std::pair<std::size_t, double>> members;
    double acc = 0.0;
    for (std::size_t b : order) {
        members.emplace_back(b, w[b]);
        acc += w[b];
        if (1.0 - acc < opt.discard) break;
    }
    for (auto& m : members) m.second /= acc;
    res.members = members.size();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw NumericsError("oracle", "eigendecomposition failed", 1.0);
    const Eigen::MatrixXcd& W = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    const auto n = static_cast<Eigen::Index>(dim), half = static_cast<Eigen::Index>(nb);

    // Initial state |g, n> in the eigenbasis: R_ab = sum_m w_m conj(W_ma) W_mb.
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& [b, wm] : members) {
        const Eigen::RowVectorXcd row = W.row(half + static_cast<Eigen::Index>(b));
        R.noalias() += wm * row.adjoint() * row;
    }
    res.trace_error = std::abs(R.trace() - 1.0);

    const Eigen::MatrixXcd We = W.topRows(half), Wg = W.bottomRows(half);
    const Eigen::MatrixXcd Oee = We.adjoint() * We;  // |e><e| (x) 1
    const Eigen::MatrixXcd Oge = Wg.adjoint() * We;  // |g><e| (x) 1
    // <O>(t) = sum_ab R_ab O_ba e^{-i(l_a - l_b) t}
    const Eigen::MatrixXcd Mee = R.cwiseProduct(Oee.transpose());
    const Eigen::MatrixXcd Meg = R.cwiseProduct(Oge.transpose());

    Trajectory& tr = res.trajectory;
    tr.t = t_grid;
    tr.frame = FrameTag::lab;
    tr.equation = Equation::exact;
    Eigen::VectorXcd u(n), v(n);
    for (double t : t_grid) {
        for (Eigen::Index a = 0; a < n; ++a) {
            u(a) = std::polar(1.0, -lam(a) * t);
            v(a) = std::conj(u(a));
        }
        const cd ree = u.transpose() * (Mee * v);
        const cd reg = u.transpose() * (Meg * v);
        DensityMatrix d;
        d.basis = Basis::bare;
        d.m(0, 0) = ree.real();
        d.m(1, 1) = 1.0 - ree.real();
        d.m(0, 1) = reg;
        d.m(1, 0) = std::conj(reg);
        tr.rho.push_back(d);
    }
    return res;
}

double cutoff_drift(const DiscreteBath& db, const SystemParams& sys, const FockConfig& fc,
                    const std::vector<double>& t_grid, double tol) {
    FockConfig up = fc;
    for (int& c : up.cutoffs) ++c;
    const ExactResult a = exact_evolve(build_effective_hamiltonian(db, sys, fc), db, fc, sys.beta, t_grid);
    const ExactResult b = exact_evolve(build_effective_hamiltonian(db, sys, up), db, up, sys.beta, t_grid);
    double drift = 0.0;
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        drift = std::max(drift, std::abs(a.trajectory.rho[k].m(1, 1).real() - b.trajectory.rho[k].m(1, 1).real()));
    if (drift > tol) throw NumericsError("oracle", "Fock cutoffs unconverged", drift);
    return drift;
}

}  // namespace polaron
