// oracle.hpp — independent references: time-domain quadrature of the transforms and exact few-mode dynamics
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/dynamics.hpp"
#include "polaron/model.hpp"
#include "polaron/rates.hpp"

namespace polaron {

// ---- direct quadrature -------------------------------------------------------------------------

struct OracleOptions {
    double omega_max = 4.0;  // sets the s-panel width
    double s_max = 0.0;      // 0 selects 100 max(1/nu_c, beta)
    double nu_max_factor = 36.0;
};

// Kernels p, i, f evaluated by Gauss-Legendre quadrature over nu at Gauss-Legendre nodes in s, then every
// correlation transform integrated in the time domain without splitting off analytic parts. Shares no
// code with the rate engine beyond the spectral density.
class QuadratureOracle {
public:
    explicit QuadratureOracle(const BathSpec& bath, OracleOptions opt = {});

    RateComponent corr_ft(CorrKind kind, double w, const SystemParams& sys, const DipoleGeometry& geom) const;
    cd gamma_alpha_beta(Channel a, Channel b, double w, const SystemParams& sys, const DipoleGeometry& geom) const;
    SecularRates secular_rates(const SystemParams& sys, const DipoleGeometry& geom) const;

    const std::vector<double>& nodes() const { return s_; }
    // Largest |kernel| difference between two nu-panel refinements at the probe nodes.
    double kernel_error() const { return kernel_error_; }

private:
    cd transform(const std::vector<cd>& g, double w, bool slow_tail) const;

    BathSpec bath_;
    OracleOptions opt_;
    std::vector<double> s_, ws_;
    std::vector<cd> p_, i_, f_;
    double p0_ = 0.0;
    double kernel_error_ = 0.0;
};

RateComponent numeric_corr_ft(CorrKind kind, double w, const SystemParams& sys, const DipoleGeometry& geom,
                              const BathSpec& bath, OracleOptions opt = {});

// ---- few-mode exact dynamics -------------------------------------------------------------------

struct DiscreteBath {
    std::vector<double> nu;      // eV
    std::vector<double> weight;  // int_bin J
    std::vector<cd> mu, mubar, delta, dd;  // p_k = i g_k (d_p . e), g_k^2 = factor * weight
    double lambda_error = 0.0;   // relative errors against the continuum
    double mu1_error = 0.0;
    double mu2_error = 0.0;
    double phi0_error = 0.0;
    std::size_t size() const { return nu.size(); }
};

// Equal-reorganisation-energy bins, one mode per bin at int_bin J / int_bin (J/nu). Collinear dipoles only.
DiscreteBath discretise_bath(const BathSpec& bath, const DipoleGeometry& geom, int n_modes);

struct FockConfig {
    std::vector<int> cutoffs;
    std::size_t max_dimension = 4096;
    std::size_t dimension() const;
};

struct EffectiveParams {
    double epsilon_tilde = 0.0;
    cd v_tilde = 0.0;
    double g_deltadelta = 0.0;
    cd g_mumubar = 0.0;
};

// G_pq = sum_k (p_k conj(Delta_k) + conj(q_k) Delta_k) / nu_k.
EffectiveParams effective_parameters(const DiscreteBath& db, const SystemParams& sys);

// Product basis |s> (x) |n_1 ... n_N>, system index 0 = e, 1 = g, last mode fastest.
Eigen::MatrixXcd build_effective_hamiltonian(const DiscreteBath& db, const SystemParams& sys, const FockConfig& fc);

struct ExactOptions {
    double discard = 1e-6;  // Gibbs weight allowed outside the ensemble
};

struct ExactResult {
    Trajectory trajectory;        // bare basis, lab frame
    double truncated_weight = 0;  // Gibbs weight beyond the Fock cutoffs
    std::size_t members = 0;
    double trace_error = 0.0;
};

// |g><g| (x) Gibbs(b), propagated exactly through the eigendecomposition of H.
ExactResult exact_evolve(const Eigen::MatrixXcd& h, const DiscreteBath& db, const FockConfig& fc, double beta,
                         const std::vector<double>& t_grid, ExactOptions opt = {});

// Largest change of rho_gg when every cutoff is raised by one; throws NumericsError above tol.
double cutoff_drift(const DiscreteBath& db, const SystemParams& sys, const FockConfig& fc,
                    const std::vector<double>& t_grid, double tol);

}  // namespace polaron
