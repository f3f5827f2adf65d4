// dynamics.hpp — secular and non-secular two-level master equations, frame maps, steady states
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/model.hpp"
#include "polaron/rates.hpp"

namespace polaron {

// eigen: index 0 = |+>, 1 = |->. bare: index 0 = |e>, 1 = |g>.
enum class Basis { eigen, bare };
enum class FrameTag { polaron, lab };
enum class Equation { pfme_secular, pfme_nonsecular, dfme_nonsecular, exact };

const char* to_string(Equation e);
const char* to_string(FrameTag f);

struct DensityMatrix {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    Basis basis = Basis::bare;

    cd trace() const { return m.trace(); }
    double hermiticity_error() const { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }
};

DensityMatrix ground_state();  // |g><g| in the bare basis

// |+> = c|e> + s e^{-i theta_V}|g>, |-> = -s e^{i theta_V}|e> + c|g>.
Eigen::Matrix2cd eigen_to_bare(const EigenFrame& frame, double drive_phase);
DensityMatrix to_bare(const DensityMatrix& rho, const EigenFrame& frame, double drive_phase);
DensityMatrix to_eigen(const DensityMatrix& rho, const EigenFrame& frame, double drive_phase);

struct Trajectory {
    std::vector<double> t;
    std::vector<DensityMatrix> rho;
    FrameTag frame = FrameTag::polaron;
    Equation equation = Equation::pfme_secular;
};

enum class Integrator { runge_kutta, matrix_exponential };

struct StepperOptions {
    Integrator integrator = Integrator::runge_kutta;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

// Real generator on x = (rho_++, rho_--, Re rho_+-, Im rho_+-).
Eigen::Matrix4d nonsecular_generator(const SecularRates& s, const NonSecularRates& n);

// Closed-form solution; rho0 in the eigenbasis.
Trajectory evolve_secular(const DensityMatrix& rho0, const SecularRates& rates, const std::vector<double>& t_grid);

// rho0 in the eigenbasis. The embedded Dormand-Prince stepper reports the failing step through NumericsError.
Trajectory evolve_nonsecular(const DensityMatrix& rho0, const SecularRates& s, const NonSecularRates& n,
                             const std::vector<double>& t_grid, Equation eq = Equation::pfme_nonsecular,
                             StepperOptions opt = {});

Trajectory to_basis(const Trajectory& traj, Basis target, const EigenFrame& frame, double drive_phase);

// Populations fixed, rho_eg scaled by kappa. Requires a polaron-frame trajectory in the bare basis.
Trajectory to_lab_frame(const Trajectory& traj, double kappa);

// Runs one equation from a bare-basis state and returns the bare-basis trajectory. PFME results stay in the
// polaron frame; the DFME frame differs from the lab frame only by the system-independent displacement.
Trajectory simulate(Equation eq, const RateEngine& engine, const SystemParams& sys, const DipoleGeometry& geom,
                    const DensityMatrix& rho0_bare, const std::vector<double>& t_grid, StepperOptions opt = {});

enum class SteadyMode { rate_ratio, thermal };

// Bare-basis steady state. Thermal mode: diagonal Gibbs state of (eta/2) sigma_z in the eigenbasis.
DensityMatrix steady_state(const SystemParams& sys, const DipoleGeometry& geom, const RateEngine& engine,
                           SteadyMode mode);

// rho_ee = (1 - (eps/eta) tanh(beta eta / 2)) / 2 with eta = sqrt(eps^2 + 4 kappa^2 |V|^2).
double thermal_excited_population(const SystemParams& sys, double kappa);

}  // namespace polaron
