// model.hpp — emitter parameters, dipole geometry, coupling weights and the driven eigenframe
#pragma once

#include <stdexcept>
#include <string>

namespace polaron {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFreeSpaceFactor = 8.0 * kPi / 3.0;

// Invalid user input. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& reason);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A quadrature, series or integrator missed its tolerance. The CLI maps this to exit code 2.
class NumericsError : public std::runtime_error {
public:
    NumericsError(std::string module, const std::string& what, double achieved_error);
    const std::string& module() const noexcept { return module_; }
    double achieved_error() const noexcept { return achieved_; }

private:
    std::string module_;
    double achieved_;
};

// Energies in eV, times in 1/eV.
struct SystemParams {
    double epsilon = 1.0;
    double drive_magnitude = 0.0;
    double drive_phase = 0.0;  // [0, 2pi)
    double beta = 2.0;
};

struct DipoleGeometry {
    double d_mu = 0.01;
    double d_delta = 0.0;
    double d_D = 0.0;  // cancels in the displaced frame; never read by the rate path
    double theta_mu_delta = 0.0;
    double vartheta_mu = 0.0;
    double solid_angle_factor = kFreeSpaceFactor;
};

struct CouplingWeights {
    double omega_mumu = 0.0;
    double omega_deltadelta = 0.0;
    double omega_mudelta = 0.0;
    double h_mudelta_phase = 0.0;  // carried by the transition dipole
    double h_mumu_phase = 0.0;     // d_mu . conj(d_mu) is real
};

struct EigenFrame {
    double eta = 0.0;
    double mixing_angle = 0.0;
    double kappa = 1.0;

    double cos_half() const;
    double sin_half() const;
};

double wrap_angle(double a);

void validate(const SystemParams& sys);
void validate(const DipoleGeometry& geom);

// Validates and stores the drive phase in [0, 2pi).
SystemParams make_system(double epsilon, double drive_magnitude, double drive_phase, double beta);

CouplingWeights coupling_weights(const DipoleGeometry& geom);

// Accepts epsilon >= 0 so the resonant limit can be probed directly.
EigenFrame build_eigenframe(const SystemParams& sys, double kappa);

// theta_{mu V} = theta_mu - theta_V, wrapped.
double relative_phase(const SystemParams& sys, const DipoleGeometry& geom);

// Signed sweep coordinate: x < 0 means anti-parallel permanent and transition dipoles.
DipoleGeometry with_signed_delta(DipoleGeometry geom, double x);

}  // namespace polaron
