// model.cpp — parameter validation, coupling weights and eigenframe construction
#include "polaron/model.hpp"

#include <cmath>

namespace polaron {

ConfigError::ConfigError(std::string field, const std::string& reason)
    : std::runtime_error(field + ": " + reason), field_(std::move(field)) {}

NumericsError::NumericsError(std::string module, const std::string& what, double achieved_error)
    : std::runtime_error(module + ": " + what), module_(std::move(module)), achieved_(achieved_error) {}

double EigenFrame::cos_half() const { return std::cos(0.5 * mixing_angle); }
double EigenFrame::sin_half() const { return std::sin(0.5 * mixing_angle); }

double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

void validate(const SystemParams& sys) {
    if (!std::isfinite(sys.epsilon) || sys.epsilon <= 0.0) throw ConfigError("epsilon", "must be > 0");
    if (!std::isfinite(sys.beta) || sys.beta <= 0.0) throw ConfigError("beta", "must be > 0");
    if (!std::isfinite(sys.drive_magnitude) || sys.drive_magnitude < 0.0)
        throw ConfigError("drive_magnitude", "must be >= 0");
    if (!std::isfinite(sys.drive_phase)) throw ConfigError("drive_phase", "must be finite");
}

void validate(const DipoleGeometry& geom) {
    auto nonneg = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError(name, "must be >= 0");
    };
    nonneg(geom.d_mu, "d_mu");
    nonneg(geom.d_delta, "d_delta");
    nonneg(geom.d_D, "d_D");
    if (!std::isfinite(geom.theta_mu_delta)) throw ConfigError("theta_mu_delta", "must be finite");
    if (!std::isfinite(geom.vartheta_mu)) throw ConfigError("vartheta_mu", "must be finite");
    const double f = geom.solid_angle_factor;
    if (std::abs(f - kFreeSpaceFactor) > 1e-12 && std::abs(f - 1.0) > 1e-12)
        throw ConfigError("solid_angle_factor", "must be 8*pi/3 or 1");
}

SystemParams make_system(double epsilon, double drive_magnitude, double drive_phase, double beta) {
    SystemParams sys{epsilon, drive_magnitude, drive_phase, beta};
    validate(sys);
    sys.drive_phase = wrap_angle(drive_phase);
    return sys;
}

CouplingWeights coupling_weights(const DipoleGeometry& geom) {
    const double f = geom.solid_angle_factor;
    CouplingWeights w;
    w.omega_mumu = f * geom.d_mu * geom.d_mu;
    w.omega_deltadelta = f * geom.d_delta * geom.d_delta;
    w.omega_mudelta = f * geom.d_mu * geom.d_delta;
    w.h_mudelta_phase = wrap_angle(geom.vartheta_mu);
    w.h_mumu_phase = 0.0;
    return w;
}

EigenFrame build_eigenframe(const SystemParams& sys, double kappa) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("kappa", "must lie in (0, 1]");
    const double v = kappa * sys.drive_magnitude;
    EigenFrame fr;
    fr.kappa = kappa;
    fr.eta = std::sqrt(sys.epsilon * sys.epsilon + 4.0 * v * v);
    if (!(fr.eta > 0.0)) throw ConfigError("epsilon", "eta vanishes for epsilon = 0 and zero drive");
    fr.mixing_angle = std::atan2(2.0 * v, sys.epsilon);
    return fr;
}

double relative_phase(const SystemParams& sys, const DipoleGeometry& geom) {
    return wrap_angle(geom.vartheta_mu - sys.drive_phase);
}

DipoleGeometry with_signed_delta(DipoleGeometry geom, double x) {
    geom.d_delta = std::abs(x);
    geom.theta_mu_delta = x < 0.0 ? kPi : 0.0;
    return geom;
}

}  // namespace polaron
