// spectrum.hpp — regression-theorem polarisation spectrum, sum rules and parameter extraction
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/model.hpp"
#include "polaron/rates.hpp"

namespace polaron {

enum class SpectrumVariant { with_sideband, no_sideband, no_pd };
const char* to_string(SpectrumVariant v);

// lim_t <sigma_+(t + tau) sigma_-(t)> = sum_j c_j e^{lambda_j tau} in the polaron frame.
struct CorrelationModel {
    std::vector<cd> c;
    std::vector<cd> lambda;
    double rho_ee = 0.0;  // C(0), the steady excited population
    cd elastic = 0.0;     // sum of c_j with lambda_j = 0
    cd at(double tau) const;
};

// secular = false switches the regression generator to the non-secular equations.
CorrelationModel qrt_model(const SystemParams& sys, const DipoleGeometry& geom, const RateEngine& engine,
                           bool secular = true);
std::vector<cd> qrt_correlation(const std::vector<double>& tau, const SystemParams& sys, const DipoleGeometry& geom,
                                const RateEngine& engine, bool secular = true);

struct LorentzLine {
    double center = 0.0;
    double hwhm = 0.0;
    double weight = 0.0;  // integrated intensity
};

struct SpectrumSeries {
    std::vector<double> omega;      // eV, strictly increasing
    std::vector<double> intensity;  // 1/eV, continuous part only
    SpectrumVariant variant = SpectrumVariant::with_sideband;
    double elastic_weight = 0.0;  // coefficient of delta(omega) omitted from the samples
    double kappa_sq = 1.0;
    double rho_ee = 0.0;
    std::vector<LorentzLine> lines;  // analytic Lorentzian content, for diagnostics
    double tail_mass = 0.0;          // Lorentzian weight outside the grid
};

struct SpectrumOptions {
    double below = 15.0;         // grid extends to -eta - below * max(nu_c, 0.1)
    double above = 10.0;         // and to eta + above * max(nu_c, 0.1)
    double step = 0.005;         // uniform spacing in eV
    int peak_points = 801;       // tangent-mapped points per Lorentzian
    double peak_span = 4000.0;   // in half-widths
    bool secular = true;
    std::vector<double> extra_points;  // merged into the grid, widening it if needed
};

SpectrumSeries polarisation_spectrum(const SystemParams& sys, const DipoleGeometry& geom, const RateEngine& engine,
                                     SpectrumVariant variant, const SpectrumOptions& opt = {});

// Trapezoid over the grid, plus the elastic delta weight when requested.
double spectrum_power(const SpectrumSeries& s, bool include_elastic = true);
double trapezoid(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi);

struct Region {
    double lo = 0.0;
    double hi = 0.0;
};

// Sum of region integrals over p. Regions must be non-empty and disjoint.
double sideband_fraction(const SpectrumSeries& s, const std::vector<Region>& regions, double p);

struct ExtractOptions {
    double region_fwhm = 5.0;     // half-width of each region in FWHM units
    double min_peak_rel = 5e-2;   // peaks below this fraction of the tallest are ignored
    bool tail_correction = true;  // divide each region area by the Lorentzian fraction it captures
    bool include_elastic = false; // a sampled spectrum carries no delta line
};

struct PeakFit {
    double center = 0.0;
    double hwhm = 0.0;
    double area = 0.0;
    Region region;
};

struct ExtractionReport {
    std::optional<double> kappa_sq, rho_ee_inf, eta_bar, epsilon_hat, v_hat, d_delta_hat;
    double power = 0.0;
    std::vector<PeakFit> peaks;
    std::vector<std::pair<std::string, std::string>> errors;  // (field, reason)
};

// bath_shape supplies S and nu_c only; beta is passed separately.
ExtractionReport extract_parameters(const SpectrumSeries& s, double beta, const BathSpec& bath_shape,
                                    double solid_angle_factor, const ExtractOptions& opt = {});

}  // namespace polaron
