// test_spectrum.cpp — regression-theorem correlations, sum rules and parameter extraction
#include <gtest/gtest.h>

#include <cmath>

#include "polaron/dynamics.hpp"
#include "polaron/spectrum.hpp"

using namespace polaron;

namespace {

const BathSpec kBath{1.0 / kPi, 1.0, 2.0};

const RateEngine& engine() {
    static const RateEngine e(kBath);
    return e;
}

DipoleGeometry geom(double d) {
    DipoleGeometry g;
    g.d_delta = d;
    return g;
}

// A Lorentzian of known area on a uniform grid, in the layout produced by polarisation_spectrum.
SpectrumSeries lorentzian(double center, double hwhm, double area) {
    SpectrumSeries s;
    for (int k = 0; k <= 40000; ++k) {
        const double w = -3.0 + 6.0 * k / 40000.0;
        s.omega.push_back(w);
        s.intensity.push_back(area / kPi * hwhm / ((w - center) * (w - center) + hwhm * hwhm));
    }
    return s;
}

}  // namespace

TEST(Correlation, ZeroDelayIsSteadyExcitedPopulation) {
    for (double v : {0.0, 0.05, 0.25}) {
        const SystemParams sys = make_system(1.0, v, 0.3, 2.0);
        const CorrelationModel m = qrt_model(sys, geom(0.1), engine());
        EXPECT_NEAR(std::abs(m.at(0.0) - m.rho_ee), 0.0, 1e-12);
        const DensityMatrix ss = steady_state(sys, geom(0.1), engine(), SteadyMode::rate_ratio);
        EXPECT_NEAR(m.rho_ee, ss.m(0, 0).real(), 1e-10);
    }
}

TEST(Correlation, ModesDecayOrAreStationary) {
    const CorrelationModel m = qrt_model(make_system(1.0, 0.25, 0.0, 2.0), geom(0.1), engine(), false);
    int zero = 0;
    for (const cd& l : m.lambda) {
        EXPECT_LE(l.real(), 1e-14);
        if (std::abs(l) < 1e-12) ++zero;
    }
    EXPECT_EQ(zero, 1);
}

TEST(Correlation, ElasticPartVanishesWithoutDrive) {
    const CorrelationModel m = qrt_model(make_system(1.0, 0.0, 0.0, 2.0), geom(0.1), engine());
    EXPECT_NEAR(std::abs(m.elastic), 0.0, 1e-14);
    const auto c = qrt_correlation({0.0, 100.0}, make_system(1.0, 0.0, 0.0, 2.0), geom(0.1), engine());
    EXPECT_NEAR(std::abs(c[0] - m.rho_ee), 0.0, 1e-12);
}

TEST(SumRules, PowerAndSidebandFractionWeakDipole) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    const SpectrumSeries s = polarisation_spectrum(sys, geom(0.05), engine(), SpectrumVariant::with_sideband);
    const SpectrumSeries x = polarisation_spectrum(sys, geom(0.05), engine(), SpectrumVariant::no_sideband);
    const double P = spectrum_power(s);
    EXPECT_LT(std::abs(P - kPi * s.rho_ee) / P, 1e-2);
    EXPECT_LT(std::abs(spectrum_power(x) / P - s.kappa_sq), 5e-3);
}

TEST(Variants, NoPermanentDipoleIsUndressed) {
    const SystemParams sys = make_system(1.0, 0.25, 0.0, 2.0);
    const SpectrumSeries n = polarisation_spectrum(sys, geom(0.1), engine(), SpectrumVariant::no_pd);
    EXPECT_DOUBLE_EQ(n.kappa_sq, 1.0);
    EXPECT_STREQ(to_string(n.variant), "no_pd");
    const double P = spectrum_power(n);
    EXPECT_LT(std::abs(P - kPi * n.rho_ee) / P, 1e-2);
}

TEST(Variants, SidebandOnlyAddsWeightAwayFromLines) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    SpectrumOptions o;
    const SpectrumSeries a = polarisation_spectrum(sys, geom(0.05), engine(), SpectrumVariant::with_sideband, o);
    o.extra_points = a.omega;
    const SpectrumSeries b = polarisation_spectrum(sys, geom(0.05), engine(), SpectrumVariant::no_sideband, o);
    ASSERT_EQ(a.omega, b.omega);
    // Far below the lines the Lorentzian tails are negligible and the sideband dominates.
    std::size_t k = 0;
    while (a.omega[k] < -3.0) ++k;
    EXPECT_GT(a.intensity[k], 10.0 * std::abs(b.intensity[k]));
    EXPECT_DOUBLE_EQ(a.elastic_weight, b.elastic_weight);
}

TEST(Grid, ExtraPointsAreMergedAndWidenTheRange) {
    SpectrumOptions o;
    o.extra_points = {-40.0, 0.123456, 30.0};
    const SpectrumSeries s =
        polarisation_spectrum(make_system(1.0, 0.05, 0.0, 2.0), geom(0.05), engine(), SpectrumVariant::no_sideband, o);
    EXPECT_DOUBLE_EQ(s.omega.front(), -40.0);
    EXPECT_DOUBLE_EQ(s.omega.back(), 30.0);
    EXPECT_TRUE(std::is_sorted(s.omega.begin(), s.omega.end()));
    EXPECT_NE(std::find(s.omega.begin(), s.omega.end(), 0.123456), s.omega.end());
    SpectrumOptions bad;
    bad.step = 0.0;
    EXPECT_THROW(polarisation_spectrum(make_system(1.0, 0.05, 0.0, 2.0), geom(0.05), engine(),
                                       SpectrumVariant::no_sideband, bad),
                 ConfigError);
}

TEST(Integration, TrapezoidIsExactForLinearData) {
    const std::vector<double> x{0.0, 0.5, 2.0, 3.0}, y{1.0, 2.0, 5.0, 7.0};
    EXPECT_DOUBLE_EQ(trapezoid(x, y, 0.0, 3.0), 1.5 * 0.5 + 3.5 * 1.5 + 6.0);
    EXPECT_NEAR(trapezoid(x, y, 0.25, 2.5), 0.25 * 1.75 + 3.5 * 1.5 + 0.5 * 5.5, 1e-14);
}

TEST(Regions, OverlapAndEmptyRejected) {
    const SpectrumSeries s = lorentzian(0.0, 0.01, 1.0);
    EXPECT_THROW(sideband_fraction(s, {{-0.1, 0.1}, {0.05, 0.2}}, 1.0), ConfigError);
    EXPECT_THROW(sideband_fraction(s, {{0.1, 0.1}}, 1.0), ConfigError);
    EXPECT_NEAR(sideband_fraction(s, {{-2.0, 2.0}}, 1.0), 1.0 - 2.0 / kPi * std::atan(0.01 / 2.0), 1e-6);
}

TEST(Extraction, SingleLorentzianRecoversAreaAndCentre) {
    const SpectrumSeries s = lorentzian(1.0, 0.002, 0.3);
    const ExtractionReport r = extract_parameters(s, 2.0, kBath, kFreeSpaceFactor);
    ASSERT_EQ(r.peaks.size(), 1u);
    EXPECT_NEAR(r.peaks[0].center, 1.0, 1e-6);
    EXPECT_NEAR(r.peaks[0].hwhm, 0.002, 2e-5);
    EXPECT_NEAR(r.peaks[0].area, 0.3, 3e-3);
    ASSERT_TRUE(r.kappa_sq.has_value());
    EXPECT_NEAR(*r.kappa_sq, 1.0, 1e-2);
    ASSERT_TRUE(r.eta_bar.has_value());
    EXPECT_NEAR(*r.eta_bar, 1.0, 1e-6);
}

TEST(Extraction, EmptySpectrumReportsErrorsInsteadOfValues) {
    SpectrumSeries s;
    for (int k = 0; k <= 200; ++k) s.omega.push_back(-1.0 + 0.01 * k);
    s.intensity.assign(s.omega.size(), 0.0);
    const ExtractionReport r = extract_parameters(s, 2.0, kBath, kFreeSpaceFactor);
    EXPECT_FALSE(r.kappa_sq.has_value());
    EXPECT_FALSE(r.errors.empty());
}

TEST(Extraction, WeakDipoleRoundTrip) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    const SpectrumSeries s = polarisation_spectrum(sys, geom(0.05), engine(), SpectrumVariant::with_sideband);
    const ExtractionReport r = extract_parameters(s, 2.0, kBath, kFreeSpaceFactor);
    ASSERT_TRUE(r.kappa_sq && r.rho_ee_inf && r.epsilon_hat && r.d_delta_hat);
    EXPECT_NEAR(*r.kappa_sq, 0.953, 0.01);
    EXPECT_NEAR(*r.rho_ee_inf, 0.119, 0.01);
    EXPECT_NEAR(*r.epsilon_hat, 1.004, 0.08);
    EXPECT_NEAR(*r.d_delta_hat, 0.050, 0.01);
}
