// test_rates.cpp — correlation transforms, secular and non-secular rate sets
#include <gtest/gtest.h>

#include <cmath>

#include "polaron/rates.hpp"

using namespace polaron;

namespace {

const BathSpec kBath{1.0 / kPi, 1.0, 2.0};
const BathSpec kNarrowBath{1.0 / kPi, 0.2, 2.0};

// Golden-rule values for d_Delta = 0, V = 0, eps = 1: 2 pi Omega_mumu J(1) (N + 1) and 2 pi Omega_mumu J(1) N.
constexpr double kSomeDown = 7.128635041288081e-04;
constexpr double kSomeUp = 9.647558424031646e-05;
constexpr double kSomeDownNarrow = 3.264137629645228e-04;

const RateEngine& engine() {
    static const RateEngine e(kBath);
    return e;
}

const RateEngine& narrow_engine() {
    static const RateEngine e(kNarrowBath);
    return e;
}

DipoleGeometry geom(double d, double theta = 0.0) {
    DipoleGeometry g;
    g.d_delta = d;
    g.theta_mu_delta = theta;
    return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(SomeLimit, GoldenRuleWithoutPermanentDipoles) {
    const SecularRates r = engine().secular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(0.0));
    EXPECT_LT(rel(r.gamma_down, kSomeDown), 1e-8);
    EXPECT_LT(rel(r.gamma_up, kSomeUp), 1e-8);
    const SecularRates n = narrow_engine().secular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(0.0));
    EXPECT_LT(rel(n.gamma_down, kSomeDownNarrow), 1e-8);
}

TEST(SomeLimit, SeriesRouteAgrees) {
    RateOptions o;
    o.route = Route::series;
    const RateEngine s(kBath, o);
    const SecularRates r = s.secular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(0.0));
    EXPECT_LT(rel(r.gamma_down, kSomeDown), 1e-8);
}

TEST(DetailedBalance, UndrivenRatesObeyKms) {
    for (double d : {0.05, 0.1, 0.26, 0.5}) {
        for (const RateEngine* e : {&engine(), &narrow_engine()}) {
            const SecularRates r = e->secular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(d));
            EXPECT_NEAR(r.gamma_up / r.gamma_down, std::exp(-2.0), 1e-4) << d;
            EXPECT_NEAR(r.gamma_d / r.gamma_down, 0.5 * (1.0 + std::exp(-2.0)), 1e-4) << d;
        }
    }
}

TEST(DetailedBalance, HoldsForTheEffectiveSplitting) {
    // With V = 0 the up/down ratio is exactly e^{-beta eta}, for any eta.
    for (double eps : {0.4, 1.0, 1.7}) {
        const SecularRates r = engine().secular_rates(make_system(eps, 0.0, 0.0, 2.0), geom(0.2));
        EXPECT_NEAR(r.gamma_up / r.gamma_down, std::exp(-2.0 * eps), 1e-4 * std::exp(-2.0 * eps)) << eps;
    }
}

TEST(Channels, PerpendicularDipolesSilenceCrossTerms) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    const Coupling c = engine().couple(sys, geom(0.2, kPi / 2));
    for (CorrKind k : {CorrKind::DagDot, CorrKind::DotDag, CorrKind::DagDag, CorrKind::DotDot}) {
        const RateComponent r = engine().corr_ft(k, 1.0, c);
        EXPECT_EQ(r.two_photon, cd(0.0, 0.0));
        EXPECT_EQ(r.drive_one, cd(0.0, 0.0));
        EXPECT_NE(r.one_photon, cd(0.0, 0.0));
    }
}

TEST(Channels, DriveOneVanishesWithoutDrive) {
    const Coupling c = engine().couple(make_system(1.0, 0.0, 0.0, 2.0), geom(0.2));
    for (CorrKind k : {CorrKind::DagDot, CorrKind::DotDag})
        EXPECT_EQ(engine().corr_ft(k, 1.0, c).drive_one, cd(0.0, 0.0));
    EXPECT_EQ(engine().corr_ft(CorrKind::DagDot, 1.0, c).drive_zero, cd(0.0, 0.0));
}

TEST(Channels, CoefficientsOfTheEigenbasisOperators) {
    const EigenFrame f = build_eigenframe(make_system(1.0, 0.3, 0.0, 2.0), 0.9);
    const double c = f.cos_half(), s = f.sin_half();
    const auto m = channel_coefficients(Channel::minus, f);
    const auto p = channel_coefficients(Channel::plus, f);
    const auto z = channel_coefficients(Channel::z, f);
    EXPECT_DOUBLE_EQ(m[0], -s * s);
    EXPECT_DOUBLE_EQ(m[1], c * c);
    EXPECT_DOUBLE_EQ(p[0], c * c);
    EXPECT_DOUBLE_EQ(p[1], -s * s);
    EXPECT_DOUBLE_EQ(z[0], s * c);
    EXPECT_DOUBLE_EQ(z[1], s * c);
}

TEST(Phase, TwoPiPeriodicity) {
    DipoleGeometry g = geom(0.2);
    g.vartheta_mu = 0.7;
    DipoleGeometry h = g;
    h.vartheta_mu = 0.7 + kTwoPi;
    const SystemParams sys = make_system(1.0, 0.05, 0.3, 2.0);
    const SystemParams sys2 = make_system(1.0, 0.05, 0.3 - 2.0 * kTwoPi, 2.0);
    const SecularRates a = engine().secular_rates(sys, g);
    const SecularRates b = engine().secular_rates(sys2, h);
    EXPECT_LT(rel(b.gamma_down, a.gamma_down), 1e-12);
    EXPECT_LT(rel(b.gamma_d, a.gamma_d), 1e-12);
    EXPECT_LT(rel(b.eta_bar, a.eta_bar), 1e-12);
}

TEST(Phase, DriveOneFollowsCosineOfRelativePhase) {
    // Re Gamma_V1 flips sign between theta_muV = 0 and pi at fixed |V|.
    const Coupling c0 = engine().couple(make_system(1.0, 0.02, 0.0, 2.0), geom(0.2));
    const Coupling cp = engine().couple(make_system(1.0, 0.02, kPi, 2.0), geom(0.2));
    const cd a = engine().corr_ft(CorrKind::DotDag, 1.0, c0).drive_one;
    const cd b = engine().corr_ft(CorrKind::DotDag, 1.0, cp).drive_one;
    EXPECT_NE(a.real(), 0.0);
    EXPECT_NEAR(a.real(), -b.real(), 1e-12 * std::abs(a));
}

TEST(Phase, AntiParallelEqualsDrivePhaseShift) {
    // Flipping d_Delta is the same as shifting the drive by pi for the cross term.
    const SecularRates a = engine().secular_rates(make_system(1.0, 0.05, 0.0, 2.0), geom(0.2, kPi));
    const SecularRates b = engine().secular_rates(make_system(1.0, 0.05, kPi, 2.0), geom(0.2, 0.0));
    EXPECT_LT(rel(a.gamma_down, b.gamma_down), 1e-10);
}

TEST(NonSecular, CouplingsVanishWithoutDrive) {
    const NonSecularRates n = engine().nonsecular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(0.3));
    EXPECT_EQ(n.gamma_bar, cd(0.0, 0.0));
    EXPECT_EQ(n.k_plus, cd(0.0, 0.0));
    EXPECT_EQ(n.k_minus, cd(0.0, 0.0));
}

TEST(Rates, PositiveAcrossOrientationSweep) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    for (int k = 0; k <= 20; ++k) {
        const SecularRates r = engine().secular_rates(sys, with_signed_delta(DipoleGeometry{}, -0.5 + 0.05 * k));
        EXPECT_GT(r.gamma_down, 0.0);
        EXPECT_GT(r.gamma_up, 0.0);
        EXPECT_GE(r.gamma_d, 0.5 * (r.gamma_down + r.gamma_up) * (1.0 - 1e-9));
    }
}

TEST(Rates, EtaBarCarriesLambShiftOnly) {
    const SystemParams sys = make_system(1.0, 0.25, 0.0, 2.0);
    const RateTable t = engine().rate_table(sys, geom(0.1));
    const SecularRates r = t.secular();
    EXPECT_NEAR(r.eta, std::sqrt(1.0 + 4.0 * 0.8551120345835312 * 0.0625), 1e-8);
    const double shift = (t.at(Channel::minus, Channel::minus, 2) - t.at(Channel::plus, Channel::plus, 0)).imag();
    EXPECT_DOUBLE_EQ(r.eta_bar, r.eta + shift);
    // Without dipoles there is no shift at all.
    DipoleGeometry none = geom(0.0);
    none.d_mu = 0.0;
    const SecularRates z = engine().secular_rates(sys, none);
    EXPECT_EQ(z.eta_bar, z.eta);
}

TEST(Rates, DfmeReducesToPolaronWithoutPermanentDipoles) {
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    const SecularRates a = engine().rate_table(sys, geom(0.0)).secular();
    const SecularRates b = engine().dfme_table(sys, geom(0.0)).secular();
    EXPECT_LT(rel(b.gamma_down, a.gamma_down), 1e-8);
    EXPECT_LT(rel(b.gamma_d, a.gamma_d), 1e-8);
}

TEST(Rates, SeriesRouteConvergesAsDipoleVanishes) {
    // The single-mode truncation is exact at d_Delta = 0; its error grows with the dressing.
    RateOptions o;
    o.route = Route::series;
    const RateEngine s(kBath, o);
    const SystemParams sys = make_system(1.0, 0.0, 0.0, 2.0);
    double last = 0.0;
    for (double d : {0.01, 0.05, 0.1, 0.26}) {
        const double e = rel(s.secular_rates(sys, geom(d)).gamma_down, engine().secular_rates(sys, geom(d)).gamma_down);
        EXPECT_GT(e, last) << d;
        last = e;
    }
    EXPECT_LT(rel(s.secular_rates(sys, geom(0.01)).gamma_down, engine().secular_rates(sys, geom(0.01)).gamma_down), 1e-3);
}

TEST(Options, InvalidGridIsAConfigError) {
    RateOptions o;
    o.ds = 5.0;
    o.s_max = 1.0;
    EXPECT_THROW(RateEngine(kBath, o), ConfigError);
}
