// test_model.cpp — coupling weights, eigenframe and input validation
#include <gtest/gtest.h>

#include <cmath>

#include "polaron/model.hpp"

using namespace polaron;

TEST(CouplingWeights, FreeSpaceProduct) {
    DipoleGeometry g;
    g.d_mu = 0.01;
    g.d_delta = 0.05;
    const CouplingWeights w = coupling_weights(g);
    EXPECT_NEAR(w.omega_mudelta, 4.18879020e-3, 1e-11);
    EXPECT_NEAR(w.omega_deltadelta, kFreeSpaceFactor * 0.0025, 1e-15);
    EXPECT_NEAR(w.omega_mumu, kFreeSpaceFactor * 1e-4, 1e-17);
}

TEST(CouplingWeights, AlignedFieldDropsSolidAngle) {
    DipoleGeometry g;
    g.d_delta = 0.05;
    g.solid_angle_factor = 1.0;
    EXPECT_DOUBLE_EQ(coupling_weights(g).omega_mudelta, 5e-4);
}

TEST(CouplingWeights, SymmetricUnderSwap) {
    DipoleGeometry a, b;
    a.d_mu = 0.03;
    a.d_delta = 0.2;
    b.d_mu = 0.2;
    b.d_delta = 0.03;
    EXPECT_DOUBLE_EQ(coupling_weights(a).omega_mudelta, coupling_weights(b).omega_mudelta);
}

TEST(Validation, RejectsOtherSolidAngleFactors) {
    DipoleGeometry g;
    g.solid_angle_factor = 2.0;
    try {
        validate(g);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "solid_angle_factor");
    }
}

TEST(Validation, RejectsNegativeDipolesAndTemperature) {
    DipoleGeometry g;
    g.d_delta = -0.1;
    EXPECT_THROW(validate(g), ConfigError);
    EXPECT_THROW(make_system(1.0, 0.0, 0.0, 0.0), ConfigError);
    EXPECT_THROW(make_system(1.0, -0.1, 0.0, 2.0), ConfigError);
    EXPECT_THROW(make_system(0.0, 0.1, 0.0, 2.0), ConfigError);
}

TEST(Eigenframe, UndrivenIsTheBareBasis) {
    const EigenFrame f = build_eigenframe(make_system(1.0, 0.0, 0.0, 2.0), 0.9);
    EXPECT_DOUBLE_EQ(f.eta, 1.0);
    EXPECT_DOUBLE_EQ(f.cos_half(), 1.0);
    EXPECT_DOUBLE_EQ(f.sin_half(), 0.0);
}

TEST(Eigenframe, SplittingUsesRenormalisedDrive) {
    const double k = std::sqrt(0.855);
    const EigenFrame f = build_eigenframe(make_system(1.0, 0.25, 0.0, 2.0), k);
    EXPECT_NEAR(f.eta, std::sqrt(1.0 + 4.0 * 0.855 * 0.0625), 1e-14);
    EXPECT_NEAR(f.cos_half() * f.cos_half() - f.sin_half() * f.sin_half(), 1.0 / f.eta, 1e-14);
    EXPECT_NEAR(2.0 * f.sin_half() * f.cos_half(), 2.0 * k * 0.25 / f.eta, 1e-14);
}

TEST(Eigenframe, RejectsKappaOutsideUnitInterval) {
    EXPECT_THROW(build_eigenframe(make_system(1.0, 0.1, 0.0, 2.0), 0.0), ConfigError);
    EXPECT_THROW(build_eigenframe(make_system(1.0, 0.1, 0.0, 2.0), 1.5), ConfigError);
}

TEST(Angles, WrapIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_NEAR(wrap_angle(-kPi / 2), 1.5 * kPi, 1e-15);
    EXPECT_NEAR(wrap_angle(5 * kPi), kPi, 1e-14);
    EXPECT_LT(wrap_angle(kTwoPi), kTwoPi);
    EXPECT_DOUBLE_EQ(make_system(1.0, 0.1, kTwoPi + 0.5, 2.0).drive_phase, wrap_angle(0.5 + kTwoPi));
}

TEST(Angles, RelativePhaseIsDipoleMinusDrive) {
    DipoleGeometry g;
    g.vartheta_mu = 0.3;
    EXPECT_NEAR(relative_phase(make_system(1.0, 0.1, 1.0, 2.0), g), wrap_angle(-0.7), 1e-15);
}

TEST(SignedSweep, NegativeMeansAntiParallel) {
    const DipoleGeometry n = with_signed_delta(DipoleGeometry{}, -0.2);
    EXPECT_DOUBLE_EQ(n.d_delta, 0.2);
    EXPECT_DOUBLE_EQ(n.theta_mu_delta, kPi);
    const DipoleGeometry p = with_signed_delta(DipoleGeometry{}, 0.2);
    EXPECT_DOUBLE_EQ(p.theta_mu_delta, 0.0);
}

TEST(Errors, CarryFieldAndModule) {
    const ConfigError c("beta", "must be > 0");
    EXPECT_EQ(c.field(), "beta");
    EXPECT_STREQ(c.what(), "beta: must be > 0");
    const NumericsError n("rates", "no convergence", 1e-3);
    EXPECT_EQ(n.module(), "rates");
    EXPECT_DOUBLE_EQ(n.achieved_error(), 1e-3);
}
