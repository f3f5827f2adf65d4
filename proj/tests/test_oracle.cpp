// test_oracle.cpp — direct time-domain quadrature and the exact few-mode reference
#include <gtest/gtest.h>

#include <cmath>

#include "polaron/oracle.hpp"

using namespace polaron;

namespace {

const BathSpec kBath{1.0 / kPi, 1.0, 2.0};

const QuadratureOracle& oracle() {
    static const QuadratureOracle o(kBath);
    return o;
}

const RateEngine& engine() {
    static const RateEngine e(kBath);
    return e;
}

DipoleGeometry geom(double d, double theta = 0.0) {
    DipoleGeometry g;
    g.d_delta = d;
    g.theta_mu_delta = theta;
    return g;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Quadrature, KernelsConverged) { EXPECT_LE(oracle().kernel_error(), 1e-8); }

TEST(Quadrature, GoldenRuleLimit) {
    // 2 pi Omega_mumu J(1) (N(1) + 1) for d_Delta = 0, V = 0.
    const SecularRates r = oracle().secular_rates(make_system(1.0, 0.0, 0.0, 2.0), geom(0.0));
    EXPECT_LT(std::abs(r.gamma_down - 7.128635041288081e-04) / 7.128635041288081e-04, 1e-6);
}

TEST(Quadrature, StrongDipoleFrozenReference) {
    // d_Delta = 0.26, V = 0: Fourier kernels by adaptive quadrature, transforms by time-domain Simpson.
    const SystemParams sys = make_system(1.0, 0.0, 0.0, 2.0);
    const SecularRates o = oracle().secular_rates(sys, geom(0.26));
    const SecularRates e = engine().secular_rates(sys, geom(0.26));
    EXPECT_LT(std::abs(o.gamma_down - 3.4730586811783186e-04) / 3.4730586811783186e-04, 1e-5);
    EXPECT_LT(std::abs(o.gamma_up - 4.700273530332624e-05) / 4.700273530332624e-05, 1e-5);
    EXPECT_LT(std::abs(e.gamma_down - 3.4730586811783186e-04) / 3.4730586811783186e-04, 1e-5);
    EXPECT_LT(std::abs(e.gamma_up - 4.700273530332624e-05) / 4.700273530332624e-05, 1e-5);
}

TEST(Quadrature, MatchesRateEngineForEveryKind) {
    const SystemParams sys = make_system(1.0, 0.05, 0.4, 2.0);
    const DipoleGeometry g = geom(0.26);
    const Coupling c = engine().couple(sys, g);
    const double eta = build_eigenframe(sys, std::sqrt(c.kappa_sq)).eta;
    for (CorrKind k : {CorrKind::DagDot, CorrKind::DotDag, CorrKind::DagDag, CorrKind::DotDot})
        for (double w : {-eta, 0.0, eta}) {
            const RateComponent a = engine().corr_ft(k, w, c);
            const RateComponent b = oracle().corr_ft(k, w, sys, g);
            EXPECT_LT(rel(a.total(), b.total()), 1e-3) << int(k) << " w=" << w;
        }
}

TEST(Quadrature, SecularRatesMatchEngine) {
    for (double d : {0.26, -0.3, 0.5}) {
        const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
        const DipoleGeometry g = with_signed_delta(DipoleGeometry{}, d);
        const SecularRates a = engine().secular_rates(sys, g);
        const SecularRates b = oracle().secular_rates(sys, g);
        EXPECT_LT(std::abs(a.gamma_down - b.gamma_down) / b.gamma_down, 1e-3) << d;
        EXPECT_LT(std::abs(a.gamma_up - b.gamma_up) / b.gamma_up, 1e-3) << d;
        EXPECT_LT(std::abs(a.gamma_d - b.gamma_d) / b.gamma_d, 1e-3) << d;
    }
}

TEST(Quadrature, SuppressedRateLimitedByAbsoluteFloor) {
    // Near d_Delta = 0.1 at V = 0.05 the decay rate cancels to ~1e-9 eV while each channel is ~1e-3 eV,
    // so only absolute agreement against the channel scale is meaningful there.
    const SystemParams sys = make_system(1.0, 0.05, 0.0, 2.0);
    const SecularRates a = engine().secular_rates(sys, geom(0.1));
    const SecularRates b = oracle().secular_rates(sys, geom(0.1));
    const double scale = engine().secular_rates(sys, geom(0.0)).gamma_down;
    EXPECT_LT(b.gamma_down, 1e-4 * scale);
    EXPECT_LT(std::abs(a.gamma_down - b.gamma_down), 1e-6 * scale);
    EXPECT_LT(std::abs(a.gamma_up - b.gamma_up), 1e-6 * scale);
}

TEST(Quadrature, FreeFunctionUsesDefaultOptions) {
    const SystemParams sys = make_system(1.0, 0.0, 0.0, 2.0);
    const cd a = numeric_corr_ft(CorrKind::DotDag, 1.0, sys, geom(0.1), kBath).total();
    const cd b = oracle().corr_ft(CorrKind::DotDag, 1.0, sys, geom(0.1)).total();
    EXPECT_EQ(a, b);
}

TEST(Discretisation, EqualReorganisationBinsAreExact) {
    DipoleGeometry g = geom(0.5);
    g.solid_angle_factor = 1.0;
    for (int n : {1, 4, 8}) {
        const DiscreteBath db = discretise_bath(kBath, g, n);
        ASSERT_EQ(db.size(), static_cast<std::size_t>(n));
        EXPECT_LT(db.lambda_error, 1e-12);
        EXPECT_LT(db.mu2_error, 1e-12);
        EXPECT_TRUE(std::is_sorted(db.nu.begin(), db.nu.end()));
        const EffectiveParams e = effective_parameters(db, make_system(0.36, 0.0064, kPi, 2.0));
        // G_DeltaDelta = 2 d^2 sum g_k^2 / nu_k = 2 d^2 lambda.
        EXPECT_NEAR(e.g_deltadelta, 2.0 * 0.25 * 2.0 / kPi, 1e-12);
        EXPECT_NEAR(e.epsilon_tilde, 0.36 + 4.0 * 0.25 * 2.0 / kPi, 1e-12);
    }
}

TEST(Discretisation, RenormalisationErrorShrinksWithModes) {
    const DiscreteBath a = discretise_bath(kBath, geom(0.5), 2);
    const DiscreteBath b = discretise_bath(kBath, geom(0.5), 8);
    EXPECT_LT(b.phi0_error, a.phi0_error);
}

TEST(Discretisation, CollinearDipolesOnly) {
    EXPECT_THROW(discretise_bath(kBath, geom(0.5, kPi / 3), 4), ConfigError);
    EXPECT_NO_THROW(discretise_bath(kBath, geom(0.5, kPi), 4));
    EXPECT_THROW(discretise_bath(kBath, geom(0.5), 0), ConfigError);
    EXPECT_EQ(discretise_bath({0.0, 1.0, 2.0}, geom(0.5), 4).size(), 0u);
}

TEST(Fock, DimensionAndLimit) {
    FockConfig fc{{3, 2, 1}, 4096};
    EXPECT_EQ(fc.dimension(), 2u * 4u * 3u * 2u);
    fc.max_dimension = 40;
    EXPECT_THROW(fc.dimension(), ConfigError);
    EXPECT_THROW((FockConfig{{0}, 4096}.dimension()), ConfigError);
}

TEST(Hamiltonian, HermitianWithMatchingDimension) {
    const DiscreteBath db = discretise_bath(kBath, geom(0.5), 3);
    const FockConfig fc{{2, 2, 2}, 4096};
    const Eigen::MatrixXcd h = build_effective_hamiltonian(db, make_system(0.36, 0.0064, 0.0, 2.0), fc);
    EXPECT_EQ(h.rows(), 54);
    EXPECT_LT((h - h.adjoint()).norm(), 1e-14);
    EXPECT_THROW(build_effective_hamiltonian(db, make_system(0.36, 0.0, 0.0, 2.0), FockConfig{{2, 2}, 4096}), ConfigError);
}

TEST(Hamiltonian, IndependentBosonLimitKeepsBareSplitting) {
    // Without transition dipoles or drive the zero-phonon gap of the excited and ground manifolds is epsilon.
    DipoleGeometry g = geom(0.5);
    g.d_mu = 0.0;
    g.solid_angle_factor = 1.0;
    const DiscreteBath db = discretise_bath(kBath, g, 1);
    const FockConfig fc{{40}, 4096};
    const Eigen::MatrixXcd h = build_effective_hamiltonian(db, make_system(0.36, 0.0, 0.0, 2.0), fc);
    const Eigen::Index n = h.rows() / 2;
    const double e0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h.topLeftCorner(n, n)).eigenvalues()(0);
    const double g0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h.bottomRightCorner(n, n)).eigenvalues()(0);
    EXPECT_NEAR(e0 - g0, 0.36, 1e-9);
}

TEST(Exact, GroundStateIsStationaryWithoutCoupling) {
    DipoleGeometry g = geom(0.5);
    g.d_mu = 0.0;
    const DiscreteBath db = discretise_bath(kBath, g, 2);
    const FockConfig fc{{4, 4}, 4096};
    const SystemParams sys = make_system(0.36, 0.0, 0.0, 2.0);
    const ExactResult r = exact_evolve(build_effective_hamiltonian(db, sys, fc), db, fc, 2.0, {0.0, 10.0, 1e3});
    for (const auto& rho : r.trajectory.rho) {
        EXPECT_NEAR(rho.m(1, 1).real(), 1.0, 1e-12);
        EXPECT_NEAR(std::abs(rho.m(0, 1)), 0.0, 1e-12);
    }
}

TEST(Exact, TraceAndHermiticity) {
    DipoleGeometry g = geom(0.5);
    g.solid_angle_factor = 1.0;
    const DiscreteBath db = discretise_bath(kBath, g, 3);
    const FockConfig fc{{3, 3, 3}, 4096};
    const SystemParams sys = make_system(0.36, 0.0064, kPi, 2.0);
    const ExactResult r = exact_evolve(build_effective_hamiltonian(db, sys, fc), db, fc, 2.0, {0.0, 50.0, 500.0});
    EXPECT_LT(r.trace_error, 1e-10);
    EXPECT_GT(r.members, 0u);
    EXPECT_GT(r.truncated_weight, 0.0);
    EXPECT_EQ(r.trajectory.frame, FrameTag::lab);
    EXPECT_NEAR(r.trajectory.rho[0].m(1, 1).real(), 1.0, 1e-12);
    for (const auto& rho : r.trajectory.rho) {
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
        EXPECT_LT(rho.hermiticity_error(), 1e-12);
        EXPECT_GE(rho.m(0, 0).real(), -1e-12);
    }
}

TEST(Exact, CutoffDriftReportedAndEnforced) {
    DipoleGeometry g = geom(0.5);
    g.solid_angle_factor = 1.0;
    const DiscreteBath db = discretise_bath(kBath, g, 2);
    const SystemParams sys = make_system(0.36, 0.0064, kPi, 2.0);
    const FockConfig fc{{3, 3}, 4096};
    const double drift = cutoff_drift(db, sys, fc, {0.0, 100.0}, 1.0);
    EXPECT_GE(drift, 0.0);
    EXPECT_LT(drift, 0.05);
    if (drift > 0.0) EXPECT_THROW(cutoff_drift(db, sys, fc, {0.0, 100.0}, 0.5 * drift), NumericsError);
}
