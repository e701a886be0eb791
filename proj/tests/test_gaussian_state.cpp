#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "abh/bdg_scattering.hpp"
#include "abh/gaussian_state.hpp"

using namespace abh;

namespace {

// Element of U(2,1): passive mixing of (0, 1), a boost between 1 and 2, passive mixing again.
ScatteringMatrix random_skew_unitary(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto mix = [&] {
        const double t = M_PI / 2 * u(rng);
        Eigen::Matrix3cd M = Eigen::Matrix3cd::Zero();
        const cplx a = std::polar(1.0, 2 * M_PI * u(rng)), b = std::polar(1.0, 2 * M_PI * u(rng));
        M(0, 0) = std::cos(t) * a;
        M(0, 1) = -std::sin(t) * std::conj(b);
        M(1, 0) = std::sin(t) * b;
        M(1, 1) = std::cos(t) * std::conj(a);
        M(2, 2) = std::polar(1.0, 2 * M_PI * u(rng));
        return M;
    };
    const double r = 3.0 * u(rng);
    Eigen::Matrix3cd B = Eigen::Matrix3cd::Identity();
    B(1, 1) = B(2, 2) = std::cosh(r);
    B(1, 2) = B(2, 1) = std::sinh(r);
    ScatteringMatrix S;
    S.entries = mix() * B * mix();
    return S;
}

// Ingoing partner wavenumber by bisection of q V_d - omega_B(q) = omega on (q*, q0).
double partner_q_bisection(const FlowConfig& c, double omega) {
    auto f = [&](double q) { return q * c.V_d - bogoliubov_omega(q, Region::Downstream, c) - omega; };
    double lo = threshold_wavenumber(c), hi = lo;
    while (f(hi) > 0) hi *= 1.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double lambda_limit_02(double m) { return 8 * m / (1 + 6 * m + m * m); }
double lambda_limit_12(double m) { return (1 - m) * (1 - m) / (1 + m * m); }

}  // namespace

TEST(Occupations, ZeroTemperatureAndRayleighJeans) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const double Om = threshold_omega(c);
    const Occupations z = thermal_occupations(c, 0.3 * Om, 0.0);
    EXPECT_EQ(z.n0, 0.0);
    EXPECT_EQ(z.n1, 0.0);
    EXPECT_EQ(z.n2, 0.0);
    for (double w : {1e-5, 1e-6}) {
        const double wb = bogoliubov_omega(q_in(c, 0, w), Region::Upstream, c);
        EXPECT_NEAR(thermal_occupations(c, w, 0.2).n0 * wb / 0.2, 1.0, 1e-3);
    }
    EXPECT_THROW(thermal_occupations(c, 1.1 * Om, 0.1), ModeAbsent);
}

TEST(Occupations, PartnerAgreesWithIndependentRoot) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 1.0 / std::sqrt(2.9));
    const double w = 0.5 * threshold_omega(c), T = 0.2;
    const double q = partner_q_bisection(c, w);
    const double ref = 1.0 / std::expm1(bogoliubov_omega(q, Region::Downstream, c) / T);
    EXPECT_NEAR(thermal_occupations(c, w, T).n2, ref, 1e-10 * ref);
}

TEST(Moments, ZeroTemperatureRelations) {
    for (FlowKind k : {FlowKind::Waterfall, FlowKind::DeltaPeak}) {
        const FlowConfig c = build_config(k, 0.45);
        const double Om = threshold_omega(c);
        for (double f : {1e-3, 0.2, 0.8}) {
            const ScatteringMatrix S = smatrix(c, f * Om);
            const SecondMoments m = second_moments(S, {}, 0.0);
            const double sh = std::sinh(optical_model(S).r2);
            EXPECT_NEAR(m.nc2, sh * sh, 1e-9 * std::max(1.0, m.nc2));
            EXPECT_NEAR(m.nc2, std::norm(S(2, 2)) - 1.0, 1e-9 * std::max(1.0, m.nc2));
            EXPECT_NEAR(m.nc0, std::norm(S(0, 2)), 1e-12 * std::max(1.0, m.nc0));
            EXPECT_NEAR(m.nc0 + m.nc1 - m.nc2, 0.0, 1e-9 * std::max(1.0, m.nc2));
        }
    }
}

TEST(Moments, NoPairCreation) {
    ScatteringMatrix S;
    S.entries = Eigen::Matrix3cd::Identity();
    const SecondMoments m = second_moments(S, {}, 0.0);
    EXPECT_EQ(m.nc2, 0.0);
    EXPECT_EQ(std::abs(m.m02), 0.0);
    EXPECT_EQ(std::abs(m.m12), 0.0);
    EXPECT_THROW(second_moments(ScatteringMatrix{.dim = 2}, {}, 0.0), ModeAbsent);
}

TEST(Covariance, VacuumAndBlocks) {
    const CovarianceMatrix v = covariance(SecondMoments{});
    EXPECT_TRUE(v.sigma.isApprox(Mat6::Identity()));
    EXPECT_NEAR(v.delta, 1.0, 1e-15);
    const FlowConfig c = build_config(FlowKind::DeltaPeak, 0.6);
    const double w = 0.3 * threshold_omega(c);
    const SecondMoments m = second_moments(smatrix(c, w), thermal_occupations(c, w, 0.1), 0.1);
    const CovarianceMatrix cv = covariance(m);
    for (int i = 0; i < 3; ++i)
        EXPECT_TRUE((cv.sigma.block<2, 2>(2 * i, 2 * i).isApprox(m.mixedness(i) * Eigen::Matrix2d::Identity())));
    EXPECT_GT(cv.physical_floor, -1e-9);
    EXPECT_NEAR(cv.delta, std::sqrt(cv.sigma.determinant()), 1e-8 * cv.delta);
}

TEST(Covariance, RejectsUnphysicalMoments) {
    SecondMoments m;
    m.m02 = 0.7;  // squeezing without the matching occupations
    EXPECT_THROW(covariance(m), PhysicalityViolation);
}

TEST(Purity, ZeroTemperatureIsPure) {
    for (const FlowConfig& c : {build_config(FlowKind::Waterfall, 0.2), build_config(FlowKind::DeltaPeak, 0.8),
                                build_config(FlowKind::FlatProfile, 0.5, 4.0)}) {
        const double Om = threshold_omega(c);
        for (double f : {1e-4, 1e-2, 0.5, 0.99}) {
            const SecondMoments m = second_moments(smatrix(c, f * Om), {}, 0.0);
            EXPECT_NEAR(purity_delta(m), 1.0, 1e-6);
            if (f >= 1e-2) EXPECT_NEAR(purity_delta_moments(m), 1.0, 1e-6);
        }
    }
}

TEST(Purity, FiniteTemperatureInverseFrequency) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const double Om = threshold_omega(c);
    std::vector<double> w, d;
    for (int i = 0; i < 7; ++i) {
        const double om = Om * 1e-4 * std::pow(10.0, i / 3.0);
        w.push_back(om);
        d.push_back(purity_delta(second_moments(smatrix(c, om), thermal_occupations(c, om, 0.2), 0.2)));
    }
    EXPECT_NEAR(loglog_slope(w, d), -1.0, 0.1);
}

TEST(Ppt, ClosedFormMatchesSymplecticRoute) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const ScatteringMatrix S = random_skew_unitary(rng);
        const SecondMoments m = second_moments(S, {u(rng), u(rng), u(rng)}, 0.1);
        const Mat6 s = covariance(m).sigma;
        for (int i = 0; i < 2; ++i)
            EXPECT_NEAR(ppt_measure_closed(m, i), ppt_measure_general(reduced_covariance(s, {i, 2})), 1e-9);
    }
}

TEST(Ppt, LowFrequencyLimits) {
    const double mu = 0.587;
    const FlowConfig c = build_config(FlowKind::Waterfall, mu);
    const SecondMoments m = second_moments(smatrix(c, 1e-6 * threshold_omega(c)), {}, 0.0);
    EXPECT_NEAR(lambda_limit_02(mu), 0.965, 1e-3);
    EXPECT_NEAR(lambda_limit_12(mu), 0.127, 1e-3);
    EXPECT_NEAR(ppt_measure(m, {0, 2}), lambda_limit_02(mu), 1e-3);
    EXPECT_NEAR(ppt_measure(m, {1, 2}), lambda_limit_12(mu), 1e-3);
}

TEST(Ppt, CompanionPairNeverEntangledAndMonotoneInTemperature) {
    for (FlowKind k : {FlowKind::Waterfall, FlowKind::DeltaPeak}) {
        const FlowConfig c = build_config(k, 0.5);
        const double Om = threshold_omega(c);
        for (double f : {1e-3, 0.05, 0.5, 0.95}) {
            const ScatteringMatrix S = smatrix(c, f * Om);
            double prev02 = INFINITY, prev12 = INFINITY;
            for (int t = 0; t <= 12; ++t) {
                const double T = 0.025 * t;
                const SecondMoments m = second_moments(S, thermal_occupations(c, f * Om, T), T);
                EXPECT_LT(ppt_measure(m, {0, 1}), 0.0);
                const double l02 = ppt_measure(m, {0, 2}), l12 = ppt_measure(m, {1, 2});
                EXPECT_LE(l02, prev02 + 1e-12);
                EXPECT_LE(l12, prev12 + 1e-12);
                prev02 = l02;
                prev12 = l12;
            }
        }
    }
}

TEST(FModes, ZeroTemperature) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const double Om = threshold_omega(c);
    for (double f : {1e-3, 0.1, 0.6, 0.99}) {
        const ScatteringMatrix S = smatrix(c, f * Om);
        const FModeState fm = fmode_state(S, {});
        const SecondMoments m = second_moments(S, {}, 0.0);
        EXPECT_NEAR(fm.nf0, 0.0, 1e-10);
        EXPECT_NEAR(fm.lambda, 1.0 - std::exp(-2 * fm.r2), 1e-9);
        const double at = std::atan(std::sinh(2 * fm.r2));
        EXPECT_NEAR(fm.chsh, 2 * std::sqrt(1 + 4 / (M_PI * M_PI) * at * at), 1e-9);
        EXPECT_LE(ppt_measure(m, {0, 2}), fm.lambda + 1e-9);
        EXPECT_LE(ppt_measure(m, {1, 2}), fm.lambda + 1e-9);
    }
}

TEST(FModes, SqueezingLimits) {
    ScatteringMatrix S;
    S.entries = Eigen::Matrix3cd::Identity();
    const FModeState none = fmode_state(S, {});
    EXPECT_NEAR(none.lambda, 0.0, 1e-15);
    EXPECT_NEAR(none.chsh, 2.0, 1e-15);
    const double r = 12.0;
    S.entries(1, 1) = S.entries(2, 2) = std::cosh(r);
    S.entries(1, 2) = S.entries(2, 1) = std::sinh(r);
    EXPECT_NEAR(fmode_state(S, {}).chsh, 2 * std::sqrt(2.0), 1e-9);
}

TEST(FModes, RotatedCovarianceAgrees) {
    for (double T : {0.0, 0.1, 0.3}) {
        const FlowConfig c = build_config(FlowKind::DeltaPeak, 0.4);
        const double w = 0.2 * threshold_omega(c);
        const ScatteringMatrix S = smatrix(c, w);
        const Occupations n = thermal_occupations(c, w, T);
        const SecondMoments m = second_moments(S, n, T);
        const FModeState fm = fmode_state(S, n);
        const Mat6 sc = covariance(m).sigma, sf = fmode_covariance(sc, fm);
        EXPECT_NEAR(std::sqrt(sf.determinant()), std::sqrt(sc.determinant()), 1e-9 * std::sqrt(sc.determinant()));
        EXPECT_NEAR(std::sqrt(sf.determinant()), purity_delta(m), 1e-8 * purity_delta(m));
        EXPECT_NEAR(sf(0, 0), 2 * fm.nf0 + 1, 1e-9 * sf(0, 0));
        EXPECT_NEAR(sf(2, 2), 2 * fm.nf1 + 1, 1e-9 * sf(2, 2));
        EXPECT_NEAR(sf(4, 4), 2 * fm.nf2 + 1, 1e-9 * sf(4, 4));
        EXPECT_NEAR(std::abs(sf(2, 4)), 2 * fm.m12, 1e-9 * sf(2, 2));
        EXPECT_NEAR(ppt_measure_general(reduced_covariance(sf, {1, 2})), fm.lambda, 1e-9);
    }
}
