#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "abh/bdg_scattering.hpp"
#include "abh/bell_opt.hpp"

using namespace abh;

namespace {

const double kSqrt2 = std::sqrt(2.0);

enum { X = 0, Y = 1, Z = 2 };

// Limit tensor of the three c modes at zero frequency and temperature.
Tensor3 ghz_limit_tensor() {
    Tensor3 T{};
    T[Z][Z][Z] = 1.0;
    T[Y][Y][Z] = 1.0;
    T[Y][Z][Y] = 1.0;
    T[Z][Y][Y] = -1.0;
    return T;
}

Tensor3 waterfall_tensor(double f, double T = 0.0, double mu = 0.587) {
    const FlowConfig c = build_config(FlowKind::Waterfall, mu);
    const double w = f * threshold_omega(c);
    const ScatteringMatrix S = smatrix(c, w);
    return three_mode_correlators(second_moments(S, thermal_occupations(c, w, T), T));
}

Tensor3 fbasis_tensor(double f) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const ScatteringMatrix S = smatrix(c, f * threshold_omega(c));
    const SecondMoments m = second_moments(S, {}, 0.0);
    const FModeState fm = fmode_state(S, {});
    return three_mode_phase_space(fmode_covariance(covariance(m, false).sigma, fm));
}

MeasurementFrame random_frame(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::array<Eigen::Vector3d, 6> v;
    for (auto& u : v) u = Eigen::Vector3d(g(rng), g(rng), g(rng));
    return MeasurementFrame::from_vectors(v);
}

GaSettings cheap() {
    GaSettings s;
    s.population = 60;
    s.restarts = 2;
    return s;
}

}  // namespace

TEST(Chsh, ProductStateIsClassicalBound) {
    Eigen::Matrix3d T = Eigen::Matrix3d::Zero();
    T(2, 2) = 1.0;
    EXPECT_NEAR(chsh_optimal(T, CorrelatorBasis::CBasis).value, 2.0, 1e-12);
    EXPECT_NEAR(chsh_optimal(T, CorrelatorBasis::StandardForm).value, 2.0, 1e-12);
    EXPECT_NEAR(chsh_from_table(Eigen::Matrix3d::Zero()), 0.0, 1e-15);
}

// The maximum over unit vectors of a.T.(b + b') + a'.T.(b - b') by brute force.
TEST(Chsh, AnalyticMaximumDominatesRandomSettings) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat6 sigma = random_physical_covariance(rng, 2.0, 0.5);
        const Eigen::Matrix3d T = detail::correlators_from_phase_space(reduced_covariance(sigma, {0, 2}));
        const double B = chsh_from_table(T);
        double best = 0.0;
        for (int k = 0; k < 4000; ++k) {
            const MeasurementFrame f = random_frame(rng);
            const double v = f.a().dot(T * (f.b() + f.bp())) + f.ap().dot(T * (f.b() - f.bp()));
            EXPECT_LE(v, B + 1e-12);
            best = std::max(best, v);
        }
        EXPECT_GT(best, 0.8 * B);
    }
}

TEST(Chsh, FBasisPureSqueezedPairClosedForm) {
    for (double r : {0.0, 0.2, 1.0, 3.0}) {
        const double a = std::cosh(2 * r), m = 0.5 * std::sinh(2 * r);
        const Mat4 sigma = detail::standard_form_reduced(a, a, m, true);
        const Eigen::Matrix3d T = detail::correlators_from_phase_space(sigma);
        const double at = std::atan(std::sinh(2 * r));
        EXPECT_NEAR(chsh_from_table(T), 2.0 * std::sqrt(1.0 + 4.0 / (M_PI * M_PI) * at * at), 1e-9) << r;
    }
}

TEST(Svetlichny, AllXFrameVanishes) {
    const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
    const MeasurementFrame f = frame_from(x, x, x, x, x, x);
    for (double w : {1e-3, 0.2, 0.8}) {
        EXPECT_NEAR(svetlichny_expectation(waterfall_tensor(w), f), 0.0, 1e-12);
        EXPECT_NEAR(mermin_expectation(waterfall_tensor(w), f), 0.0, 1e-12);
    }
}

TEST(Svetlichny, LowFrequencyFrames) {
    const Tensor3 T0 = ghz_limit_tensor();
    EXPECT_NEAR(svetlichny_expectation(T0, svetlichny_low_frequency_frame()), 2 * kSqrt2, 1e-12);
    EXPECT_NEAR(mermin_expectation(T0, mermin_low_frequency_frame()), 4.0, 1e-12);
    const Tensor3 T = waterfall_tensor(1e-6);
    EXPECT_NEAR(svetlichny_expectation(T, svetlichny_low_frequency_frame()), 2 * kSqrt2, 0.03);
    EXPECT_NEAR(mermin_expectation(T, mermin_low_frequency_frame()), 4.0, 0.03);
}

TEST(Svetlichny, IsHalfSumOfMerminOperators) {
    std::mt19937_64 rng(11);
    for (double w : {1e-3, 0.3}) {
        const Tensor3 T = waterfall_tensor(w, 0.05);
        for (int k = 0; k < 200; ++k) {
            const MeasurementFrame f = random_frame(rng);
            const double s = svetlichny_expectation(T, f);
            EXPECT_NEAR(s, 0.5 * mermin_expectation(T, f) + 0.5 * mermin_prime_expectation(T, f), 1e-12);
        }
    }
}

TEST(Svetlichny, ReducedForm) {
    EXPECT_NEAR(svetlichny_reduced_max(1, 1, -1, 1), 2 * kSqrt2, 1e-15);
    EXPECT_EQ(svetlichny_reduced_max(0, 0, 0, 0), 0.0);
    // maximising the a-plane angle numerically
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const double W = u(rng), Xv = u(rng), Yv = u(rng), Zv = u(rng);
        double best = -1e9;
        for (int i = 0; i < 20000; ++i) {
            const double t = 2 * M_PI * i / 20000.0;
            best = std::max(best, std::cos(t) * (W + Zv) + std::sin(t) * (Xv - Yv));
        }
        EXPECT_NEAR(best, svetlichny_reduced_max(W, Xv, Yv, Zv), 1e-6);
    }
}

TEST(Svetlichny, SquaredOperatorSpectrumBounded) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
    double top = 0.0;
    for (int k = 0; k < 5000; ++k)
        for (double e : svetlichny_square_spectrum(u(rng), u(rng), u(rng))) {
            EXPECT_GE(e, -1e-12);
            EXPECT_LE(e, 8.0 + 1e-12);
            top = std::max(top, e);
        }
    EXPECT_NEAR(top, 8.0, 0.05);
    EXPECT_NEAR(svetlichny_square_spectrum(M_PI / 2, M_PI / 2, M_PI / 2)[0], 8.0, 1e-12);
}

TEST(Svetlichny, GaDominatesReducedForm) {
    for (double w : {1e-4, 1e-3, 0.1}) {
        const Tensor3 T = waterfall_tensor(w);
        const MeasurementFrame lf = svetlichny_low_frequency_frame();
        const ReducedFrame rf{(lf.a() + lf.ap()) / kSqrt2, (lf.a() - lf.ap()) / kSqrt2, lf.b(), lf.bp(), lf.c(), lf.cp()};
        const double reduced = svetlichny_reduced_max(T, rf);
        const BellResult r = svetlichny_parameter(T);
        EXPECT_GE(r.value, reduced - 1e-6) << w;
        EXPECT_LE(r.value, 2 * kSqrt2 + 1e-9);
        ASSERT_TRUE(r.frame.has_value());
        EXPECT_NEAR(svetlichny_expectation(T, *r.frame), r.value, 1e-12);
    }
}

TEST(Svetlichny, FBasisHasNoGenuineTripartiteNonlocality) {
    for (double w : {1e-3, 0.3}) {
        const Tensor3 T = fbasis_tensor(w);
        EXPECT_NEAR(T[Z][Z][Z], 1.0, 1e-9);
        EXPECT_NEAR(svetlichny_parameter(T, cheap()).value, 2.0, 1e-6);
    }
}

// With f0 in its vacuum the Mermin operator collapses onto a CHSH operator of (f1, f2),
// whose optimum is the analytic two-mode value.
TEST(Mermin, FBasisReducesToPairChsh) {
    for (double w : {1e-4, 0.3}) {
        const Tensor3 T = fbasis_tensor(w);
        Eigen::Matrix3d pair;
        for (int s = 0; s < 3; ++s)
            for (int t = 0; t < 3; ++t) pair(s, t) = T[Z][s][t];
        const double M = mermin_parameter(T).value;
        EXPECT_NEAR(M, chsh_from_table(pair), 1e-6);
        EXPECT_LE(M, 2 * kSqrt2 + 1e-9);
    }
    EXPECT_NEAR(mermin_parameter(fbasis_tensor(1e-4)).value, 2 * kSqrt2, 2e-3);
}

TEST(Bell, GenuineTripartiteFlagsAtLowFrequency) {
    const Tensor3 T = waterfall_tensor(1e-3);
    EXPECT_GT(mermin_parameter(T).value, 2 * kSqrt2);
    EXPECT_GT(svetlichny_parameter(T).value, 2.0);
}

TEST(Svetlichny, VanishesWhenHotAtLowFrequency) {
    const Tensor3 T = waterfall_tensor(1e-4, 0.1);
    EXPECT_LT(svetlichny_parameter(T, cheap()).value, 0.05);
    EXPECT_LT(mermin_parameter(T, cheap()).value, 0.05);
}

TEST(Ga, DeterministicForSeed) {
    const Tensor3 T = waterfall_tensor(0.05);
    const BellResult a = svetlichny_parameter(T, {}, 77), b = svetlichny_parameter(T, {}, 77);
    EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
    EXPECT_EQ(a.frame->angles, b.frame->angles);
    EXPECT_EQ(a.generations, b.generations);
    GaSettings threaded;
    threaded.threads = 3;
    EXPECT_EQ(svetlichny_parameter(T, threaded, 77).value, a.value);
}

TEST(Ga, RobustAcrossSeeds) {
    for (double w : {1e-3, 0.3}) {
        const Tensor3 T = waterfall_tensor(w);
        const double s0 = svetlichny_parameter(T, {}, 1).value, m0 = mermin_parameter(T, {}, 1).value;
        for (std::uint64_t seed = 2; seed <= 20; ++seed) {
            EXPECT_NEAR(svetlichny_parameter(T, {}, seed).value, s0, 1e-4) << w << " seed " << seed;
            EXPECT_NEAR(mermin_parameter(T, {}, seed).value, m0, 1e-4) << w << " seed " << seed;
        }
    }
}

TEST(Ga, CustomObjective) {
    // maximise a.e_z + b.e_x: optimum 2
    auto obj = [](const MeasurementFrame& f) { return f.a().z() + f.b().x(); };
    const BellResult r = ga_maximize(obj, {}, cheap(), 4);
    EXPECT_NEAR(r.value, 2.0, 1e-9);
    EXPECT_TRUE(r.converged);
}

TEST(Bell, BoundsOnRandomPhysicalStates) {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 200; ++k) {
        const Mat6 sigma = random_physical_covariance(rng, 2.5, 0.5);
        const Tensor3 T = three_mode_phase_space(sigma);
        EXPECT_LE(svetlichny_parameter(T, cheap(), k).value, 2 * kSqrt2 + 1e-9);
        EXPECT_LE(mermin_parameter(T, cheap(), k).value, 4.0 + 1e-9);
        for (ModePair p : {ModePair{0, 2}, ModePair{1, 2}, ModePair{0, 1}}) {
            const Mat4 red = reduced_covariance(sigma, p);
            const double B = chsh_from_table(detail::correlators_from_phase_space(red));
            EXPECT_LE(B, 2 * kSqrt2 + 1e-9);
            if (ppt_measure_general(red) < 0) EXPECT_LE(B, 2.0 + 1e-9);
        }
    }
}

TEST(Bell, SeparablePairsAlongWaterfallSweep) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const double Om = threshold_omega(c);
    int separable = 0;
    for (double T : {0.0, 0.1, 0.2, 0.4})
        for (int i = 0; i < 25; ++i) {
            const double w = Om * std::pow(10.0, -3.0 + 3.0 * i / 25.0);
            const SecondMoments m = second_moments(smatrix(c, w), thermal_occupations(c, w, T), T);
            for (ModePair p : {ModePair{0, 2}, ModePair{1, 2}}) {
                if (ppt_measure(m, p) >= 0) continue;
                ++separable;
                EXPECT_LE(chsh_parameter(m, p).value, 2.0 + 1e-9);
            }
        }
    EXPECT_GT(separable, 0);
}
