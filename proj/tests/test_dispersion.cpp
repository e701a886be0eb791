#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "abh/dispersion.hpp"

using namespace abh;

namespace {

// Golden-section maximisation of q V_d - omega_B(q) over a bracket.
double max_comoving_frequency(const FlowConfig& c) {
    auto f = [&](double q) { return q * c.V_d - bogoliubov_omega(q, Region::Downstream, c); };
    double lo = 0.0, hi = 4.0 * c.m_d / c.xi_d;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double fa = f(a), fb = f(b);
    for (int i = 0; i < 200; ++i) {
        if (fa > fb) {
            hi = b; b = a; fb = fa; a = hi - g * (hi - lo); fa = f(a);
        } else {
            lo = a; a = b; fa = fb; b = lo + g * (hi - lo); fb = f(b);
        }
    }
    return f(0.5 * (lo + hi));
}

double dispersion_residual(const FlowConfig& c, Region r, double omega, double q) {
    const UniformRegion u = c.region(r);
    const double lhs = (omega - u.k * q) * (omega - u.k * q);
    const double wb = bogoliubov_omega(q, r, c);
    return std::abs(lhs - wb * wb) / std::max(1.0, lhs);
}

std::vector<FlowConfig> sample_configs() {
    return {build_config(FlowKind::Waterfall, 0.587), build_config(FlowKind::Waterfall, 0.2),
            build_config(FlowKind::DeltaPeak, 0.5), build_config(FlowKind::FlatProfile, 0.5, 4.0),
            build_config(FlowKind::FlatProfile, 0.8, 1.5)};
}

}  // namespace

TEST(Bogoliubov, Limits) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    for (Region r : {Region::Upstream, Region::Downstream}) {
        const double cs = r == Region::Upstream ? c.c_u : c.c_d, xi = r == Region::Upstream ? c.xi_u : c.xi_d;
        EXPECT_NEAR(bogoliubov_omega(1e-7, r, c) / 1e-7, cs, 1e-12);
        EXPECT_NEAR(bogoliubov_omega(2.0 / xi, r, c), 2.0 * std::sqrt(2.0) * cs / xi, 1e-12);
        const double q = 1e5 / xi;
        EXPECT_NEAR(bogoliubov_omega(q, r, c) / (q * q * cs * xi / 2.0), 1.0, 1e-9);
    }
}

TEST(Threshold, AgreesWithNumericalMaximum) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 1.0 / std::sqrt(2.9));
    EXPECT_NEAR(c.m_d, 2.9, 1e-12);
    EXPECT_NEAR(threshold_omega(c), max_comoving_frequency(c), 1e-10);
    for (const auto& k : sample_configs()) EXPECT_NEAR(threshold_omega(k), max_comoving_frequency(k), 1e-10);
}

TEST(Threshold, VanishesAtSonicDownstreamAndIncreases) {
    EXPECT_LT(threshold_omega(build_config(FlowKind::FlatProfile, 0.5, 1.0 + 1e-8)), 1e-10);
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double md = 1.0 + 4.0 * i / 400.0;
        const double om = threshold_omega(build_config(FlowKind::FlatProfile, 0.5, md));
        EXPECT_GT(om, prev);
        prev = om;
    }
}

TEST(Roots, CountsAndLabels) {
    for (const auto& c : sample_configs()) {
        const double Om = threshold_omega(c);
        for (double f : {1e-3, 0.3, 0.9, 1.5, 3.0}) {
            const double w = f * Om;
            const auto up = channel_roots(c, Region::Upstream, w);
            ASSERT_EQ(up.size(), 4u);
            EXPECT_EQ(std::count_if(up.begin(), up.end(), [](auto& r) { return r.is_real(); }), 2);
            EXPECT_TRUE(has_channel(up, ChannelLabel::In0));
            EXPECT_TRUE(has_channel(up, ChannelLabel::Out0));
            const auto dn = channel_roots(c, Region::Downstream, w);
            ASSERT_EQ(dn.size(), 4u);
            const int real = std::count_if(dn.begin(), dn.end(), [](auto& r) { return r.is_real(); });
            if (f < 1.0) {
                EXPECT_EQ(real, 4);
                EXPECT_TRUE(has_channel(dn, ChannelLabel::In2));
                EXPECT_TRUE(has_channel(dn, ChannelLabel::Out2));
            } else {
                EXPECT_EQ(real, 2);
                EXPECT_FALSE(has_channel(dn, ChannelLabel::In2));
                EXPECT_FALSE(has_channel(dn, ChannelLabel::Out2));
            }
        }
    }
}

TEST(Roots, DispersionResidualNormsAndGroupVelocities) {
    for (const auto& c : sample_configs()) {
        const double Om = threshold_omega(c);
        for (double f : {1e-4, 0.01, 0.5, 0.99, 2.0}) {
            const double w = f * Om;
            for (Region r : {Region::Upstream, Region::Downstream}) {
                int in = 0, out = 0;
                for (const auto& root : channel_roots(c, r, w)) {
                    if (!root.is_real()) continue;
                    const double q = root.q.real();
                    EXPECT_LT(dispersion_residual(c, r, w, q), 1e-10);
                    const bool partner = root.label == ChannelLabel::In2 || root.label == ChannelLabel::Out2;
                    EXPECT_EQ(root.norm_sign, partner ? -1 : 1);
                    EXPECT_EQ(root.norm_sign, (w - c.region(r).k * q) > 0 ? 1 : -1);
                    const bool outgoing = root.label == ChannelLabel::Out0 || root.label == ChannelLabel::Out1 ||
                                          root.label == ChannelLabel::Out2;
                    const double away = r == Region::Upstream ? -root.v_group : root.v_group;
                    EXPECT_EQ(outgoing, away > 0.0);
                    // analytic group velocity against a centred difference of omega(q)
                    const double h = 1e-6;
                    const UniformRegion u = c.region(r);
                    auto wq = [&](double qq) { return u.k * qq + root.norm_sign * bogoliubov_omega(qq, r, c); };
                    EXPECT_NEAR(root.v_group, (wq(q + h) - wq(q - h)) / (2 * h), 1e-6);
                    (outgoing ? out : in)++;
                }
                EXPECT_EQ(in, out);
            }
        }
    }
}

TEST(Roots, VietaRelations) {
    for (const auto& c : sample_configs()) {
        const double Om = threshold_omega(c);
        for (double f : {1e-3, 0.4, 0.95, 1.7}) {
            const double w = f * Om;
            for (Region r : {Region::Upstream, Region::Downstream}) {
                const auto roots = channel_roots(c, r, w);
                const UniformRegion u = c.region(r);
                // q^4 + p2 q^2 + p1 q + p0 with xi scaled out: (w - k q)^2 = c^2 q^2 + q^4 / 4
                const double p2 = -4.0 * (u.k * u.k - u.c * u.c), p1 = 8.0 * w * u.k, p0 = -4.0 * w * w;
                cplx e1 = 0, e2 = 0, e3 = 0, e4 = 1;
                for (std::size_t i = 0; i < 4; ++i) {
                    e1 += roots[i].q;
                    e4 *= roots[i].q;
                    for (std::size_t j = i + 1; j < 4; ++j) {
                        e2 += roots[i].q * roots[j].q;
                        for (std::size_t k = j + 1; k < 4; ++k) e3 += roots[i].q * roots[j].q * roots[k].q;
                    }
                }
                const double scale = 1.0 + std::abs(p2) + std::abs(p1) + std::abs(p0);
                EXPECT_LT(std::abs(e1), 1e-9 * scale);
                EXPECT_LT(std::abs(e2 - p2), 1e-9 * scale);
                EXPECT_LT(std::abs(-e3 - p1), 1e-9 * scale);
                EXPECT_LT(std::abs(e4 - p0), 1e-9 * scale);
            }
        }
    }
}

TEST(Roots, Errors) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 0.587);
    const double Om = threshold_omega(c);
    EXPECT_THROW(channel_roots(c, Region::Downstream, 0.0), NonPositiveFrequency);
    EXPECT_THROW(channel_roots(c, Region::Downstream, -0.1), NonPositiveFrequency);
    EXPECT_THROW(channel_roots(c, Region::Downstream, Om * (1.0 + 1e-11)), ThresholdDegeneracy);
    EXPECT_NO_THROW(channel_roots(c, Region::Downstream, Om * (1.0 - 1e-6)));
    EXPECT_THROW(q_in(c, 2, 1.2 * Om), ModeAbsent);
}

TEST(QIn, PartnerBranch) {
    for (const auto& c : sample_configs()) {
        const double Om = threshold_omega(c);
        const double qs = threshold_wavenumber(c);
        const double q0 = q_in(c, 2, 1e-7 * Om);
        double prev = q0;
        for (int i = 1; i < 200; ++i) {
            const double q = q_in(c, 2, Om * i / 200.0);
            EXPECT_GE(q, std::min(qs, q0) - 1e-9);
            EXPECT_LE(q, std::max(qs, q0) + 1e-9);
            EXPECT_GT((q - prev) * (qs - q0), 0.0);  // monotone toward q*
            prev = q;
        }
        EXPECT_NEAR(q_in(c, 2, Om * (1.0 - 1e-8)), qs, 2e-3 * std::abs(qs));
    }
}

TEST(QIn, LongWavelengthAndResidual) {
    const FlowConfig c = build_config(FlowKind::Waterfall, 1.0 / std::sqrt(2.9));
    const double w = 1e-7;
    EXPECT_NEAR(std::abs(w / q_in(c, 0, w)), c.c_u + c.V_u, 1e-6);
    const double Om = threshold_omega(c);
    const double q1 = q_in(c, 1, 0.5 * Om);
    EXPECT_LT(dispersion_residual(c, Region::Downstream, 0.5 * Om, q1), 1e-10);
}
