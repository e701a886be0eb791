#pragma once

// Bogoliubov dispersion (omega - V q)^2 = omega_B(q)^2 in the asymptotic regions,
// channel roots with their labels, and the threshold frequency Omega.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "abh/errors.hpp"
#include "abh/flow_config.hpp"

namespace abh {

enum class ChannelLabel { In0, Out0, In1, Out1, In2, Out2, EvanescentDecayUp, EvanescentDecayDown, EvanescentGrow };

inline std::string to_string(ChannelLabel l) {
    static const char* names[] = {"in0", "out0", "in1", "out1", "in2", "out2", "ev_decay_up", "ev_decay_down", "ev_grow"};
    return names[static_cast<int>(l)];
}

struct ChannelRoot {
    cplx q;
    ChannelLabel label;
    Region region;
    int norm_sign;    // sign of omega - V q (real roots)
    double v_group;   // 0 for complex roots
    bool is_real() const { return q.imag() == 0.0; }
};

inline constexpr double kDefaultThresholdGuard = 1e-9;

inline double bogoliubov_omega(double q, Region r, const FlowConfig& c) {
    const double cs = r == Region::Upstream ? c.c_u : c.c_d;
    const double xi = r == Region::Upstream ? c.xi_u : c.xi_d;
    q = std::abs(q);
    return cs * q * std::sqrt(1.0 + 0.25 * q * q * xi * xi);
}

inline double threshold_wavenumber(const FlowConfig& c) {
    const double m = c.m_d;
    const double s = -2.0 + 0.5 * m * m + 0.5 * m * std::sqrt(8.0 + m * m);
    return std::sqrt(std::max(0.0, s)) / c.xi_d;
}

inline double threshold_omega(const FlowConfig& c) {
    const double qs = threshold_wavenumber(c);
    return qs * c.V_d - bogoliubov_omega(qs, Region::Downstream, c);
}

namespace detail {

// Coefficients (q^4 + p2 q^2 + p1 q + p0) of the dispersion quartic.
inline std::array<double, 3> quartic_coefficients(const UniformRegion& u, double omega) {
    return {-4.0 * omega * omega, 8.0 * omega * u.k, -4.0 * (u.k * u.k - u.c * u.c)};
}

inline cplx quartic_value(const std::array<double, 3>& p, cplx q) {
    return ((q * q + p[2]) * q + p[1]) * q + p[0];
}

inline cplx quartic_slope(const std::array<double, 3>& p, cplx q) {
    return (4.0 * q * q + 2.0 * p[2]) * q + p[1];
}

}  // namespace detail

inline double group_velocity(double q, const UniformRegion& u, double omega) {
    return u.k + (u.c * u.c * q + 0.5 * q * q * q) / (omega - u.k * q);
}

inline double group_velocity(double q, Region r, const FlowConfig& c, double omega) {
    return group_velocity(q, c.region(r), omega);
}

inline void check_frequency(const FlowConfig& c, double omega, double guard) {
    if (!(omega > 0.0)) throw NonPositiveFrequency("omega must be positive");
    const double Om = threshold_omega(c);
    if (std::abs(omega - Om) < guard * Om) throw ThresholdDegeneracy("omega within the guard band of the threshold");
}

// All four roots of the dispersion quartic in region r, labelled.
inline std::vector<ChannelRoot> channel_roots(const FlowConfig& c, Region r, double omega,
                                              double guard = kDefaultThresholdGuard) {
    check_frequency(c, omega, guard);
    const UniformRegion u = c.region(r);
    const auto p = detail::quartic_coefficients(u, omega);

    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    comp(0, 3) = -p[0];
    comp(1, 3) = -p[1];
    comp(2, 3) = -p[2];
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    std::array<cplx, 4> q;
    for (int i = 0; i < 4; ++i) q[i] = es.eigenvalues()[i];
    std::sort(q.begin(), q.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    // At low omega the two small roots are a near-double pair that the eigenvalue route
    // smears into the complex plane; deflate the two large roots and solve the remaining
    // quadratic q^2 + e q + f directly.
    const bool real_pair = q[0].imag() == 0.0 && q[1].imag() == 0.0;
    const bool conj_pair = std::abs(q[0] - std::conj(q[1])) <= 1e-12 * std::abs(q[0]);
    if (real_pair || conj_pair) {
        const double A = -(q[0] + q[1]).real(), B = (q[0] * q[1]).real();
        if (B != 0.0) {
            const double f = p[0] / B, e = (p[1] - A * f) / B;
            const double disc = e * e - 4.0 * f;
            if (disc >= 0.0) {
                const double t = -0.5 * (e + std::copysign(std::sqrt(disc), e));
                q[2] = t;
                q[3] = t != 0.0 ? f / t : 0.0;
            } else {
                q[2] = cplx(-0.5 * e, 0.5 * std::sqrt(-disc));
                q[3] = std::conj(q[2]);
            }
        }
    }
    for (int i = 0; i < 4; ++i) {
        for (int it = 0; it < 3; ++it) {
            const cplx d = detail::quartic_slope(p, q[i]);
            if (std::abs(d) == 0.0) break;
            const cplx next = q[i] - detail::quartic_value(p, q[i]) / d;
            if (std::abs(detail::quartic_value(p, next)) >= std::abs(detail::quartic_value(p, q[i]))) break;
            q[i] = next;
        }
    }

    const bool below = omega < threshold_omega(c);
    const int n_real = (r == Region::Downstream && below) ? 4 : 2;
    std::sort(q.begin(), q.end(), [](cplx a, cplx b) { return std::abs(a.imag()) < std::abs(b.imag()); });

    std::vector<ChannelRoot> out;
    for (int i = 0; i < 4; ++i) {
        ChannelRoot root{};
        root.region = r;
        if (i < n_real) {
            double qr = q[i].real();
            // Newton refinement on the real axis.
            for (int it = 0; it < 2; ++it) {
                const double d = detail::quartic_slope(p, qr).real();
                if (d == 0.0) break;
                const double next = qr - detail::quartic_value(p, qr).real() / d;
                if (std::abs(detail::quartic_value(p, next)) > std::abs(detail::quartic_value(p, qr))) break;
                qr = next;
            }
            root.q = cplx(qr, 0.0);
            root.norm_sign = omega - u.k * qr > 0.0 ? 1 : -1;
            root.v_group = group_velocity(qr, u, omega);
            if (r == Region::Upstream) {
                root.label = root.v_group > 0.0 ? ChannelLabel::In0 : ChannelLabel::Out0;
            } else if (root.norm_sign > 0) {
                root.label = root.v_group > 0.0 ? ChannelLabel::Out1 : ChannelLabel::In1;
            } else {
                root.label = root.v_group > 0.0 ? ChannelLabel::Out2 : ChannelLabel::In2;
            }
        } else {
            root.q = q[i];
            root.norm_sign = 0;
            root.v_group = 0.0;
            if (r == Region::Upstream) {
                root.label = q[i].imag() < 0.0 ? ChannelLabel::EvanescentDecayUp : ChannelLabel::EvanescentGrow;
            } else {
                root.label = q[i].imag() > 0.0 ? ChannelLabel::EvanescentDecayDown : ChannelLabel::EvanescentGrow;
            }
        }
        out.push_back(root);
    }
    return out;
}

inline const ChannelRoot& find_channel(const std::vector<ChannelRoot>& roots, ChannelLabel l) {
    for (const auto& r : roots) {
        if (r.label == l) return r;
    }
    throw ModeAbsent("channel " + to_string(l) + " absent at this frequency");
}

inline bool has_channel(const std::vector<ChannelRoot>& roots, ChannelLabel l) {
    return std::any_of(roots.begin(), roots.end(), [l](const ChannelRoot& r) { return r.label == l; });
}

// Wavenumber of the ingoing channel j (0, 1 or 2).
inline double q_in(const FlowConfig& c, int j, double omega, double guard = kDefaultThresholdGuard) {
    if (j == 2 && omega >= threshold_omega(c)) throw ModeAbsent("channel 2 exists only below the threshold");
    if (j == 0) return find_channel(channel_roots(c, Region::Upstream, omega, guard), ChannelLabel::In0).q.real();
    auto roots = channel_roots(c, Region::Downstream, omega, guard);
    return find_channel(roots, j == 1 ? ChannelLabel::In1 : ChannelLabel::In2).q.real();
}

}  // namespace abh
