#pragma once

// Scattering matrix of Bogoliubov excitations on the horizon, obtained by matching
// flux-normalised asymptotic channels at x = 0.
//
// Outgoing and ingoing operators are related by (c0, c1, c2^dag) = S (b0, b1, b2^dag).
// Each channel is a plane wave U = e^{i(kx+beta)} u e^{iqx}, V = e^{-i(kx+beta)} v e^{iqx}
// normalised to unit Bogoliubov current J = Im(U* U' + V* V'), with u real positive on
// positive-norm channels and v real positive on the negative-norm (partner) channels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "abh/dispersion.hpp"
#include "abh/errors.hpp"
#include "abh/flow_config.hpp"
#include "abh/linear_ode.hpp"

namespace abh {

using lreal = long double;
using lcplx = std::complex<lreal>;
using State4 = Eigen::Matrix<lcplx, 4, 1>;

struct ScatteringMatrix {
    double omega = 0.0;
    int dim = 3;
    Eigen::Matrix3cd entries = Eigen::Matrix3cd::Zero();
    FlowKind kind = FlowKind::Waterfall;
    double m_u = 0.0, m_d = 0.0;
    double condition = 0.0;      // condition number of the (column-scaled) matching system
    double domain_length = 0.0;  // upstream integration length actually used

    cplx operator()(int i, int j) const { return entries(i, j); }
    Eigen::MatrixXcd matrix() const { return entries.topLeftCorner(dim, dim); }
};

struct ScatteringOptions {
    double domain_length = 30.0;   // upstream integration length in xi_u
    double step = 0.04;            // Gauss-Legendre step in xi_u
    double reorthonormalize = 1.0; // distance between evanescent projections
    bool auto_extend = true;       // double the domain until |S_ij| settles
    double extend_tol = 1e-7;
    double max_length = 480.0;
    double guard = kDefaultThresholdGuard;
    double max_condition = 1e12;
};

// Uniform region and background evaluated in extended precision. The matching
// systems at low frequency have condition numbers ~1/omega while |S|^2 ~ 1/omega,
// so double precision alone cannot hold S^dag eta S = eta to 1e-8 below omega ~ 1e-3 Omega.
struct RegionL {
    lreal n, k, beta, g;
};

inline RegionL region_l(const FlowConfig& c, Region r) {
    const lreal m = c.m_u;
    if (r == Region::Upstream) {
        lreal beta = c.kind == FlowKind::FlatProfile ? 0.0L : std::atan2(-m, -std::sqrt(1.0L - m * m));
        return {1.0L, m, beta, 1.0L};
    }
    switch (c.kind) {
        case FlowKind::Waterfall:
            return {m * m, 1.0L / m, std::atan2(-1.0L, 0.0L), 1.0L};
        case FlowKind::DeltaPeak: {
            lreal nd = 0.25L * m * m * (1.0L + std::sqrt(1.0L + 8.0L / (m * m)));
            lreal a = std::sqrt(1.0L - m * m);
            lreal tau = std::sqrt(std::max(0.0L, (nd - m * m) / (1.0L - m * m)));
            return {nd, m / nd, std::atan2(-m, -a * tau), 1.0L};
        }
        case FlowKind::FlatProfile: {
            lreal md = c.m_d;
            return {1.0L, m, 0.0L, m * m / (md * md)};
        }
    }
    return {};
}

struct BackgroundL {
    lreal m, a, x0, mu, barrier;
    explicit BackgroundL(const FlowConfig& c) {
        m = c.m_u;
        a = std::sqrt(1.0L - m * m);
        mu = 1.0L + 0.5L * m * m;
        x0 = 0.0L;
        barrier = 0.0L;
        if (c.kind == FlowKind::DeltaPeak) {
            lreal nd = 0.25L * m * m * (1.0L + std::sqrt(1.0L + 8.0L / (m * m)));
            lreal tau = std::sqrt(std::max(0.0L, (nd - m * m) / (1.0L - m * m)));
            x0 = std::atanh(tau) / a;
            barrier = a * a * a * tau * (1.0L - tau * tau) / (2.0L * nd);
        }
    }
    lcplx field(lreal x, bool flat) const {
        if (flat) return std::exp(lcplx(0.0L, m * x));
        return std::exp(lcplx(0.0L, m * x)) * lcplx(a * std::tanh(a * (x - x0)), -m);
    }
};

struct ModeFunction {
    lcplx q;
    lcplx u, v;  // gauge-removed amplitudes
    ChannelLabel label;
};

// Polishes a root of the dispersion quartic in extended precision.
inline lcplx polish_root(const RegionL& r, lreal omega, lcplx q, bool real) {
    const lreal c2 = r.g * r.n;
    const lreal p2 = -4.0L * (r.k * r.k - c2), p1 = 8.0L * omega * r.k, p0 = -4.0L * omega * omega;
    for (int it = 0; it < 4; ++it) {
        lcplx f = ((q * q + p2) * q + p1) * q + p0;
        lcplx d = (4.0L * q * q + 2.0L * p2) * q + p1;
        if (std::abs(d) == 0.0L) break;
        q -= f / d;
        if (real) q = lcplx(q.real(), 0.0L);
    }
    return q;
}

// Flux-normalised spinor of a channel; complex roots are normalised to |u|^2 + |v|^2 = 1.
inline ModeFunction mode_function(const RegionL& reg, const ChannelRoot& root, double omega) {
    const bool real = root.is_real();
    const lcplx q = polish_root(reg, omega, lcplx(root.q.real(), root.q.imag()), real);
    const lreal gn = reg.g * reg.n;
    lcplx u = 0.5L * q * q + gn + static_cast<lreal>(omega) - reg.k * q;
    lcplx v = -gn;
    lreal scale;
    if (real) {
        const lreal qr = q.real();
        lreal J = (reg.k + qr) * std::norm(u) + (qr - reg.k) * std::norm(v);
        scale = 1.0L / std::sqrt(std::abs(J));
    } else {
        scale = 1.0L / std::sqrt(std::norm(u) + std::norm(v));
    }
    if (root.norm_sign < 0) scale = -scale;
    return {q, u * scale, v * scale, root.label};
}

// (U, U', V, V') of a channel at position x in a uniform region.
inline State4 mode_state(const RegionL& reg, const ModeFunction& m, lreal x) {
    const lcplx i(0.0L, 1.0L);
    const lcplx ph = std::exp(lcplx(0.0L, reg.k * x + reg.beta));
    const lcplx e = std::exp(i * m.q * x);
    State4 s;
    s(0) = ph * m.u * e;
    s(1) = i * (reg.k + m.q) * s(0);
    s(2) = std::conj(ph) * m.v * e;
    s(3) = i * (m.q - reg.k) * s(2);
    return s;
}

inline double bogoliubov_current(const State4& s) {
    return static_cast<double>((std::conj(s(0)) * s(1) + std::conj(s(2)) * s(3)).imag());
}

// Coefficient matrix of the stationary BdG system for (U, U', V, V') on the upstream side.
inline Eigen::Matrix<lcplx, 4, 4> bdg_matrix(const BackgroundL& bg, bool flat, lreal omega, lreal x) {
    const lcplx phi = bg.field(x, flat);
    const lreal w = 2.0L * std::norm(phi) - bg.mu;
    const lcplx phi2 = phi * phi;
    Eigen::Matrix<lcplx, 4, 4> A = Eigen::Matrix<lcplx, 4, 4>::Zero();
    A(0, 1) = 1.0L;
    A(1, 0) = 2.0L * (w - omega);
    A(1, 2) = 2.0L * phi2;
    A(2, 3) = 1.0L;
    A(3, 0) = 2.0L * std::conj(phi2);
    A(3, 2) = 2.0L * (w + omega);
    return A;
}

// Integrates solution columns from x_from to x_to on the upstream side. Column 0 is
// treated as the growing evanescent direction: it is renormalised and projected out of
// the other columns at every re-orthonormalisation point.
template <int M>
void propagate_upstream(const FlowConfig& c, double omega, Eigen::Matrix<lcplx, 4, M>& y, double x_from, double x_to,
                        double step, double reorth_every) {
    const BackgroundL bg(c);
    const bool flat = c.kind == FlowKind::FlatProfile;
    const lreal span = static_cast<lreal>(x_to) - x_from;
    const int n = std::max(1, static_cast<int>(std::ceil(static_cast<double>(span) / step - 1e-9)));
    const lreal h = span / n;
    const int every = std::max(1, static_cast<int>(std::lround(reorth_every / static_cast<double>(h))));
    auto A = [&](lreal x) { return bdg_matrix(bg, flat, omega, x); };
    for (int i = 0; i < n; ++i) {
        gauss_legendre_step<lreal, 4, M>(A, x_from + i * h, h, y);
        if (M > 1 && ((i + 1) % every == 0 || i + 1 == n)) {
            y.col(0).normalize();
            for (int j = 1; j < M; ++j) y.col(j) -= y.col(0) * (y.col(0).adjoint() * y.col(j))(0, 0);
        }
    }
}

namespace detail {

struct UpstreamBasis {
    State4 in0, out0, ev;
};

inline UpstreamBasis upstream_basis(const FlowConfig& c, double omega, double L, const ScatteringOptions& opt) {
    const RegionL reg = region_l(c, Region::Upstream);
    const auto roots = channel_roots(c, Region::Upstream, omega, opt.guard);
    const auto in0 = mode_function(reg, find_channel(roots, ChannelLabel::In0), omega);
    const auto out0 = mode_function(reg, find_channel(roots, ChannelLabel::Out0), omega);
    const auto ev = mode_function(reg, find_channel(roots, ChannelLabel::EvanescentDecayUp), omega);
    if (c.kind == FlowKind::FlatProfile) {
        return {mode_state(reg, in0, 0.0L), mode_state(reg, out0, 0.0L), mode_state(reg, ev, 0.0L)};
    }
    Eigen::Matrix<lcplx, 4, 3> y;
    y.col(0) = mode_state(reg, ev, -L).normalized();
    y.col(1) = mode_state(reg, in0, -L);
    y.col(2) = mode_state(reg, out0, -L);
    propagate_upstream<3>(c, omega, y, -L, 0.0, opt.step, opt.reorthonormalize);
    if (c.kind == FlowKind::DeltaPeak) {
        const lreal lam = BackgroundL(c).barrier;
        for (int j = 0; j < 3; ++j) {
            y(1, j) += 2.0L * lam * y(0, j);
            y(3, j) += 2.0L * lam * y(2, j);
        }
    }
    return {y.col(1), y.col(2), y.col(0)};
}

inline ScatteringMatrix solve_matching(const FlowConfig& c, double omega, double L, const ScatteringOptions& opt) {
    const bool below = omega < threshold_omega(c);
    const UpstreamBasis up = upstream_basis(c, omega, L, opt);
    const RegionL reg = region_l(c, Region::Downstream);
    const auto roots = channel_roots(c, Region::Downstream, omega, opt.guard);
    auto st = [&](ChannelLabel l) { return mode_state(reg, mode_function(reg, find_channel(roots, l), omega), 0.0L); };

    ScatteringMatrix S;
    S.omega = omega;
    S.kind = c.kind;
    S.m_u = c.m_u;
    S.m_d = c.m_d;
    S.dim = below ? 3 : 2;
    S.domain_length = c.kind == FlowKind::FlatProfile ? 0.0 : L;

    using Mat4 = Eigen::Matrix<lcplx, 4, 4>;
    Mat4 sys;
    sys.col(0) = up.out0;
    sys.col(1) = up.ev;
    sys.col(2) = -st(ChannelLabel::Out1);
    sys.col(3) = below ? State4(-st(ChannelLabel::Out2)) : State4(-st(ChannelLabel::EvanescentDecayDown));

    Eigen::Matrix<lreal, 4, 1> scale;
    for (int j = 0; j < 4; ++j) scale(j) = 1.0L / sys.col(j).norm();
    Mat4 scaled = sys * scale.asDiagonal();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(scaled.cast<cplx>());
    const auto sv = svd.singularValues();
    S.condition = sv(0) / sv(3);
    if (!(S.condition < opt.max_condition)) throw MatchingSingular("matching system is numerically singular");
    auto lu = scaled.fullPivLu();

    std::vector<State4> rhs;
    rhs.push_back(-up.in0);
    rhs.push_back(st(ChannelLabel::In1));
    if (below) rhs.push_back(st(ChannelLabel::In2));
    for (int j = 0; j < S.dim; ++j) {
        State4 x = lu.solve(rhs[j]);
        x = scale.asDiagonal() * x;
        S.entries(0, j) = cplx(x(0));
        S.entries(1, j) = cplx(x(2));
        if (below) S.entries(2, j) = cplx(x(3));
    }
    return S;
}

inline double max_modulus_change(const ScatteringMatrix& a, const ScatteringMatrix& b) {
    double d = 0.0;
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) d = std::max(d, std::abs(std::abs(a.entries(i, j)) - std::abs(b.entries(i, j))));
    return d;
}

}  // namespace detail

inline ScatteringMatrix smatrix(const FlowConfig& c, double omega, const ScatteringOptions& opt = {}) {
    check_frequency(c, omega, opt.guard);
    double L = opt.domain_length;
    ScatteringMatrix S = detail::solve_matching(c, omega, L, opt);
    if (c.kind == FlowKind::FlatProfile || !opt.auto_extend) return S;
    while (true) {
        if (2.0 * L > opt.max_length) throw NoConvergence("scattering matrix did not settle when extending the domain");
        ScatteringMatrix S2 = detail::solve_matching(c, omega, 2.0 * L, opt);
        const bool settled = detail::max_modulus_change(S, S2) < opt.extend_tol;
        L *= 2.0;
        S = S2;
        if (settled) return S;
    }
}

// max |(S^dag eta S - eta)_ij| with eta = diag(1, 1, -1) (identity above threshold).
inline double skew_unitarity_residual(const ScatteringMatrix& S) {
    Eigen::MatrixXcd s = S.matrix();
    Eigen::MatrixXcd eta = Eigen::MatrixXcd::Identity(S.dim, S.dim);
    if (S.dim == 3) eta(2, 2) = -1.0;
    double r1 = (s.adjoint() * eta * s - eta).cwiseAbs().maxCoeff();
    double r2 = (s * eta * s.adjoint() - eta).cwiseAbs().maxCoeff();
    return std::max(r1, r2);
}

struct OpticalModel {
    double r2 = 0.0;
    double theta = 0.0;
    double gamma0 = 0.0, gamma1 = 0.0;
    double phase02 = 0.0, phase12 = 0.0, phase22 = 0.0;
    bool theta_defined = true;
};

inline OpticalModel optical_model(const ScatteringMatrix& S) {
    if (S.dim != 3) throw ModeAbsent("optical model needs the partner channel (omega below threshold)");
    OpticalModel m;
    const double s22sq = std::norm(S(2, 2));
    m.r2 = std::asinh(std::sqrt(std::max(0.0, s22sq - 1.0)));
    m.phase02 = std::arg(S(0, 2));
    m.phase12 = std::arg(S(1, 2));
    m.phase22 = std::arg(S(2, 2));
    const double a0 = std::abs(S(0, 2)), a1 = std::abs(S(1, 2));
    if (m.r2 == 0.0 || a0 + a1 == 0.0) {
        m.theta_defined = false;
        return m;
    }
    // sinh r2 = sqrt(|S02|^2 + |S12|^2) by column skew-unitarity; use it so that
    // gamma0 + gamma1 = 1 holds exactly.
    m.theta = std::atan2(a1, a0);
    m.gamma0 = std::cos(m.theta) * std::cos(m.theta);
    m.gamma1 = std::sin(m.theta) * std::sin(m.theta);
    return m;
}

struct ScalingFit {
    double slope02, slope12, slope22;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Log-log slopes of |S_i2|^2 against omega over omega/Omega in [lo, hi].
inline ScalingFit low_frequency_scaling(const FlowConfig& c, int points = 9, double lo = 1e-4, double hi = 1e-2,
                                        const ScatteringOptions& opt = {}) {
    if (points < 3 || !(lo > 0.0 && hi > lo && hi < 1.0)) throw FitRange("need at least 3 points inside (0, Omega)");
    const double Om = threshold_omega(c);
    std::vector<double> w, s02, s12, s22;
    for (int i = 0; i < points; ++i) {
        double f = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        ScatteringMatrix S = smatrix(c, f * Om, opt);
        w.push_back(f * Om);
        s02.push_back(std::norm(S(0, 2)));
        s12.push_back(std::norm(S(1, 2)));
        s22.push_back(std::norm(S(2, 2)));
    }
    return {loglog_slope(w, s02), loglog_slope(w, s12), loglog_slope(w, s22)};
}

}  // namespace abh
