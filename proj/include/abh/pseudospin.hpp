#pragma once

// Closed-form pseudo-spin correlators over the outgoing Gaussian state.
//   two-mode:   T_rs  = < Pi_r^(i) Pi_s^(j) >
//   three-mode: T_rst = < Pi_r^(0) Pi_s^(1) Pi_t^(2) >

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "abh/gaussian_state.hpp"
#include "abh/phase_space.hpp"

namespace abh {

enum class CorrelatorBasis { CBasis, StandardForm };

using Tensor3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

struct CorrelatorTensor {
    Eigen::Matrix3d two_mode02 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d two_mode12 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d two_mode01 = Eigen::Matrix3d::Zero();
    Tensor3 three_mode{};
    CorrelatorBasis basis = CorrelatorBasis::CBasis;
    double omega = 0.0, temperature = 0.0;

    double operator()(Axis r, Axis s, Axis t) const {
        return three_mode[static_cast<int>(r)][static_cast<int>(s)][static_cast<int>(t)];
    }
};

namespace detail {

inline Mat4 standard_form_reduced(double a, double b, double abs_m, bool pair_with_partner) {
    Mat4 s = Mat4::Zero();
    s(0, 0) = s(1, 1) = a;
    s(2, 2) = s(3, 3) = b;
    const double e = 2.0 * abs_m;
    s(0, 2) = s(2, 0) = e;
    s(1, 3) = s(3, 1) = pair_with_partner ? -e : e;
    return s;
}

inline Eigen::Matrix3d correlators_from_phase_space(const Mat4& reduced) {
    Eigen::Matrix3d T;
    const Eigen::MatrixXd s = reduced;
    for (int r = 0; r < 3; ++r)
        for (int t = 0; t < 3; ++t) T(r, t) = phase_space_correlator(s, {0, 1}, {Axis(r), Axis(t)});
    return T;
}

}  // namespace detail

// Two-mode table for the pair (i|j), i < j.
inline Eigen::Matrix3d two_mode_correlators(const SecondMoments& m, ModePair p, CorrelatorBasis basis) {
    if (p.i > p.j) std::swap(p.i, p.j);
    const double ai = m.mixedness(p.i), aj = m.mixedness(p.j);
    Eigen::Matrix3d T = Eigen::Matrix3d::Zero();
    if (p.j != 2) {
        // (0|1): no closed form; evaluate the Gaussian phase-space integrals.
        if (basis == CorrelatorBasis::StandardForm) {
            return detail::correlators_from_phase_space(detail::standard_form_reduced(ai, aj, std::abs(m.m01), false));
        }
        return detail::correlators_from_phase_space(reduced_covariance(covariance(m, false).sigma, p));
    }
    const cplx mm = m.m_i2(p.i);
    const double A = ai * aj - 4.0 * std::norm(mm);
    T(2, 2) = 1.0 / A;
    if (basis == CorrelatorBasis::StandardForm) {
        T(0, 0) = 2.0 / M_PI * std::atan(2.0 * std::abs(mm) / std::sqrt(A));
        T(1, 1) = -T(0, 0) / A;
        return T;
    }
    const double re = mm.real(), im = mm.imag();
    T(0, 0) = 2.0 / M_PI * std::atan(2.0 * re / std::sqrt(ai * aj - 4.0 * re * re));
    T(1, 1) = -T(0, 0) / A;
    T(0, 1) = 2.0 / (M_PI * aj) * std::asinh(2.0 * im / std::sqrt(A));
    T(1, 0) = 2.0 / (M_PI * ai) * std::asinh(2.0 * im / std::sqrt(A));
    return T;
}

struct ThreeModeInvariants {
    double a0, a1, a2;
    double A01, A02, A12;
    cplx Z0, Z1, Z2;
    double delta;
};

inline ThreeModeInvariants three_mode_invariants(const SecondMoments& m) {
    ThreeModeInvariants v;
    v.a0 = m.mixedness(0);
    v.a1 = m.mixedness(1);
    v.a2 = m.mixedness(2);
    v.A01 = v.a0 * v.a1 - 4.0 * std::norm(m.m01);
    v.A02 = v.a0 * v.a2 - 4.0 * std::norm(m.m02);
    v.A12 = v.a1 * v.a2 - 4.0 * std::norm(m.m12);
    v.Z0 = -2.0 * v.a0 * std::conj(m.m12) + 4.0 * m.m01 * std::conj(m.m02);
    v.Z1 = -2.0 * v.a1 * std::conj(m.m02) + 4.0 * std::conj(m.m01) * std::conj(m.m12);
    v.Z2 = -2.0 * v.a2 * std::conj(m.m01) + 4.0 * m.m12 * std::conj(m.m02);
    v.delta = purity_delta(m);
    return v;
}

inline Tensor3 three_mode_correlators(const SecondMoments& m) {
    const ThreeModeInvariants v = three_mode_invariants(m);
    Tensor3 T{};
    constexpr int x = 0, y = 1, z = 2;
    auto at = [](double re, double AA) { return std::atan(re / std::sqrt(AA - re * re)); };
    T[z][x][x] = -2.0 / (M_PI * v.a0) * at(v.Z0.real(), v.A01 * v.A02);
    T[x][z][x] = -2.0 / (M_PI * v.a1) * at(v.Z1.real(), v.A01 * v.A12);
    T[x][x][z] = -2.0 / (M_PI * v.a2) * at(v.Z2.real(), v.A02 * v.A12);
    T[z][y][y] = -v.a0 / v.delta * T[z][x][x];
    T[y][z][y] = -v.a1 / v.delta * T[x][z][x];
    T[y][y][z] = v.a2 / v.delta * T[x][x][z];
    const double s0 = std::asinh(v.Z0.imag() / std::sqrt(v.a0 * v.delta));
    const double s1 = std::asinh(v.Z1.imag() / std::sqrt(v.a1 * v.delta));
    const double s2 = std::asinh(v.Z2.imag() / std::sqrt(v.a2 * v.delta));
    constexpr double k = 2.0 / M_PI;
    T[z][x][y] = k * s0 / v.A02;
    T[z][y][x] = k * s0 / v.A01;
    T[y][z][x] = k * s1 / v.A01;
    T[x][z][y] = k * s1 / v.A12;
    T[x][y][z] = -k * s2 / v.A12;
    T[y][x][z] = k * s2 / v.A02;
    T[z][z][z] = 1.0 / v.delta;
    return T;
}

inline CorrelatorTensor correlators(const SecondMoments& m, CorrelatorBasis two_mode_basis = CorrelatorBasis::CBasis) {
    CorrelatorTensor t;
    t.basis = two_mode_basis;
    t.omega = m.omega;
    t.temperature = m.temperature;
    t.two_mode02 = two_mode_correlators(m, {0, 2}, two_mode_basis);
    t.two_mode12 = two_mode_correlators(m, {1, 2}, two_mode_basis);
    t.two_mode01 = two_mode_correlators(m, {0, 1}, two_mode_basis);
    t.three_mode = three_mode_correlators(m);
    return t;
}

// Full three-mode table from the phase-space integrals.
inline Tensor3 three_mode_phase_space(const Mat6& sigma) {
    Tensor3 T{};
    const Eigen::MatrixXd s = sigma;
    for (int r = 0; r < 3; ++r)
        for (int u = 0; u < 3; ++u)
            for (int t = 0; t < 3; ++t) T[r][u][t] = phase_space_correlator(s, {0, 1, 2}, {Axis(r), Axis(u), Axis(t)});
    return T;
}

}  // namespace abh
