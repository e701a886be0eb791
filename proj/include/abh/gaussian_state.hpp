#pragma once

// Three-mode Gaussian state of the outgoing modes: second moments, covariance
// matrix in the xi = sqrt(2) (q0, p0, q1, p1, q2, p2) convention (vacuum = identity),
// PPT entanglement measure and the effective squeezed modes of the optical model.

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "abh/bdg_scattering.hpp"
#include "abh/dispersion.hpp"
#include "abh/errors.hpp"
#include "abh/flow_config.hpp"

namespace abh {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

struct Occupations {
    double n0 = 0.0, n1 = 0.0, n2 = 0.0;
};

struct SecondMoments {
    double omega = 0.0;
    double temperature = 0.0;
    double nc0 = 0.0, nc1 = 0.0, nc2 = 0.0;  // <c_i^dag c_i>
    cplx m01;                                 // <c0 c1^dag>
    cplx m02, m12;                            // <c_i c2>
    Occupations nbar;
    double purity = 0.0;  // sqrt(det sigma) when known from the scattering data, else 0

    double nc(int i) const { return i == 0 ? nc0 : (i == 1 ? nc1 : nc2); }
    double mixedness(int i) const { return 2.0 * nc(i) + 1.0; }
    cplx m_i2(int i) const { return i == 0 ? m02 : m12; }
};

inline double bose(double energy, double T) {
    if (T <= 0.0) return 0.0;
    return 1.0 / std::expm1(energy / T);
}

// Ingoing occupations: Bose factors at the comoving Bogoliubov energy of each ingoing channel.
inline Occupations thermal_occupations(const FlowConfig& c, double omega, double T,
                                       double guard = kDefaultThresholdGuard) {
    check_frequency(c, omega, guard);
    if (omega >= threshold_omega(c)) throw ModeAbsent("channel 2 exists only below the threshold");
    Occupations n;
    if (T <= 0.0) return n;
    n.n0 = bose(bogoliubov_omega(q_in(c, 0, omega, guard), Region::Upstream, c), T);
    n.n1 = bose(bogoliubov_omega(q_in(c, 1, omega, guard), Region::Downstream, c), T);
    n.n2 = bose(bogoliubov_omega(q_in(c, 2, omega, guard), Region::Downstream, c), T);
    return n;
}

inline SecondMoments second_moments(const ScatteringMatrix& S, const Occupations& n, double temperature = 0.0) {
    if (S.dim != 3) throw ModeAbsent("second moments need the partner channel (omega below threshold)");
    const double w[3] = {n.n0, n.n1, 1.0 + n.n2};
    SecondMoments m;
    m.omega = S.omega;
    m.temperature = temperature;
    m.nbar = n;
    for (int j = 0; j < 3; ++j) {
        m.nc0 += std::norm(S(0, j)) * w[j];
        m.nc1 += std::norm(S(1, j)) * w[j];
        m.nc2 += std::norm(S(2, j)) * w[j];
        m.m01 += S(0, j) * std::conj(S(1, j)) * w[j];
        m.m02 += S(0, j) * std::conj(S(2, j)) * w[j];
        m.m12 += S(1, j) * std::conj(S(2, j)) * w[j];
    }
    m.nc2 -= 1.0;
    // det sigma = |det S|^4 prod (1 + 2 nbar_j)^2; this avoids the a^3 cancellation of the
    // moment expansion, which loses all digits once |S|^2 ~ 1e5.
    m.purity = std::norm(S.entries.determinant()) * (1.0 + 2.0 * n.n0) * (1.0 + 2.0 * n.n1) * (1.0 + 2.0 * n.n2);
    return m;
}

inline Eigen::Matrix2d block_01(cplx m) {
    Eigen::Matrix2d b;
    b << m.real(), -m.imag(), m.imag(), m.real();
    return 2.0 * b;
}

inline Eigen::Matrix2d block_i2(cplx m) {
    Eigen::Matrix2d b;
    b << m.real(), m.imag(), m.imag(), -m.real();
    return 2.0 * b;
}

inline Mat6 symplectic_form(int modes = 3) {
    Mat6 J = Mat6::Zero();
    for (int k = 0; k < modes; ++k) {
        J(2 * k, 2 * k + 1) = 1.0;
        J(2 * k + 1, 2 * k) = -1.0;
    }
    return J;
}

// Smallest eigenvalue of sigma + i J (must be >= 0 for a physical state).
template <int N>
double uncertainty_floor(const Eigen::Matrix<double, N, N>& sigma) {
    Eigen::Matrix<cplx, N, N> h = sigma.template cast<cplx>();
    for (int k = 0; k < N / 2; ++k) {
        h(2 * k, 2 * k + 1) += cplx(0.0, 1.0);
        h(2 * k + 1, 2 * k) -= cplx(0.0, 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, N, N>> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

struct CovarianceMatrix {
    Mat6 sigma;
    double delta;           // sqrt(det sigma)
    double physical_floor;  // smallest eigenvalue of sigma + i J
};

// Physicality tolerance relative to the scale of sigma: the moments carry the
// round-off of |S|^2 ~ 1/omega, so an absolute floor is meaningless at low omega.
inline constexpr double kPhysicalityTol = 1e-9;

inline CovarianceMatrix covariance(const SecondMoments& m, bool check = true) {
    CovarianceMatrix c;
    Mat6& s = c.sigma;
    s.setZero();
    for (int i = 0; i < 3; ++i) s.block<2, 2>(2 * i, 2 * i) = m.mixedness(i) * Eigen::Matrix2d::Identity();
    s.block<2, 2>(0, 2) = block_01(m.m01);
    s.block<2, 2>(0, 4) = block_i2(m.m02);
    s.block<2, 2>(2, 4) = block_i2(m.m12);
    s.block<2, 2>(2, 0) = s.block<2, 2>(0, 2).transpose();
    s.block<2, 2>(4, 0) = s.block<2, 2>(0, 4).transpose();
    s.block<2, 2>(4, 2) = s.block<2, 2>(2, 4).transpose();
    c.delta = m.purity > 0.0 ? m.purity : std::sqrt(std::max(0.0, s.determinant()));
    c.physical_floor = uncertainty_floor<6>(s);
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if (check && c.physical_floor < -kPhysicalityTol * scale) {
        throw PhysicalityViolation("covariance matrix violates the uncertainty relation");
    }
    return c;
}

// Closed-form sqrt(det sigma) in terms of the moments.
inline double purity_delta_moments(const SecondMoments& m) {
    const double a0 = m.mixedness(0), a1 = m.mixedness(1), a2 = m.mixedness(2);
    return a0 * a1 * a2 + 16.0 * (m.m01 * m.m12 * std::conj(m.m02)).real() - 4.0 * a0 * std::norm(m.m12) -
           4.0 * a1 * std::norm(m.m02) - 4.0 * a2 * std::norm(m.m01);
}

inline double purity_delta(const SecondMoments& m) { return m.purity > 0.0 ? m.purity : purity_delta_moments(m); }

// Symplectic eigenvalues (ascending) of a 2n x 2n covariance matrix.
template <int N>
Eigen::Matrix<double, N / 2, 1> symplectic_eigenvalues(const Eigen::Matrix<double, N, N>& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(sigma);
    Eigen::Matrix<double, N, N> root = es.operatorSqrt();
    Eigen::Matrix<double, N, N> J = Eigen::Matrix<double, N, N>::Zero();
    for (int k = 0; k < N / 2; ++k) {
        J(2 * k, 2 * k + 1) = 1.0;
        J(2 * k + 1, 2 * k) = -1.0;
    }
    Eigen::Matrix<cplx, N, N> h = cplx(0.0, 1.0) * (root * J * root).template cast<cplx>();
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, N, N>> hs(h, Eigen::EigenvaluesOnly);
    Eigen::Matrix<double, N / 2, 1> nu;
    for (int k = 0; k < N / 2; ++k) nu(k) = hs.eigenvalues()(N / 2 + k);
    return nu;
}

struct ModePair {
    int i, j;
};

inline Mat4 reduced_covariance(const Mat6& s, ModePair p) {
    const int idx[4] = {2 * p.i, 2 * p.i + 1, 2 * p.j, 2 * p.j + 1};
    Mat4 r;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) r(a, b) = s(idx[a], idx[b]);
    return r;
}

// 1 - smallest symplectic eigenvalue of the partially transposed (p_j -> -p_j) reduced state.
inline double ppt_measure_general(const Mat4& reduced) {
    Mat4 t = Mat4::Identity();
    t(3, 3) = -1.0;
    Mat4 pt = t * reduced * t;
    return 1.0 - symplectic_eigenvalues<4>(pt)(0);
}

inline double ppt_measure_closed(const SecondMoments& m, int i) {
    const double ni = m.nc(i), n2 = m.nc2;
    return -ni - n2 + std::sqrt((ni - n2) * (ni - n2) + 4.0 * std::norm(m.m_i2(i)));
}

inline double ppt_measure(const SecondMoments& m, ModePair p) {
    if (p.i == 1 && p.j == 0) p = {0, 1};
    if (p.j == 2 && (p.i == 0 || p.i == 1)) return ppt_measure_closed(m, p.i);
    return ppt_measure_general(reduced_covariance(covariance(m, false).sigma, p));
}

// Passive transformation c -> U c of the annihilation operators as a symplectic
// orthogonal matrix acting on xi.
inline Mat6 passive_symplectic(const Eigen::Matrix3cd& U) {
    Mat6 M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            M.block<2, 2>(2 * i, 2 * j) << U(i, j).real(), -U(i, j).imag(), U(i, j).imag(), U(i, j).real();
        }
    return M;
}

struct FModeState {
    double nf0 = 0.0, nf1 = 0.0, nf2 = 0.0;
    double m12 = 0.0;  // <f1 f2>
    double r2 = 0.0;
    double lambda = 0.0;  // PPT measure between f1 and f2
    double chsh = 0.0;    // optimised CHSH parameter between f1 and f2
    Eigen::Matrix3cd transform;  // f = transform * c
};

// A = a_i a_j - 4 |m|^2 may be passed in when it is known without cancellation.
inline double chsh_standard_form(double a_i, double a_j, double abs_m, double A = -1.0) {
    if (A <= 0.0) A = a_i * a_j - 4.0 * abs_m * abs_m;
    const double txx = 2.0 / M_PI * std::atan(2.0 * abs_m / std::sqrt(A));
    const double tzz = 1.0 / A;
    return 2.0 * std::sqrt(txx * txx + tzz * tzz);
}

inline FModeState fmode_state(const ScatteringMatrix& S, const Occupations& n) {
    const OpticalModel om = optical_model(S);
    FModeState f;
    f.r2 = om.r2;
    const double sh2 = std::sinh(om.r2) * std::sinh(om.r2);
    const double ch2 = std::cosh(om.r2) * std::cosh(om.r2);
    const double n01 = sh2 > 0.0 ? (std::norm(S(2, 0)) * n.n0 + std::norm(S(2, 1)) * n.n1) / sh2 : 0.0;
    if (sh2 > 0.0) {
        for (int i = 0; i < 2; ++i) f.nf0 += std::norm(S(1, 2) * S(0, i) - S(0, 2) * S(1, i)) * (i == 0 ? n.n0 : n.n1);
        f.nf0 /= sh2;
    }
    f.nf1 = ch2 * n01 + sh2 * (1.0 + n.n2);
    f.nf2 = sh2 * n01 + ch2 * (1.0 + n.n2) - 1.0;
    f.m12 = std::cosh(om.r2) * std::sinh(om.r2) * (n01 + n.n2 + 1.0);
    // (f1, f2) is a two-mode squeezed thermal state, so a1 a2 - 4 m12^2 = (2 n01 + 1)(2 nbar2 + 1)
    // exactly; the partially transposed eigenvalues multiply to the same number.
    const double A = (2.0 * n01 + 1.0) * (2.0 * n.n2 + 1.0);
    const double nu_plus = f.nf1 + f.nf2 + 1.0 + std::sqrt((f.nf1 - f.nf2) * (f.nf1 - f.nf2) + 4.0 * f.m12 * f.m12);
    f.lambda = 1.0 - A / nu_plus;
    f.chsh = chsh_standard_form(2.0 * f.nf1 + 1.0, 2.0 * f.nf2 + 1.0, f.m12, A);

    const double ct = std::cos(om.theta), st = std::sin(om.theta);
    const cplx e0 = std::polar(1.0, -om.phase02), e1 = std::polar(1.0, -om.phase12), e2 = std::polar(1.0, om.phase22);
    f.transform << -st * e0, ct * e1, 0.0, ct * e0, st * e1, 0.0, 0.0, 0.0, e2;
    return f;
}

// Covariance matrix of the f modes obtained by rotating the c-mode covariance.
inline Mat6 fmode_covariance(const Mat6& sigma_c, const FModeState& f) {
    Mat6 M = passive_symplectic(f.transform);
    return M * sigma_c * M.transpose();
}

}  // namespace abh
