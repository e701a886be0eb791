#pragma once

// Number-basis verification route for the pseudo-spin correlators at zero temperature.
// The in-vacuum is expanded on |mu, nu, mu + nu> and the pseudo-spin operators are
// built as truncated matrices from Hermite-function overlaps.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "abh/bdg_scattering.hpp"
#include "abh/errors.hpp"
#include "abh/phase_space.hpp"
#include "abh/pseudospin.hpp"

namespace abh {

namespace detail {

// Hermite functions psi_0..psi_n at the points q (rows: points, columns: order).
inline Eigen::MatrixXd hermite_functions(const Eigen::VectorXd& q, int n) {
    Eigen::MatrixXd psi(q.size(), n + 1);
    const double c0 = std::pow(M_PI, -0.25);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double x = q(i);
        psi(i, 0) = c0 * std::exp(-0.5 * x * x);
        if (n >= 1) psi(i, 1) = std::sqrt(2.0) * x * psi(i, 0);
        for (int k = 1; k < n; ++k)
            psi(i, k + 1) = std::sqrt(2.0 / (k + 1)) * x * psi(i, k) - std::sqrt(double(k) / (k + 1)) * psi(i, k - 1);
    }
    return psi;
}

// Composite 20-point Gauss-Legendre rule on [0, upper] with panels of the given width.
inline void half_line_rule(double upper, double width, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    static const auto base = [] {
        constexpr int n = 20;
        std::array<double, n> x{}, w{};
        for (int i = 0; i < n; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return std::make_pair(x, w);
    }();
    const int panels = static_cast<int>(std::ceil(upper / width));
    const double h = upper / panels;
    nodes.resize(panels * 20);
    weights.resize(panels * 20);
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < 20; ++i) {
            nodes(p * 20 + i) = h * (p + 0.5 * (base.first[i] + 1.0));
            weights(p * 20 + i) = 0.5 * h * base.second[i];
        }
}

inline Eigen::MatrixXd half_line_overlaps(int n_max, double width) {
    const double upper = std::sqrt(2.0 * n_max + 1.0) + 12.0;
    Eigen::VectorXd q, w;
    half_line_rule(upper, width, q, w);
    const Eigen::MatrixXd psi = hermite_functions(q, n_max);
    return psi.transpose() * w.asDiagonal() * psi;
}

}  // namespace detail

// Truncated matrix of a pseudo-spin component in the number basis |0>..|n_max>.
//   Pi_z = (-1)^n, Pi_x = sgn(q), Pi_y = i Pi_x Pi_z.
inline Eigen::MatrixXcd pseudospin_matrix(Axis axis, int n_max) {
    if (n_max < 2) throw ConfigError("pseudo-spin matrices need n_max >= 2");
    const int d = n_max + 1;
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(d, d);
    if (axis == Axis::Z) {
        for (int n = 0; n < d; ++n) P(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
        return P;
    }
    const Eigen::MatrixXd coarse = detail::half_line_overlaps(n_max, 0.5);
    const Eigen::MatrixXd fine = detail::half_line_overlaps(n_max, 0.25);
    if ((coarse - fine).cwiseAbs().maxCoeff() > 1e-12) throw QuadratureFailure("Hermite overlap quadrature did not settle");
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m)
            if ((n + m) % 2 == 1) X(n, m) = 2.0 * fine(n, m);
    if (axis == Axis::X) return X.cast<cplx>();
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) P(n, m) = cplx(0.0, 1.0) * X(n, m) * ((m % 2 == 0) ? 1.0 : -1.0);
    return P;
}

struct FockState {
    int n_max = 0;
    cplx X02, X12;
    double inv_s22 = 0.0;                         // 1/|S22|
    std::vector<std::vector<cplx>> amplitude;     // amplitude[mu][nu], mu + nu <= n_max
    double captured_norm = 0.0;

    cplx operator()(int mu, int nu) const { return amplitude[mu][nu]; }
};

// Captured norm of the truncated expansion: 1 - r^(n_max + 1) with r = 1 - 1/|S22|^2.
inline double fock_captured_norm(const ScatteringMatrix& S, int n_max) {
    const double r = 1.0 - 1.0 / std::norm(S(2, 2));
    return 1.0 - std::pow(r, n_max + 1);
}

inline FockState fock_oracle_state(const ScatteringMatrix& S, int n_max) {
    if (S.dim != 3) throw ModeAbsent("the expansion needs the partner channel");
    FockState f;
    f.n_max = n_max;
    f.X02 = S(0, 2) / S(2, 2);
    f.X12 = S(1, 2) / S(2, 2);
    f.inv_s22 = 1.0 / std::abs(S(2, 2));
    f.amplitude.assign(n_max + 1, {});
    double norm = 0.0;
    for (int mu = 0; mu <= n_max; ++mu) {
        f.amplitude[mu].assign(n_max + 1 - mu, cplx(0.0));
        for (int nu = 0; mu + nu <= n_max; ++nu) {
            // sqrt(binom(mu + nu, mu)) through lgamma to stay finite at large orders
            const double lb = 0.5 * (std::lgamma(mu + nu + 1.0) - std::lgamma(mu + 1.0) - std::lgamma(nu + 1.0));
            const double mod = std::exp(lb + mu * std::log(std::abs(f.X02) + 1e-300) +
                                        nu * std::log(std::abs(f.X12) + 1e-300)) *
                               f.inv_s22;
            const double ph = mu * std::arg(f.X02) + nu * std::arg(f.X12);
            f.amplitude[mu][nu] = std::polar(mod, ph);
            norm += mod * mod;
        }
    }
    f.captured_norm = norm;
    if (norm < 0.999) throw TruncationTooSmall("captured norm below 0.999; raise n_max");
    return f;
}

// Smallest n_max in {40, 80, 160} whose captured norm reaches 0.999.
inline int fock_truncation(const ScatteringMatrix& S, int start = 40, int cap = 160) {
    for (int n = start; n <= cap; n *= 2)
        if (fock_captured_norm(S, n) >= 0.999) return n;
    throw TruncationTooSmall("squeezing too strong for the number-basis expansion");
}

struct PseudospinMatrices {
    int n_max;
    std::array<Eigen::MatrixXcd, 3> pi;
    explicit PseudospinMatrices(int n) : n_max(n) {
        for (int a = 0; a < 3; ++a) pi[a] = pseudospin_matrix(Axis(a), n);
    }
    const Eigen::MatrixXcd& operator[](Axis a) const { return pi[static_cast<int>(a)]; }
};

// <psi| A0 (x) A1 (x) A2 |psi> / <psi|psi> for operators given as truncated matrices.
inline cplx fock_expectation(const FockState& s, const Eigen::MatrixXcd& A0, const Eigen::MatrixXcd& A1,
                             const Eigen::MatrixXcd& A2) {
    const int n = s.n_max;
    cplx acc = 0.0;
    for (int mu = 0; mu <= n; ++mu)
        for (int nu = 0; mu + nu <= n; ++nu) {
            const cplx bra = std::conj(s.amplitude[mu][nu]);
            if (bra == cplx(0.0)) continue;
            cplx inner = 0.0;
            for (int mu2 = 0; mu2 <= n; ++mu2) {
                const cplx a0 = A0(mu, mu2);
                if (a0 == cplx(0.0)) continue;
                for (int nu2 = 0; mu2 + nu2 <= n; ++nu2) {
                    const cplx a1 = A1(nu, nu2);
                    if (a1 == cplx(0.0)) continue;
                    inner += a0 * a1 * A2(mu + nu, mu2 + nu2) * s.amplitude[mu2][nu2];
                }
            }
            acc += bra * inner;
        }
    return acc / s.captured_norm;
}

inline double fock_oracle_correlator(const FockState& s, const PseudospinMatrices& P, Axis r, Axis u, Axis t) {
    if (P.n_max != s.n_max) throw ConfigError("pseudo-spin matrices and state use different truncations");
    return fock_expectation(s, P[r], P[u], P[t]).real();
}

// Correlator with the truncation doubled until it moves by less than 1e-4.
inline double fock_oracle_correlator(const ScatteringMatrix& S, Axis r, Axis u, Axis t, int* used_n_max = nullptr) {
    int n = fock_truncation(S);
    double prev = fock_oracle_correlator(fock_oracle_state(S, n), PseudospinMatrices(n), r, u, t);
    while (true) {
        if (2 * n > 160) break;
        const double next = fock_oracle_correlator(fock_oracle_state(S, 2 * n), PseudospinMatrices(2 * n), r, u, t);
        const bool settled = std::abs(next - prev) < 1e-4;
        n *= 2;
        prev = next;
        if (settled) break;
    }
    if (used_n_max) *used_n_max = n;
    return prev;
}

// The four operators whose common eigenstate is the zero-frequency vacuum, with the
// expected eigenvalues.
struct GhzRelation {
    std::array<Axis, 3> axes;
    int eigenvalue;
};

inline const std::array<GhzRelation, 4>& ghz_relations() {
    static const std::array<GhzRelation, 4> r = {{{{Axis::Y, Axis::Y, Axis::Z}, +1},
                                                  {{Axis::Y, Axis::Z, Axis::Y}, +1},
                                                  {{Axis::Z, Axis::Y, Axis::Y}, -1},
                                                  {{Axis::Z, Axis::Z, Axis::Z}, +1}}};
    return r;
}

struct GhzResiduals {
    std::array<double, 4> residual{};
    std::array<double, 4> expectation{};
};

// || (O - lambda) |psi> || for the truncated state. The operators square to one, so
// ||(O - lambda)|psi>||^2 = 2 (1 - lambda <O>); squaring the truncated matrices instead
// would miss the slowly decaying tail of sgn(q) in the number basis.
inline GhzResiduals ghz_eigenrelation_check(const FockState& s, const PseudospinMatrices& P) {
    GhzResiduals g;
    for (int k = 0; k < 4; ++k) {
        const auto& rel = ghz_relations()[k];
        const double o = fock_expectation(s, P[rel.axes[0]], P[rel.axes[1]], P[rel.axes[2]]).real();
        g.expectation[k] = o;
        g.residual[k] = std::sqrt(std::max(0.0, 2.0 * (1.0 - rel.eigenvalue * o)));
    }
    return g;
}

// Same residuals from the exact Gaussian correlators, for squeezing too strong for
// any practical truncation.
inline GhzResiduals ghz_eigenrelation_check(const Tensor3& T) {
    GhzResiduals g;
    for (int k = 0; k < 4; ++k) {
        const auto& rel = ghz_relations()[k];
        const double o = T[static_cast<int>(rel.axes[0])][static_cast<int>(rel.axes[1])][static_cast<int>(rel.axes[2])];
        g.expectation[k] = o;
        g.residual[k] = std::sqrt(std::max(0.0, 2.0 * (1.0 - rel.eigenvalue * o)));
    }
    return g;
}

}  // namespace abh
