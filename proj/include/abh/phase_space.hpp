#pragma once

// Expectation values of products of pseudo-spin components over a Gaussian state,
// computed directly from the Wigner function. The Wigner transforms of the
// components are sgn(q) (x), delta(q) P(1/p) (y) and pi delta(q) delta(p) (z);
// delta factors pin variables to zero, the remaining sgn / principal-value factors
// act on at most two free Gaussian variables and have closed-form averages.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace abh {

enum class Axis { X = 0, Y = 1, Z = 2 };

inline char axis_char(Axis a) { return "xyz"[static_cast<int>(a)]; }

// sigma: covariance of xi = sqrt(2) (q_0, p_0, ..., q_{n-1}, p_{n-1}); axes[k] is the
// component measured on mode modes[k]; other modes are traced out.
inline double phase_space_correlator(const Eigen::MatrixXd& sigma, const std::vector<int>& modes,
                                     const std::vector<Axis>& axes) {
    const Eigen::MatrixXd C = 0.5 * sigma;  // covariance of (q, p)
    std::vector<int> pinned, free_idx;
    std::vector<bool> free_is_sign;
    int n_z = 0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const int q = 2 * modes[k], p = 2 * modes[k] + 1;
        switch (axes[k]) {
            case Axis::X:
                free_idx.push_back(q);
                free_is_sign.push_back(true);
                break;
            case Axis::Y:
                pinned.push_back(q);
                free_idx.push_back(p);
                free_is_sign.push_back(false);
                break;
            case Axis::Z:
                pinned.push_back(q);
                pinned.push_back(p);
                ++n_z;
                break;
        }
    }
    // Every free factor is odd: an odd number of them averages to zero.
    if (free_idx.size() % 2 == 1) return 0.0;

    double prefactor = std::pow(M_PI, n_z);
    Eigen::MatrixXd cond;
    const int nf = static_cast<int>(free_idx.size());
    Eigen::MatrixXd Cff(nf, nf);
    for (int a = 0; a < nf; ++a)
        for (int b = 0; b < nf; ++b) Cff(a, b) = C(free_idx[a], free_idx[b]);
    if (!pinned.empty()) {
        const int nz = static_cast<int>(pinned.size());
        Eigen::MatrixXd Czz(nz, nz), Cfz(nf, nz);
        for (int a = 0; a < nz; ++a)
            for (int b = 0; b < nz; ++b) Czz(a, b) = C(pinned[a], pinned[b]);
        for (int a = 0; a < nf; ++a)
            for (int b = 0; b < nz; ++b) Cfz(a, b) = C(free_idx[a], pinned[b]);
        Eigen::LLT<Eigen::MatrixXd> llt(Czz);
        const double det = llt.matrixL().determinant();
        prefactor *= 1.0 / (std::pow(2.0 * M_PI, 0.5 * nz) * det);
        cond = nf > 0 ? Eigen::MatrixXd(Cff - Cfz * llt.solve(Cfz.transpose())) : Eigen::MatrixXd();
    } else {
        cond = Cff;
    }
    if (nf == 0) return prefactor;

    const double s1 = std::sqrt(cond(0, 0)), s2 = std::sqrt(cond(1, 1));
    const double c12 = cond(0, 1);
    const double rho = c12 / (s1 * s2);
    const bool sg1 = free_is_sign[0], sg2 = free_is_sign[1];
    double value;
    if (sg1 && sg2) {
        value = 2.0 / M_PI * std::asin(rho);
    } else if (!sg1 && !sg2) {
        value = std::asin(rho) / (s1 * s2 * std::sqrt(1.0 - rho * rho));
    } else {
        // E[sgn(X) P(1/Y)] with X the sign variable.
        const double sx = sg1 ? s1 : s2, sy = sg1 ? s2 : s1;
        const double sc = std::sqrt(sx * sx - c12 * c12 / (sy * sy));
        value = std::sqrt(2.0 / M_PI) / sy * std::asinh(c12 / (sy * sc));
    }
    return prefactor * value;
}

}  // namespace abh
