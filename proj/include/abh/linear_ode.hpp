#pragma once

// Fixed-step three-stage Gauss-Legendre collocation for linear systems y' = A(x) y.
// The scheme is symplectic, so quadratic invariants y^H K y with K^H A + A^H K = 0
// (the Bogoliubov current) are conserved to round-off.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace abh {

template <typename R, int N, int M, typename MatrixFn>
void gauss_legendre_step(MatrixFn&& a_of_x, R x, R h, Eigen::Matrix<std::complex<R>, N, M>& y) {
    using C = std::complex<R>;
    using MatN = Eigen::Matrix<C, N, N>;
    static const R s15 = std::sqrt(R(15));
    static const R c[3] = {R(0.5) - s15 / 10, R(0.5), R(0.5) + s15 / 10};
    static const R a[3][3] = {{R(5) / 36, R(2) / 9 - s15 / 15, R(5) / 36 - s15 / 30},
                              {R(5) / 36 + s15 / 24, R(2) / 9, R(5) / 36 - s15 / 24},
                              {R(5) / 36 + s15 / 30, R(2) / 9 + s15 / 15, R(5) / 36}};
    static const R b[3] = {R(5) / 18, R(4) / 9, R(5) / 18};

    MatN A[3];
    for (int i = 0; i < 3; ++i) A[i] = a_of_x(x + c[i] * h);

    Eigen::Matrix<C, 3 * N, 3 * N> sys;
    Eigen::Matrix<C, 3 * N, M> rhs;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            MatN blk = -h * a[i][j] * A[i];
            if (i == j) blk += MatN::Identity();
            sys.template block<N, N>(i * N, j * N) = blk;
        }
        rhs.template block<N, M>(i * N, 0) = A[i] * y;
    }
    Eigen::Matrix<C, 3 * N, M> k = sys.partialPivLu().solve(rhs);
    for (int i = 0; i < 3; ++i) y += h * b[i] * k.template block<N, M>(i * N, 0);
}

}  // namespace abh
