#pragma once

#include <Eigen/Dense>

#include "piclab/curvature_tensor.hpp"

namespace piclab {

// ============================================================
// Hamilton ODE quadratic
// ============================================================
//
//   Q(R)_ijkl = sum_{p,q} R_ijpq R_klpq
//             + 2 sum_{p,q} ( R_ipkq R_jplq - R_iplq R_jpkq )
//
// The square term is 2 M^2 in the pair basis (each unordered pair is counted
// twice by the free double sum).  The sharp term is assembled from the
// n^2 x n^2 Gram matrix G[(i,k),(p,q)] = R_ipkq, for which
// (G G^T)[(i,k),(j,l)] = sum_{p,q} R_ipkq R_jplq.

namespace detail {

inline Eigen::MatrixXd slot_gram(const CurvatureTensor& r) {
    const int n = r.dim;
    Eigen::MatrixXd g(n * n, n * n);
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k) {
            const int row = (i - 1) * n + (k - 1);
            for (int p = 1; p <= n; ++p)
                for (int q = 1; q <= n; ++q) g(row, (p - 1) * n + (q - 1)) = r.at(i, p, k, q);
        }
    return g;
}

}  // namespace detail

inline CurvatureTensor q_map(const CurvatureTensor& r) {
    const int n = r.dim;
    const int nn = r.pairs();
    const Eigen::MatrixXd sq = 2.0 * (r.m * r.m);
    const Eigen::MatrixXd g = detail::slot_gram(r);
    const Eigen::MatrixXd gg = g * g.transpose();
    auto sharp = [&](int i, int k, int j, int l) {
        return gg((i - 1) * n + (k - 1), (j - 1) * n + (l - 1));
    };

    Eigen::MatrixXd m(nn, nn);
    int p = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            int q = 0;
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    if (q >= p)
                        m(p, q) = sq(p, q) + 2.0 * (sharp(i, k, j, l) - sharp(i, l, j, k));
                    ++q;
                }
            ++p;
        }
    m.triangularView<Eigen::StrictlyLower>() = m.transpose();
    return CurvatureTensor::from_pair_matrix(n, std::move(m));
}

/// Scalar curvature of Q(R) without forming Q: scal(Q(R)) = 2 |Ric|^2.
inline double scal_of_q(const CurvatureTensor& r) {
    const SymmetricForm ric = ricci(r);
    return 2.0 * ric.mat.squaredNorm();
}

/// Ricci form of Q(R) without forming Q: Ric(Q(R))_ik = 2 sum_pq R_ipkq Ric_pq.
inline SymmetricForm ricci_of_q(const CurvatureTensor& r) {
    const int n = r.dim;
    const SymmetricForm ric = ricci(r);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int k = i; k <= n; ++k) {
            double s = 0.0;
            for (int p = 1; p <= n; ++p)
                for (int q = 1; q <= n; ++q) s += r.at(i, p, k, q) * ric(p, q);
            out(i - 1, k - 1) = 2.0 * s;
            out(k - 1, i - 1) = 2.0 * s;
        }
    return SymmetricForm(std::move(out));
}

}  // namespace piclab
