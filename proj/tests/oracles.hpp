#pragma once

// Reference implementations used only by the tests.  Each one recomputes a
// library result with a slower, structurally different method (index loops
// instead of pair-matrix algebra, grids instead of closed forms), so that a
// shared bug in the production path cannot silently confirm itself.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <piclab/piclab.hpp>

namespace oracles {

using piclab::ConeKind;
using piclab::CurvatureTensor;

// ------------------------------------------------------------
// Quadratic of the curvature ODE, by raw quadruple index loops:
//   Q_ijkl = sum_pq R_ijpq R_klpq + 2 sum_pq (R_ipkq R_jplq - R_iplq R_jpkq)
// ------------------------------------------------------------
inline CurvatureTensor q_reference(const CurvatureTensor& r) {
    const int n = r.dim;
    const int nn = r.pairs();
    Eigen::MatrixXd m(nn, nn);
    int row = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            int col = 0;
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    double sq = 0.0, sharp = 0.0;
                    for (int p = 1; p <= n; ++p)
                        for (int q = 1; q <= n; ++q) {
                            sq += r.at(i, j, p, q) * r.at(k, l, p, q);
                            sharp += r.at(i, p, k, q) * r.at(j, p, l, q) -
                                     r.at(i, p, l, q) * r.at(j, p, k, q);
                        }
                    m(row, col) = sq + 2.0 * sharp;
                    ++col;
                }
            ++row;
        }
    return CurvatureTensor::from_pair_matrix(n, std::move(m));
}

// ------------------------------------------------------------
// First-Bianchi projection, entry by entry: the cyclic sum over the last
// three slots spans the totally antisymmetric complement, and subtracting a
// third of it per entry is the orthogonal projection onto the kernel.
// ------------------------------------------------------------
inline CurvatureTensor bianchi_projection_reference(const CurvatureTensor& r) {
    const int n = r.dim;
    const int nn = r.pairs();
    Eigen::MatrixXd m(nn, nn);
    int row = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            int col = 0;
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    const double cyc =
                        r.at(i, j, k, l) + r.at(i, k, l, j) + r.at(i, l, j, k);
                    m(row, col) = r.at(i, j, k, l) - cyc / 3.0;
                    ++col;
                }
            ++row;
        }
    return CurvatureTensor::from_pair_matrix(n, std::move(m));
}

// ------------------------------------------------------------
// R(x, y, z, w) for arbitrary vectors by full 4-index contraction.
// ------------------------------------------------------------
inline double curvature_4form(const CurvatureTensor& r, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& w) {
    const int n = r.dim;
    double s = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                for (int l = 1; l <= n; ++l)
                    s += x(i - 1) * y(j - 1) * z(k - 1) * w(l - 1) * r.at(i, j, k, l);
    return s;
}

struct RawComponents {
    double r1313, r1414, r2323, r2424, r1234;
};

inline RawComponents components_reference(const CurvatureTensor& r, const Eigen::MatrixXd& e) {
    RawComponents c{};
    c.r1313 = curvature_4form(r, e.col(0), e.col(2), e.col(0), e.col(2));
    c.r1414 = curvature_4form(r, e.col(0), e.col(3), e.col(0), e.col(3));
    c.r2323 = curvature_4form(r, e.col(1), e.col(2), e.col(1), e.col(2));
    c.r2424 = curvature_4form(r, e.col(1), e.col(3), e.col(1), e.col(3));
    c.r1234 = curvature_4form(r, e.col(0), e.col(1), e.col(2), e.col(3));
    return c;
}

inline double biquadratic(const RawComponents& c, double l, double m) {
    return c.r1313 + l * l * c.r1414 + m * m * c.r2323 + l * l * m * m * c.r2424 -
           2.0 * l * m * c.r1234;
}

inline double frame_value_reference(const CurvatureTensor& r, const piclab::Frame& f,
                                    ConeKind kind) {
    const RawComponents c = components_reference(r, f.e);
    switch (kind) {
        case ConeKind::pic: return biquadratic(c, 1.0, 1.0);
        case ConeKind::pic1: return biquadratic(c, f.lambda, 1.0);
        case ConeKind::pic2: return biquadratic(c, f.lambda, f.mu);
    }
    return 0.0;
}

// ------------------------------------------------------------
// Minimum of the biquadratic over the kind's (lambda, mu) range by grid
// search plus repeated local refinement (no stationarity algebra).
// ------------------------------------------------------------
inline double inner_min_reference(const RawComponents& c, ConeKind kind) {
    if (kind == ConeKind::pic) return biquadratic(c, 1.0, 1.0);
    const bool vary_mu = kind == ConeKind::pic2;

    double best = std::numeric_limits<double>::infinity();
    double bl = 0.0, bm = 1.0;
    auto scan = [&](double l_lo, double l_hi, double m_lo, double m_hi, int steps) {
        for (int a = 0; a <= steps; ++a) {
            const double l = l_lo + (l_hi - l_lo) * a / steps;
            if (!vary_mu) {
                const double v = biquadratic(c, l, 1.0);
                if (v < best) best = v, bl = l, bm = 1.0;
                continue;
            }
            for (int b = 0; b <= steps; ++b) {
                const double m = m_lo + (m_hi - m_lo) * b / steps;
                const double v = biquadratic(c, l, m);
                if (v < best) best = v, bl = l, bm = m;
            }
        }
    };

    scan(0.0, 1.0, 0.0, 1.0, 100);
    double radius = 0.01;
    for (int pass = 0; pass < 4; ++pass) {
        const double l_lo = std::max(0.0, bl - radius), l_hi = std::min(1.0, bl + radius);
        const double m_lo = std::max(0.0, bm - radius), m_hi = std::min(1.0, bm + radius);
        scan(l_lo, l_hi, m_lo, m_hi, 40);
        radius *= 0.05;
    }
    return best;
}

// ------------------------------------------------------------
// Upper bound on the cone margin by random-frame probing with the reference
// functional.  Converges to the margin from above as frames grows.
// ------------------------------------------------------------
inline double margin_probe(const CurvatureTensor& r, ConeKind kind, int frames,
                           std::uint64_t seed) {
    piclab::Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < frames; ++k) {
        const piclab::Frame f = piclab::random_frame(rng, r.dim);
        best = std::min(best, inner_min_reference(components_reference(r, f.e), kind));
    }
    return best;
}

// ------------------------------------------------------------
// Closed-form solution of the ODE restricted to the identity ray:
// R(t) = c(t) * Id with c' = 2 (n-1) c^2, so c(t) = c0 / (1 - 2 (n-1) c0 t).
// ------------------------------------------------------------
inline double identity_ray_coefficient(int n, double c0, double t) {
    return c0 / (1.0 - 2.0 * (n - 1) * c0 * t);
}

// Ricci contraction by index loops: Ric_ik = sum_p R(e_i, e_p, e_k, e_p).
inline Eigen::MatrixXd ricci_reference(const CurvatureTensor& r) {
    const int n = r.dim;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int p = 1; p <= n; ++p) s += r.at(i, p, k, p);
            out(i - 1, k - 1) = s;
        }
    return out;
}

// Gaussian curvature-type matrix with Bianchi projection, for fuzz inputs.
inline CurvatureTensor random_tensor(int n, std::uint64_t seed) {
    piclab::Rng rng(seed);
    return piclab::gaussian_tensor(n, rng);
}

}  // namespace oracles
