#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "piclab/errors.hpp"

namespace piclab {

// ============================================================
// Pair basis
// ============================================================
//
// Algebraic curvature tensors are stored as symmetric bilinear forms on
// Lambda^2(R^n), i.e. dense symmetric N x N matrices over the lexicographic
// pair basis {(i,j) : 1 <= i < j <= n}, N = n(n-1)/2.  The two antisymmetries
// and the pair symmetry are exact by storage; only the first Bianchi identity
// needs numerical policing.

inline constexpr int kMinDim = 4;
inline constexpr int kMaxDim = 12;

inline int pair_count(int n) { return n * (n - 1) / 2; }

/// Index of (i,j), 1 <= i < j <= n, in the lexicographic pair basis.
inline int pair_index(int n, int i, int j) {
    return (i - 1) * (2 * n - i) / 2 + (j - i - 1);
}

/// Wedge of two vectors as a pair-basis coordinate vector.
inline Eigen::VectorXd wedge(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd w(pair_count(n));
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) w(p++) = x(i) * y(j) - x(j) * y(i);
    return w;
}

/// Expand a pair-basis coordinate vector into the antisymmetric n x n matrix
/// with A(i,j) = u_{(i,j)} for i < j.
inline Eigen::MatrixXd antisym_from_pair(int n, const Eigen::VectorXd& u) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            a(i, j) = u(p);
            a(j, i) = -u(p);
            ++p;
        }
    return a;
}

/// Matrix of the induced map on Lambda^2: column (i,j) is (Ue_i) ^ (Ue_j).
inline Eigen::MatrixXd lambda2(const Eigen::MatrixXd& u) {
    const int n = static_cast<int>(u.rows());
    const int nn = pair_count(n);
    Eigen::MatrixXd w(nn, nn);
    int q = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) w.col(q++) = wedge(u.col(i), u.col(j));
    return w;
}

// ============================================================
// Types
// ============================================================

/// Symmetric bilinear form on R^n (Ricci tensors, Kulkarni-Nomizu factors).
struct SymmetricForm {
    Eigen::MatrixXd mat;

    SymmetricForm() = default;
    explicit SymmetricForm(Eigen::MatrixXd m) : mat(std::move(m)) {
        if (mat.rows() != mat.cols()) throw DimMismatch("SymmetricForm: matrix not square");
        mat = ((mat + mat.transpose()) * 0.5).eval();
    }

    int dim() const { return static_cast<int>(mat.rows()); }
    double operator()(int i, int k) const { return mat(i - 1, k - 1); }

    /// Eigenvalues sorted ascending.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
};

/// Algebraic curvature tensor on R^n in the pair basis.
///
/// Component access is 1-based: at(i,j,k,l) = R_{ijkl}.  The Frobenius norm
/// runs over all n^4 components, which is 2x the matrix Frobenius norm.
struct CurvatureTensor {
    int dim = 0;
    Eigen::MatrixXd m;  // N x N, symmetric

    CurvatureTensor() = default;

    static CurvatureTensor from_pair_matrix(int n, Eigen::MatrixXd mat) {
        if (n < kMinDim || n > kMaxDim)
            throw IndexOutOfRange("dimension " + std::to_string(n) + " outside [" +
                                  std::to_string(kMinDim) + "," + std::to_string(kMaxDim) + "]");
        const int nn = pair_count(n);
        if (mat.rows() != nn || mat.cols() != nn)
            throw DimMismatch("pair matrix has wrong size for dimension " + std::to_string(n));
        CurvatureTensor r;
        r.dim = n;
        r.m = ((mat + mat.transpose()) * 0.5).eval();
        return r;
    }

    static CurvatureTensor zero(int n) {
        return from_pair_matrix(n, Eigen::MatrixXd::Zero(pair_count(n), pair_count(n)));
    }

    int pairs() const { return pair_count(dim); }

    /// R_{ijkl} with arbitrary index order; antisymmetries supplied by sign.
    double at(int i, int j, int k, int l) const {
        if (i == j || k == l) return 0.0;
        double s = 1.0;
        if (i > j) {
            std::swap(i, j);
            s = -s;
        }
        if (k > l) {
            std::swap(k, l);
            s = -s;
        }
        return s * m(pair_index(dim, i, j), pair_index(dim, k, l));
    }

    /// Frobenius norm over all n^4 components.
    double norm() const { return 2.0 * m.norm(); }

    /// Largest first-Bianchi cyclic sum |R_ijkl + R_iklj + R_iljk| over
    /// 4-subsets; quadruples with a repeated index vanish identically.
    double bianchi_residual() const {
        double worst = 0.0;
        for (int i = 1; i <= dim; ++i)
            for (int j = i + 1; j <= dim; ++j)
                for (int k = j + 1; k <= dim; ++k)
                    for (int l = k + 1; l <= dim; ++l) {
                        double b = at(i, j, k, l) + at(i, k, l, j) + at(i, l, j, k);
                        worst = std::max(worst, std::abs(b));
                    }
        return worst;
    }

    CurvatureTensor& operator+=(const CurvatureTensor& o) {
        if (o.dim != dim) throw DimMismatch("tensor sum: dimensions differ");
        m += o.m;
        return *this;
    }
    CurvatureTensor& operator-=(const CurvatureTensor& o) {
        if (o.dim != dim) throw DimMismatch("tensor difference: dimensions differ");
        m -= o.m;
        return *this;
    }
    CurvatureTensor& operator*=(double a) {
        m *= a;
        return *this;
    }

    friend CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
    friend CurvatureTensor operator-(CurvatureTensor a, const CurvatureTensor& b) { return a -= b; }
    friend CurvatureTensor operator*(double a, CurvatureTensor r) { return r *= a; }
    friend CurvatureTensor operator*(CurvatureTensor r, double a) { return r *= a; }
};

/// Frobenius inner product over all n^4 components.
inline double dot(const CurvatureTensor& a, const CurvatureTensor& b) {
    if (a.dim != b.dim) throw DimMismatch("tensor dot: dimensions differ");
    return 4.0 * a.m.cwiseProduct(b.m).sum();
}

// ============================================================
// Construction
// ============================================================

struct TensorEntry {
    int i, j, k, l;
    double value;
};

namespace detail {

// Canonicalize (i,j,k,l) to i<j, k<l, (i,j) <= (k,l) lexicographically and
// fold the sign into the value.  Returns false for entries that antisymmetry
// forces to zero (i == j or k == l).
inline bool canonicalize_entry(int& i, int& j, int& k, int& l, double& v) {
    if (i == j || k == l) return false;
    if (i > j) {
        std::swap(i, j);
        v = -v;
    }
    if (k > l) {
        std::swap(k, l);
        v = -v;
    }
    if (k < i || (k == i && l < j)) {
        std::swap(i, k);
        std::swap(j, l);
    }
    return true;
}

}  // namespace detail

/// Build a validated curvature tensor from sparse entries (1-based indices).
/// Unlisted components are zero.  Listed components may appear under any
/// index order; contradictory duplicates and first-Bianchi failures are
/// rejected rather than silently repaired.
inline CurvatureTensor make_tensor(int n, const std::vector<TensorEntry>& entries) {
    if (n < kMinDim || n > kMaxDim)
        throw IndexOutOfRange("dimension " + std::to_string(n) + " outside [" +
                              std::to_string(kMinDim) + "," + std::to_string(kMaxDim) + "]");
    const int nn = pair_count(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nn, nn);
    Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(nn, nn);

    for (const TensorEntry& e : entries) {
        for (int idx : {e.i, e.j, e.k, e.l})
            if (idx < 1 || idx > n)
                throw IndexOutOfRange("entry index " + std::to_string(idx) + " outside [1," +
                                      std::to_string(n) + "]");
        int i = e.i, j = e.j, k = e.k, l = e.l;
        double v = e.value;
        if (!detail::canonicalize_entry(i, j, k, l, v)) {
            if (e.value != 0.0)
                throw SymmetryConflict("entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                       "," + std::to_string(e.k) + "," + std::to_string(e.l) +
                                       ") must vanish by antisymmetry");
            continue;
        }
        const int p = pair_index(n, i, j);
        const int q = pair_index(n, k, l);
        if (seen(p, q) != 0.0) {
            if (std::abs(m(p, q) - v) > 1e-12 * std::max(1.0, std::abs(v)))
                throw SymmetryConflict("conflicting values for component (" + std::to_string(i) +
                                       "," + std::to_string(j) + "," + std::to_string(k) + "," +
                                       std::to_string(l) + ")");
            continue;
        }
        seen(p, q) = seen(q, p) = 1.0;
        m(p, q) = m(q, p) = v;
    }

    CurvatureTensor r = CurvatureTensor::from_pair_matrix(n, std::move(m));
    const double res = r.bianchi_residual();
    if (res > 1e-9 * r.norm())
        throw BianchiViolation("first Bianchi residual " + std::to_string(res) +
                               " exceeds 1e-9 * norm");
    return r;
}

/// Orthogonal projection of a pair-symmetric 4-tensor onto the first-Bianchi
/// subspace: subtract the fully antisymmetric part,
///   out_ijkl = T_ijkl - (T_ijkl + T_iklj + T_iljk) / 3.
/// Idempotent; the identity on tensors already satisfying the identity.
inline CurvatureTensor project_bianchi(const CurvatureTensor& t) {
    const int n = t.dim;
    Eigen::MatrixXd m = t.m;
    // The cyclic sum is fully antisymmetric, so it only moves components with
    // four distinct indices; everything else is untouched.
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = j + 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    const double b =
                        (t.at(i, j, k, l) + t.at(i, k, l, j) + t.at(i, l, j, k)) / 3.0;
                    // Orbit of the 4-subset under the pair symmetries: the three
                    // canonical slots (ij|kl), (ik|jl), (il|jk).
                    auto sub = [&](int a1, int a2, int b1, int b2, double corr) {
                        const int p = pair_index(n, a1, a2);
                        const int q = pair_index(n, b1, b2);
                        m(p, q) -= corr;
                        if (p != q) m(q, p) -= corr;
                    };
                    // b is B_{ijkl}/3 with B fully antisymmetric:
                    // B_{ikjl} = -B_{ijkl}, B_{iljk} = +B_{ijkl}.
                    sub(i, j, k, l, b);
                    sub(i, k, j, l, -b);
                    sub(i, l, j, k, b);
                }
    return CurvatureTensor::from_pair_matrix(n, std::move(m));
}

// ============================================================
// Model tensors
// ============================================================

/// Curvature tensor of the unit round sphere: I_ijkl = d_ik d_jl - d_il d_jk,
/// the identity matrix on the pair basis.
inline CurvatureTensor identity_tensor(int n) {
    return CurvatureTensor::from_pair_matrix(
        n, Eigen::MatrixXd::Identity(pair_count(n), pair_count(n)));
}

/// Kulkarni-Nomizu product of two symmetric forms:
///   (A ^ B)_ijkl = A_ik B_jl - A_il B_jk - A_jk B_il + A_jl B_ik.
inline CurvatureTensor kulkarni_nomizu(const SymmetricForm& a, const SymmetricForm& b) {
    if (a.dim() != b.dim()) throw DimMismatch("kulkarni_nomizu: dimensions differ");
    const int n = a.dim();
    if (n < kMinDim || n > kMaxDim)
        throw IndexOutOfRange("kulkarni_nomizu: dimension outside supported range");
    const int nn = pair_count(n);
    Eigen::MatrixXd m(nn, nn);
    int p = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            int q = 0;
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    m(p, q) = a(i, k) * b(j, l) - a(i, l) * b(j, k) - a(j, k) * b(i, l) +
                              a(j, l) * b(i, k);
                    ++q;
                }
            ++p;
        }
    return CurvatureTensor::from_pair_matrix(n, std::move(m));
}

inline CurvatureTensor sphere_tensor(int n, double c) { return c * identity_tensor(n); }

/// Curvature of S^{n-1} x R scaled by c: (c/2) P ^ P with P the projector
/// onto the first n-1 coordinates.  Ricci eigenvalues (0, c(n-2), ...),
/// scalar curvature c(n-1)(n-2).
inline CurvatureTensor cylinder_tensor(int n, double c) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    p(n - 1, n - 1) = 0.0;
    return (c / 2.0) * kulkarni_nomizu(SymmetricForm(p), SymmetricForm(p));
}

// ============================================================
// Traces
// ============================================================

/// Ricci form: Ric_ik = sum_j R_ijkj.
inline SymmetricForm ricci(const CurvatureTensor& r) {
    const int n = r.dim;
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int k = i; k <= n; ++k) {
            double s = 0.0;
            for (int j = 1; j <= n; ++j) s += r.at(i, j, k, j);
            ric(i - 1, k - 1) = s;
            ric(k - 1, i - 1) = s;
        }
    return SymmetricForm(std::move(ric));
}

/// Scalar curvature: the full trace; equals twice the pair-matrix trace.
inline double scalar(const CurvatureTensor& r) { return 2.0 * r.m.trace(); }

/// R + s * identity_tensor, without materializing the identity.
inline CurvatureTensor shift_identity(const CurvatureTensor& r, double s) {
    CurvatureTensor out = r;
    out.m.diagonal().array() += s;
    return out;
}

/// Pull-back along an orthogonal matrix: (U.R)(x,y,z,w) = R(Ux,Uy,Uz,Uw).
inline CurvatureTensor conjugate(const CurvatureTensor& r, const Eigen::MatrixXd& u) {
    if (u.rows() != r.dim || u.cols() != r.dim) throw DimMismatch("conjugate: bad matrix size");
    const Eigen::MatrixXd w = lambda2(u);
    return CurvatureTensor::from_pair_matrix(r.dim, w.transpose() * r.m * w);
}

}  // namespace piclab
