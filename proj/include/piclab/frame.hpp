#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/rng.hpp"

namespace piclab {

// ============================================================
// Cones and frames
// ============================================================

enum class ConeKind { pic, pic1, pic2 };

inline std::string cone_name(ConeKind k) {
    switch (k) {
        case ConeKind::pic: return "pic";
        case ConeKind::pic1: return "pic1";
        case ConeKind::pic2: return "pic2";
    }
    return "?";
}

/// A curvature cone: plain isotropic-type cone for delta = 0, or its
/// uniform tightening {R : R - delta * scal(R) * I in cone} for delta > 0.
struct ConeSpec {
    ConeKind kind = ConeKind::pic;
    double delta = 0.0;
};

/// Four orthonormal vectors (columns of e) plus the two interpolation
/// parameters of the cone functional.  pic ignores (lambda, mu), pic1 uses
/// lambda only, pic2 uses both.
struct Frame {
    Eigen::MatrixXd e;  // n x 4
    double lambda = 1.0;
    double mu = 1.0;

    int dim() const { return static_cast<int>(e.rows()); }

    double gram_residual() const {
        return (e.transpose() * e - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    }
};

/// Re-orthonormalize 4 column vectors by Householder QR with a sign fix so
/// that the map is continuous near orthonormal inputs.
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& e) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(e);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(e.rows(), 4);
    Eigen::Matrix4d r = qr.matrixQR().topRows(4).triangularView<Eigen::Upper>();
    for (int c = 0; c < 4; ++c)
        if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    return q;
}

inline Frame random_frame(Rng& rng, int n) {
    Eigen::MatrixXd e(n, 4);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < n; ++r) e(r, c) = rng.normal();
    Frame f;
    f.e = orthonormalize(e);
    return f;
}

/// The first four coordinate directions as a frame.
inline Frame coordinate_frame(int n) {
    Frame f;
    f.e = Eigen::MatrixXd::Identity(n, n).leftCols(4);
    return f;
}

// ============================================================
// Functional evaluation
// ============================================================

/// The five curvature components the cone functional reads off a frame:
///   value(lambda, mu) = r1313 + lambda^2 r1414 + mu^2 r2323
///                     + lambda^2 mu^2 r2424 - 2 lambda mu r1234.
struct FrameComponents {
    double r1313, r1414, r2323, r2424, r1234;

    double value(double lambda, double mu) const {
        const double l2 = lambda * lambda, m2 = mu * mu;
        return r1313 + l2 * r1414 + m2 * r2323 + l2 * m2 * r2424 - 2.0 * lambda * mu * r1234;
    }
};

inline FrameComponents frame_components(const CurvatureTensor& r, const Eigen::MatrixXd& e) {
    const Eigen::VectorXd w13 = wedge(e.col(0), e.col(2));
    const Eigen::VectorXd w14 = wedge(e.col(0), e.col(3));
    const Eigen::VectorXd w23 = wedge(e.col(1), e.col(2));
    const Eigen::VectorXd w24 = wedge(e.col(1), e.col(3));
    const Eigen::VectorXd w12 = wedge(e.col(0), e.col(1));
    const Eigen::VectorXd w34 = wedge(e.col(2), e.col(3));
    FrameComponents c{};
    c.r1313 = w13.dot(r.m * w13);
    c.r1414 = w14.dot(r.m * w14);
    c.r2323 = w23.dot(r.m * w23);
    c.r2424 = w24.dot(r.m * w24);
    c.r1234 = w12.dot(r.m * w34);
    return c;
}

struct InnerMin {
    double value;
    double lambda;
    double mu;
};

namespace detail {

/// Exact minimum of the biquadratic a + b l^2 + c m^2 + d l^2 m^2 - 2 e l m
/// over (l, m) in [0,1]^2: corners, edge vertices (quadratic in one
/// variable), and interior stationary points.  Multiplying the two interior
/// stationarity equations gives b l^2 = c m^2; substituting back reduces to
/// a square root in l^2, so the candidate list below is complete.
inline InnerMin min_box(double a, double b, double c, double d, double e) {
    std::vector<std::pair<double, double>> cand = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};

    // Edge l = 1: quadratic in m with vertex e / (c + d); edge m = 1 likewise.
    const double cd = c + d;
    if (cd > 0.0) {
        const double mv = e / cd;
        if (std::isfinite(mv) && mv > 0.0 && mv < 1.0) cand.emplace_back(1.0, mv);
    }
    const double bd = b + d;
    if (bd > 0.0) {
        const double lv = e / bd;
        if (std::isfinite(lv) && lv > 0.0 && lv < 1.0) cand.emplace_back(lv, 1.0);
    }
    // Edges l = 0 and m = 0 have their vertices at the origin corner.

    if (d != 0.0 && b != 0.0 && c != 0.0 && b * c > 0.0) {
        const double root = std::sqrt(b * c);
        for (double sgn : {1.0, -1.0}) {
            const double s = c * (-1.0 + sgn * std::abs(e) / root) / d;
            if (!std::isfinite(s) || s <= 0.0 || s >= 1.0) continue;
            const double t = b * s / c;
            if (t <= 0.0 || t >= 1.0) continue;
            cand.emplace_back(std::sqrt(s), std::sqrt(t));
        }
    } else if (b == 0.0 && c == 0.0 && d != 0.0) {
        // Functional depends on l*m only; its vertex is at l*m = e/d.
        const double u = e / d;
        if (std::isfinite(u) && u > 0.0 && u < 1.0) {
            const double v = std::sqrt(u);
            cand.emplace_back(v, v);
        }
    }

    InnerMin best{a, 0.0, 0.0};  // value at (0,0) is a
    bool first = true;
    for (const auto& [l, m] : cand) {
        const double v = a + b * l * l + c * m * m + d * l * l * m * m - 2.0 * e * l * m;
        if (first || v < best.value) {
            best = {v, l, m};
            first = false;
        }
    }
    return best;
}

inline InnerMin inner_min(const FrameComponents& c, ConeKind kind) {
    switch (kind) {
        case ConeKind::pic:
            return {c.value(1.0, 1.0), 1.0, 1.0};
        case ConeKind::pic1: {
            // mu pinned to 1: quadratic in lambda.
            const double a = c.r1313 + c.r2323;
            const double b = c.r1414 + c.r2424;
            InnerMin best{a, 0.0, 1.0};
            double v1 = a + b - 2.0 * c.r1234;
            if (v1 < best.value) best = {v1, 1.0, 1.0};
            if (b > 0.0) {
                const double lv = c.r1234 / b;
                if (std::isfinite(lv) && lv > 0.0 && lv < 1.0) {
                    const double v = a + b * lv * lv - 2.0 * c.r1234 * lv;
                    if (v < best.value) best = {v, lv, 1.0};
                }
            }
            return best;
        }
        case ConeKind::pic2:
            return min_box(c.r1313, c.r1414, c.r2323, c.r2424, c.r1234);
    }
    return {0.0, 0.0, 0.0};
}

}  // namespace detail

/// Functional value of R at a validated frame, using the frame's own
/// (lambda, mu) as far as the cone kind reads them.
inline double frame_value(const CurvatureTensor& r, const Frame& f, ConeKind kind) {
    if (f.dim() != r.dim) throw DimMismatch("frame_value: frame dimension mismatch");
    if (f.gram_residual() > 1e-12)
        throw NonOrthonormalFrame("frame Gram residual " + std::to_string(f.gram_residual()));
    const FrameComponents c = frame_components(r, f.e);
    switch (kind) {
        case ConeKind::pic: return c.value(1.0, 1.0);
        case ConeKind::pic1: return c.value(f.lambda, 1.0);
        case ConeKind::pic2: return c.value(f.lambda, f.mu);
    }
    return 0.0;
}

/// Exact minimum of the functional over the cone's (lambda, mu) range at a
/// fixed validated frame.
inline InnerMin min_over_lambda_mu(const CurvatureTensor& r, const Frame& f, ConeKind kind) {
    if (f.dim() != r.dim) throw DimMismatch("min_over_lambda_mu: frame dimension mismatch");
    if (f.gram_residual() > 1e-12)
        throw NonOrthonormalFrame("frame Gram residual " + std::to_string(f.gram_residual()));
    return detail::inner_min(frame_components(r, f.e), kind);
}

}  // namespace piclab
