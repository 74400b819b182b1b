#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/frame.hpp"
#include "piclab/parallel.hpp"
#include "piclab/quadratic.hpp"
#include "piclab/rng.hpp"

namespace piclab {

// ============================================================
// Margin certification
// ============================================================
//
// margin(R, cone) estimates inf over orthonormal 4-frames (and the cone's
// (lambda, mu) range, minimized exactly per frame) of the cone functional.
// Multi-start projected gradient descent on the frame manifold; each restart
// seeds from hash(seed, restart index) so the result does not depend on how
// restarts are spread over workers.  For delta > 0 the search runs on the
// shifted tensor R - delta * scal(R) * I.

struct SearchParams {
    int restarts = 64;
    int max_iters = 200;
    std::uint64_t seed = 0;
    int workers = 1;
    /// Extra deterministic starting frames, tried before the built-in ones
    /// (used to warm-start bisection loops).
    std::vector<Frame> hints;
};

struct MarginCertificate {
    double value = 0.0;
    Frame frame;
    int restarts = 0;
    int converged_restarts = 0;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// One projected-gradient descent run on a normalized tensor.
struct DescentResult {
    double value = std::numeric_limits<double>::infinity();
    double lambda = 0.0, mu = 0.0;
    Eigen::MatrixXd e;
    bool converged = false;
};

inline Eigen::MatrixXd frame_gradient(const CurvatureTensor& r, const Eigen::MatrixXd& e,
                                      double lambda, double mu) {
    const int n = r.dim;
    auto uhat = [&](int a, int b) {
        return antisym_from_pair(n, Eigen::VectorXd(r.m * wedge(e.col(a), e.col(b))));
    };
    const Eigen::MatrixXd u13 = uhat(0, 2), u14 = uhat(0, 3), u23 = uhat(1, 2), u24 = uhat(1, 3),
                          u12 = uhat(0, 1), u34 = uhat(2, 3);
    const double l2 = lambda * lambda, m2 = mu * mu, lm = lambda * mu;
    Eigen::MatrixXd g(n, 4);
    g.col(0) = 2.0 * (u13 * e.col(2)) + 2.0 * l2 * (u14 * e.col(3)) - 2.0 * lm * (u34 * e.col(1));
    g.col(1) = 2.0 * m2 * (u23 * e.col(2)) + 2.0 * l2 * m2 * (u24 * e.col(3)) +
               2.0 * lm * (u34 * e.col(0));
    g.col(2) = -2.0 * (u13 * e.col(0)) - 2.0 * m2 * (u23 * e.col(1)) -
               2.0 * lm * (u12 * e.col(3));
    g.col(3) = -2.0 * l2 * (u14 * e.col(0)) - 2.0 * l2 * m2 * (u24 * e.col(1)) +
               2.0 * lm * (u12 * e.col(2));
    return g;
}

inline DescentResult descend(const CurvatureTensor& rn, ConeKind kind, Eigen::MatrixXd e,
                             int max_iters) {
    DescentResult out;
    InnerMin cur = inner_min(frame_components(rn, e), kind);
    double alpha = 0.3;
    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        const Eigen::MatrixXd g = frame_gradient(rn, e, cur.lambda, cur.mu);
        const Eigen::Matrix4d etg = e.transpose() * g;
        const Eigen::MatrixXd gt = g - e * ((etg + etg.transpose()) * 0.5);
        const double gn2 = gt.squaredNorm();
        if (std::sqrt(gn2) <= 1e-10) {
            converged = true;
            break;
        }
        bool moved = false;
        double a = alpha;
        for (int back = 0; back < 40; ++back) {
            const Eigen::MatrixXd enew = orthonormalize(e - a * gt);
            const InnerMin trial = inner_min(frame_components(rn, enew), kind);
            if (trial.value <= cur.value - 1e-4 * a * gn2) {
                const double drop = cur.value - trial.value;
                e = enew;
                cur = trial;
                moved = true;
                alpha = (back == 0) ? std::min(1.5 * a, 1.0) : a;
                if (drop <= 1e-14 && iter > 3) {
                    converged = true;
                    iter = max_iters;  // value has stopped moving
                }
                break;
            }
            a *= 0.5;
        }
        if (!moved) {
            converged = true;  // no descent direction at line-search resolution
            break;
        }
    }
    out.value = cur.value;
    out.lambda = cur.lambda;
    out.mu = cur.mu;
    out.e = e;
    out.converged = converged;
    return out;
}

/// Deterministic structured starts: coordinate frame plus Ricci eigenframe
/// arrangements (flat directions of model tensors live in the Ricci kernel,
/// so these make small restart budgets reliable on structured inputs).
inline std::vector<Eigen::MatrixXd> structured_starts(const CurvatureTensor& rn) {
    const int n = rn.dim;
    std::vector<Eigen::MatrixXd> starts;
    starts.push_back(Eigen::MatrixXd::Identity(n, n).leftCols(4));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ricci(rn).mat);
    const Eigen::MatrixXd v = es.eigenvectors();  // ascending eigenvalues
    Eigen::MatrixXd f(n, 4);
    f << v.col(0), v.col(1), v.col(2), v.col(3);
    starts.push_back(orthonormalize(f));
    f << v.col(n - 1), v.col(n - 2), v.col(0), v.col(1);
    starts.push_back(orthonormalize(f));
    f << v.col(1), v.col(2), v.col(0), v.col(3);
    starts.push_back(orthonormalize(f));
    return starts;
}

}  // namespace detail

inline MarginCertificate margin(const CurvatureTensor& r, const ConeSpec& cone,
                                const SearchParams& params = {}) {
    const CurvatureTensor shifted =
        cone.delta != 0.0 ? shift_identity(r, -cone.delta * scalar(r)) : r;
    const double scale = shifted.m.norm();

    MarginCertificate cert;
    cert.restarts = params.restarts;
    cert.seed = params.seed;
    cert.tolerance = 1e-8 * (1.0 + 2.0 * scale);

    if (scale == 0.0) {
        // Zero tensor: every frame value is zero; report the inner minimizer
        // of the zero functional for the requested kind.
        cert.value = 0.0;
        cert.frame = coordinate_frame(r.dim);
        const InnerMin im = detail::inner_min(FrameComponents{0, 0, 0, 0, 0}, cone.kind);
        cert.frame.lambda = im.lambda;
        cert.frame.mu = im.mu;
        cert.converged_restarts = params.restarts;
        return cert;
    }

    CurvatureTensor rn = shifted;
    rn.m /= scale;

    std::vector<Eigen::MatrixXd> fixed;
    for (const Frame& h : params.hints) fixed.push_back(h.e);
    for (Eigen::MatrixXd& s : detail::structured_starts(rn)) fixed.push_back(std::move(s));

    const int total = std::max<int>(params.restarts, 1);
    std::vector<detail::DescentResult> results(total);
    parallel_for_index(total, params.workers, [&](int idx) {
        Eigen::MatrixXd e0;
        if (idx < static_cast<int>(fixed.size())) {
            e0 = fixed[idx];
        } else {
            Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(idx)));
            e0 = random_frame(rng, rn.dim).e;
        }
        results[idx] = detail::descend(rn, cone.kind, std::move(e0), params.max_iters);
    });

    int best = 0;
    int converged = 0;
    for (int i = 0; i < total; ++i) {
        if (results[i].converged) ++converged;
        if (results[i].value < results[best].value) best = i;
    }
    cert.value = results[best].value * scale;
    cert.frame.e = results[best].e;
    cert.frame.lambda = results[best].lambda;
    cert.frame.mu = results[best].mu;
    cert.restarts = total;
    cert.converged_restarts = converged;
    return cert;
}

// ============================================================
// Membership, boundary, tangent cone
// ============================================================

struct MembershipResult {
    bool member = false;
    MarginCertificate certificate;
    double tolerance = 0.0;
};

/// R is accepted as a cone member when the certified margin of the
/// delta-shifted tensor clears -tolerance.  For the plain isotropic cone this
/// is equivalent to margin(R, pic) >= 4 * delta * scal(R): every frame sees
/// the identity tensor with value exactly 4 there.
inline MembershipResult is_member(const CurvatureTensor& r, const ConeSpec& cone,
                                  const SearchParams& params = {}) {
    MembershipResult out;
    out.certificate = margin(r, cone, params);
    out.tolerance = 1e-7 * (1.0 + std::abs(scalar(r)));
    out.member = out.certificate.value >= -out.tolerance;
    return out;
}

struct BoundaryPoint {
    CurvatureTensor tensor;
    double mu = 0.0;
    MarginCertificate certificate;
};

/// Walk R backwards along the identity ray until the cone margin crosses
/// zero.  The margin is concave and strictly decreasing in the ray parameter
/// (the identity's frame values lie in [1,4]), so bisection is safe.
inline BoundaryPoint boundary_point(const CurvatureTensor& r, const ConeSpec& cone,
                                    const SearchParams& params = {}) {
    const double scal = scalar(r);
    const MarginCertificate cert0 = margin(r, cone, params);
    if (cert0.value <= 1e-7 * (1.0 + std::abs(scal)))
        throw NotInterior("margin " + std::to_string(cert0.value) + " not strictly positive");

    const int n = r.dim;
    const double ray_rate = 1.0 - cone.delta * n * (n - 1);
    if (ray_rate <= 0.0)
        throw NotInterior("uniform cone with delta >= 1/(n(n-1)) has empty interior");

    SearchParams quick = params;
    quick.restarts = std::max(8, params.restarts / 8);
    quick.hints.clear();
    quick.hints.push_back(cert0.frame);

    double lo = 0.0, hi = cert0.value / ray_rate;
    // Guard the upper bracket; the rate bound makes this a no-op normally.
    for (int guard = 0; guard < 8; ++guard) {
        if (margin(shift_identity(r, -hi), cone, quick).value <= 0.0) break;
        hi *= 2.0;
    }
    const double width = 1e-9 * (1.0 + std::abs(scal));
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        const MarginCertificate c = margin(shift_identity(r, -mid), cone, quick);
        quick.hints[0] = c.frame;
        (c.value > 0.0 ? lo : hi) = mid;
    }

    BoundaryPoint out;
    out.mu = 0.5 * (lo + hi);
    out.tensor = shift_identity(r, -out.mu);
    SearchParams fin = params;
    fin.hints.push_back(quick.hints[0]);
    out.certificate = margin(out.tensor, cone, fin);

    // The bracket above ran on reduced-restart searches.  If the full search
    // lands outside the bisection band, the quick searches missed the global
    // minimizer somewhere; re-bisect with full searches around the current mu
    // (the margin decreases at a rate of at least v_min per unit mu, where
    // v_min is the smallest identity frame value the cone kind allows).
    if (std::abs(out.certificate.value) > 10.0 * width) {
        const double v_min =
            cone.kind == ConeKind::pic ? 4.0 : (cone.kind == ConeKind::pic1 ? 2.0 : 1.0);
        const double slack = std::abs(out.certificate.value) / (v_min * ray_rate) + width;
        double flo = std::max(0.0, out.mu - slack), fhi = out.mu + slack;
        fin.hints.back() = out.certificate.frame;
        while (fhi - flo > width) {
            const double mid = 0.5 * (flo + fhi);
            const MarginCertificate c = margin(shift_identity(r, -mid), cone, fin);
            fin.hints.back() = c.frame;
            (c.value > 0.0 ? flo : fhi) = mid;
        }
        out.mu = 0.5 * (flo + fhi);
        out.tensor = shift_identity(r, -out.mu);
        out.certificate = margin(out.tensor, cone, fin);
    }
    return out;
}

// ============================================================
// Active frames and the tangent cone test
// ============================================================

struct ActiveFrame {
    Frame frame;
    double activity = 0.0;  // frame value of the boundary tensor
};

namespace detail {

/// Orbit of a frame under the exact symmetries of the pic functional:
/// pair swaps (with a compensating sign so R_1234 keeps its sign), the block
/// swap (e1,e2) <-> (e3,e4), and sign patterns with product +1.
inline std::vector<Eigen::MatrixXd> pic_frame_orbit(const Eigen::MatrixXd& e) {
    std::vector<Eigen::MatrixXd> orbit;
    orbit.reserve(64);
    Eigen::MatrixXd base[8];
    base[0] = e;
    // swap12 with e3 -> -e3
    base[1] = e;
    base[1].col(0) = e.col(1);
    base[1].col(1) = e.col(0);
    base[1].col(2) = -e.col(2);
    // swap34 with e1 -> -e1
    base[2] = e;
    base[2].col(2) = e.col(3);
    base[2].col(3) = e.col(2);
    base[2].col(0) = -e.col(0);
    // both swaps
    base[3] = base[1];
    {
        Eigen::VectorXd t = base[3].col(2);
        base[3].col(2) = base[3].col(3);
        base[3].col(3) = t;
        base[3].col(0) = -base[3].col(0);
    }
    for (int k = 0; k < 4; ++k) {
        base[4 + k] = base[k];
        base[4 + k].col(0) = base[k].col(2);
        base[4 + k].col(1) = base[k].col(3);
        base[4 + k].col(2) = base[k].col(0);
        base[4 + k].col(3) = base[k].col(1);
    }
    const int signs[8][4] = {{1, 1, 1, 1},   {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1},
                             {-1, 1, 1, -1}, {-1, 1, -1, 1}, {-1, -1, 1, 1}, {-1, -1, -1, -1}};
    for (const Eigen::MatrixXd& b : base)
        for (const auto& s : signs) {
            Eigen::MatrixXd g = b;
            for (int c = 0; c < 4; ++c)
                if (s[c] < 0) g.col(c) = -g.col(c);
            orbit.push_back(std::move(g));
        }
    return orbit;
}

inline double frame_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, ConeKind kind) {
    if (kind != ConeKind::pic) return (a - b).norm();
    double best = std::numeric_limits<double>::infinity();
    for (const Eigen::MatrixXd& g : pic_frame_orbit(b)) best = std::min(best, (a - g).norm());
    return best;
}

}  // namespace detail

struct TangentConeParams {
    SearchParams search = [] {
        SearchParams sp;
        sp.restarts = 256;  // boundary sweeps need wider coverage than margins
        return sp;
    }();
    /// Frames with boundary value below eps_active * scal count as active.
    double eps_active = 1e-7;
    /// Frames closer than this (modulo functional symmetries) merge.
    double cluster_distance = 1e-3;
};

struct ActiveFrameSweep {
    double min_margin = 0.0;
    std::vector<ActiveFrame> active;
};

/// Wide multi-start sweep collecting the near-minimizing frames of R (merged
/// under the functional's exact symmetries).  The global minimizer is always
/// included, so the active set is never empty.
inline ActiveFrameSweep active_frames(const CurvatureTensor& rb, ConeKind kind,
                                      const TangentConeParams& params = {}) {
    const double scal = scalar(rb);
    const double scale = rb.m.norm();
    if (scale == 0.0) throw NotOnBoundary("zero tensor has no distinguished frames");
    CurvatureTensor rn = rb;
    rn.m /= scale;

    std::vector<Eigen::MatrixXd> fixed = detail::structured_starts(rn);
    const int total = std::max(params.search.restarts, static_cast<int>(fixed.size()));
    std::vector<detail::DescentResult> results(total);
    parallel_for_index(total, params.search.workers, [&](int idx) {
        Eigen::MatrixXd e0;
        if (idx < static_cast<int>(fixed.size())) {
            e0 = fixed[idx];
        } else {
            Rng rng(mix_seed(params.search.seed, static_cast<std::uint64_t>(idx)));
            e0 = random_frame(rng, rn.dim).e;
        }
        results[idx] = detail::descend(rn, kind, std::move(e0), params.search.max_iters);
    });

    ActiveFrameSweep out;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& res : results) out.min_margin = std::min(out.min_margin, res.value * scale);

    const double eps_abs =
        std::max(params.eps_active * std::max(std::abs(scal), 1e-12), out.min_margin);
    for (const auto& res : results) {
        const double raw = res.value * scale;
        if (raw > eps_abs) continue;
        bool merged = false;
        for (auto& a : out.active)
            if (detail::frame_distance(a.frame.e, res.e, kind) < params.cluster_distance) {
                if (raw < a.activity) {
                    a.activity = raw;
                    a.frame.e = res.e;
                    a.frame.lambda = res.lambda;
                    a.frame.mu = res.mu;
                }
                merged = true;
                break;
            }
        if (!merged) {
            ActiveFrame af;
            af.frame.e = res.e;
            af.frame.lambda = res.lambda;
            af.frame.mu = res.mu;
            af.activity = raw;
            out.active.push_back(std::move(af));
        }
    }
    return out;
}

struct TangentConeResult {
    bool contained = false;
    double min_value = 0.0;  // worst linear-functional value of S
    std::vector<ActiveFrame> active;
    Frame worst_frame;
    double tolerance = 0.0;
};

/// One-sided supporting-halfspace test at a boundary tensor: collect the
/// near-minimizing frames of R_b, and check that the candidate S has
/// nonnegative functional value on each.  A negative value exhibits a
/// separating supporting functional; a pass means none was sampled.
inline TangentConeResult tangent_cone_contains(const CurvatureTensor& rb,
                                               const CurvatureTensor& s, ConeKind kind,
                                               const TangentConeParams& params = {}) {
    if (rb.dim != s.dim) throw DimMismatch("tangent_cone_contains: dimensions differ");
    const double scal = scalar(rb);
    const double on_tol = 1e-5 * (1.0 + std::abs(scal));

    ActiveFrameSweep sweep = active_frames(rb, kind, params);
    if (std::abs(sweep.min_margin) > on_tol)
        throw NotOnBoundary("margin " + std::to_string(sweep.min_margin) +
                            " exceeds boundary band " + std::to_string(on_tol));

    TangentConeResult out;
    out.active = std::move(sweep.active);
    out.tolerance = 1e-9 * (1.0 + s.norm());
    out.min_value = std::numeric_limits<double>::infinity();
    for (const auto& a : out.active) {
        const double v = frame_value(s, a.frame, kind);
        if (v < out.min_value) {
            out.min_value = v;
            out.worst_frame = a.frame;
        }
    }
    out.contained = out.min_value >= -out.tolerance;
    return out;
}

/// Ricci two-positivity margin: lambda_1 + lambda_2 - theta * scal.
inline double two_positivity_margin(const CurvatureTensor& r, double theta) {
    const Eigen::VectorXd ev = ricci(r).eigenvalues();
    return ev(0) + ev(1) - theta * scalar(r);
}

}  // namespace piclab
