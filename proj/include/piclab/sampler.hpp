#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "piclab/cone.hpp"
#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/frame.hpp"
#include "piclab/parallel.hpp"
#include "piclab/quadratic.hpp"
#include "piclab/rng.hpp"

namespace piclab {

// ============================================================
// Tensor samplers
// ============================================================
//
// Every strategy returns a tensor together with the margin certificate that
// admitted it, so downstream campaigns never re-derive membership from trust.

enum class SampleStrategy { interior, boundary, structured };

inline const char* strategy_name(SampleStrategy s) {
    switch (s) {
        case SampleStrategy::interior: return "interior";
        case SampleStrategy::boundary: return "boundary";
        case SampleStrategy::structured: return "structured";
    }
    return "?";
}

struct SamplerParams {
    int max_attempts = 24;
    int restarts = 32;       // final certification effort
    int quick_restarts = 8;  // shift-tuning effort
    int workers = 1;
};

struct SampledTensor {
    CurvatureTensor tensor;
    MarginCertificate certificate;  // for the requested (kind, delta)
    int attempts = 0;
};

/// Gaussian draw on the Bianchi subspace: symmetric Gaussian pair matrix,
/// Bianchi-projected, normalized to unit pair-matrix norm.
inline CurvatureTensor gaussian_tensor(int n, Rng& rng) {
    const int nn = pair_count(n);
    Eigen::MatrixXd m(nn, nn);
    for (int p = 0; p < nn; ++p)
        for (int q = p; q < nn; ++q) m(p, q) = m(q, p) = rng.normal();
    CurvatureTensor r = project_bianchi(CurvatureTensor::from_pair_matrix(n, std::move(m)));
    const double s = r.m.norm();
    if (s > 0.0) r.m /= s;
    return r;
}

namespace detail {

/// Identity-frame functional value of the identity tensor at the cone kind's
/// inner minimum: the smallest rate at which adding I raises frame values.
inline double identity_rate_floor(ConeKind kind) {
    switch (kind) {
        case ConeKind::pic: return 4.0;
        case ConeKind::pic1: return 2.0;
        case ConeKind::pic2: return 1.0;
    }
    return 1.0;
}

/// Move a unit Gaussian draw along the identity ray until the delta-shifted
/// margin sits in a fixed positive band.  The shifted margin is strictly
/// monotone in the ray parameter with slope between v_min*rho and 4*rho,
/// rho = 1 - delta*n*(n-1); for the plain isotropic cone the dependence is
/// exactly linear so one step lands in the band.
inline bool tune_interior_shift(const CurvatureTensor& r0, const ConeSpec& cone,
                                const SamplerParams& params, std::uint64_t seed,
                                double target, CurvatureTensor& out_tensor,
                                MarginCertificate& out_cert) {
    const int n = r0.dim;
    const double rho = 1.0 - cone.delta * n * (n - 1);
    if (rho == 0.0) return false;  // margin is ray-independent: nothing to tune

    SearchParams quick;
    quick.restarts = params.quick_restarts;
    quick.workers = params.workers;
    quick.seed = seed;

    const MarginCertificate c0 = margin(r0, cone, quick);
    quick.hints.push_back(c0.frame);

    const double band_lo = 0.5 * target, band_hi = 2.0 * target;
    double s = (target - c0.value) / (4.0 * rho);
    double value = 0.0;

    if (cone.kind == ConeKind::pic) {
        value = target;  // exact shift law; no probing needed
    } else {
        const double slope_lo = identity_rate_floor(cone.kind) * std::abs(rho);
        const double slope_mid = 2.5 * std::abs(rho);
        double lo_s = -std::numeric_limits<double>::infinity();
        double hi_s = std::numeric_limits<double>::infinity();
        bool ok = false;
        s = (target - c0.value) / (slope_mid * (rho > 0 ? 1.0 : -1.0));
        for (int it = 0; it < 16; ++it) {
            const MarginCertificate c = margin(shift_identity(r0, s), cone, quick);
            quick.hints[0] = c.frame;
            value = c.value;
            if (value >= band_lo && value <= band_hi) {
                ok = true;
                break;
            }
            // Margin increases with u = s*rho; keep a bracket in s.
            if (value < band_lo)
                (rho > 0 ? lo_s : hi_s) = s;
            else
                (rho > 0 ? hi_s : lo_s) = s;
            double step = (target - value) / slope_mid * (rho > 0 ? 1.0 : -1.0);
            step = std::clamp(step, -std::abs(target - value) / slope_lo - 1.0,
                              std::abs(target - value) / slope_lo + 1.0);
            double next = s + step;
            if (std::isfinite(lo_s) && std::isfinite(hi_s) && (next <= lo_s || next >= hi_s))
                next = 0.5 * (lo_s + hi_s);
            s = next;
        }
        if (!ok) return false;
    }

    CurvatureTensor cand = shift_identity(r0, s);
    SearchParams full;
    full.restarts = params.restarts;
    full.workers = params.workers;
    full.seed = seed;
    full.hints = quick.hints;
    const MarginCertificate cert = margin(cand, cone, full);
    if (cert.value < 0.25 * target) return false;  // full search saw deeper frames
    out_tensor = std::move(cand);
    out_cert = cert;
    return true;
}

/// Deterministic recipe cycle for the structured strategy.  Recipes cover the
/// model tensors, their conjugated convex mixtures, a rank-(n-2) two-flat
/// family populating the small two-positivity region, and signed spheres for
/// extreme uniformity offsets.
inline CurvatureTensor structured_candidate(int n, int recipe, Rng& rng) {
    const auto random_orthogonal = [&](int dim) {
        Eigen::MatrixXd g(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ();
        const Eigen::VectorXd d = qr.matrixQR().diagonal();
        for (int i = 0; i < dim; ++i)
            if (d(i) < 0) q.col(i) = -q.col(i);
        return q;
    };

    switch (recipe % 8) {
        case 0: return sphere_tensor(n, 1.0);
        case 1: return cylinder_tensor(n, 1.0);
        case 2: {
            const double a = 0.2 + 0.8 * rng.uniform(), b = 0.2 + 0.8 * rng.uniform();
            CurvatureTensor r = a * identity_tensor(n) + b * cylinder_tensor(n, 1.0);
            return conjugate(r, random_orthogonal(n));
        }
        case 3: {
            // s*I + (c/2) P'^P' - t*(w (x) w): P' projects onto the first n-2
            // coordinates, w is the wedge of the two flat directions.  Small
            // t drags the two smallest Ricci eigenvalues down while the s*I
            // part keeps the membership margin.
            const double s = 0.5 + rng.uniform();
            const double c = 1.0 + 2.0 * rng.uniform();
            const double t = c + 3.0 * s * rng.uniform();
            Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
            p(n - 1, n - 1) = 0.0;
            p(n - 2, n - 2) = 0.0;
            CurvatureTensor r =
                s * identity_tensor(n) +
                0.5 * c * kulkarni_nomizu(SymmetricForm{p}, SymmetricForm{p});
            const Eigen::VectorXd w =
                wedge(Eigen::VectorXd::Unit(n, n - 2), Eigen::VectorXd::Unit(n, n - 1));
            r.m -= t * (w * w.transpose());
            return conjugate(r, random_orthogonal(n));
        }
        case 4: {
            Eigen::MatrixXd b(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
            const Eigen::MatrixXd a =
                b.transpose() * b / n + 0.3 * Eigen::MatrixXd::Identity(n, n);
            return kulkarni_nomizu(SymmetricForm{a}, SymmetricForm{a});
        }
        case 5: return -1.0 * identity_tensor(n);
        case 6: {
            const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
            CurvatureTensor r = a * identity_tensor(n) +
                                b * conjugate(cylinder_tensor(n, 1.0), random_orthogonal(n)) +
                                c * conjugate(cylinder_tensor(n, 1.0), random_orthogonal(n));
            return r;
        }
        default: return gaussian_tensor(n, rng);
    }
}

}  // namespace detail

/// Draw one tensor in the requested region of the requested cone.
///   interior   — Gaussian on the Bianchi subspace, identity-shifted into a
///                positive-margin band by monotone ray tuning;
///   boundary   — interior draw walked onto the cone boundary;
///   structured — deterministic cycle of model-tensor recipes, certified.
/// Throws SamplerStall when the bounded attempt budget runs out.
inline SampledTensor sample_tensor(int n, const ConeSpec& cone, SampleStrategy strategy,
                                   std::uint64_t seed, const SamplerParams& params = {}) {
    SampledTensor out;

    if (strategy == SampleStrategy::structured) {
        for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
            Rng rng(mix_seed(seed, 0x5741ull + attempt));
            CurvatureTensor cand = detail::structured_candidate(n, attempt, rng);
            SearchParams full;
            full.restarts = params.restarts;
            full.workers = params.workers;
            full.seed = mix_seed(seed, 0xC347ull + attempt);
            const MarginCertificate cert = margin(cand, cone, full);
            if (cert.value >= -1e-9 * (1.0 + std::abs(scalar(cand)))) {
                out.tensor = std::move(cand);
                out.certificate = cert;
                out.attempts = attempt + 1;
                return out;
            }
        }
        throw SamplerStall("structured sampler found no " + std::string(cone_name(cone.kind)) +
                           "(delta=" + std::to_string(cone.delta) + ") member in " +
                           std::to_string(params.max_attempts) + " recipes");
    }

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        Rng rng(mix_seed(seed, attempt));
        const CurvatureTensor r0 = gaussian_tensor(n, rng);
        const double target = 0.3 + 0.4 * rng.uniform();
        CurvatureTensor cand;
        MarginCertificate cert;
        if (!detail::tune_interior_shift(r0, cone, params, mix_seed(seed, 0x7E57ull + attempt),
                                         target, cand, cert))
            continue;

        if (strategy == SampleStrategy::interior) {
            out.tensor = std::move(cand);
            out.certificate = cert;
            out.attempts = attempt + 1;
            return out;
        }

        // boundary: walk the certified interior point onto the cone boundary.
        SearchParams sp;
        sp.restarts = params.restarts;
        sp.workers = params.workers;
        sp.seed = mix_seed(seed, 0xB0DDull + attempt);
        try {
            BoundaryPoint bp = boundary_point(cand, cone, sp);
            out.tensor = std::move(bp.tensor);
            out.certificate = bp.certificate;
            out.attempts = attempt + 1;
            return out;
        } catch (const NotInterior&) {
            continue;
        }
    }
    throw SamplerStall(std::string(strategy_name(strategy)) + " sampler exhausted " +
                       std::to_string(params.max_attempts) + " attempts for " +
                       cone_name(cone.kind) + "(delta=" + std::to_string(cone.delta) + ")");
}

// ============================================================
// Empirical cone constants
// ============================================================

struct ConstantsReport {
    ConeKind kind = ConeKind::pic;
    int n = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double theta_hat = 0.0;
    double big_theta_hat = 0.0;
    int member_samples = 0;
    int boundary_samples = 0;
    int active_frames = 0;
    double min_ratio_raw = std::numeric_limits<double>::infinity();
};

/// Empirical estimates of the cone's structure constants:
///   big_theta_hat = max ||R|| / scal(R) over sampled members (identity
///                   included as the baseline sample), and
///   theta_hat     = min over sampled boundary tensors R_b and their active
///                   frames F of value(Q(R_b), F) / (scal(R_b)^2 * value(I, F)),
///                   floored at zero.
/// Estimates, not proofs: they bound the true constants from one side only.
inline ConstantsReport estimate_constants(ConeKind kind, int n, int trials, std::uint64_t seed,
                                          const SamplerParams& params = {}) {
    if (trials < 1) throw Error("estimate_constants: trials must be >= 1");
    ConstantsReport rep;
    rep.kind = kind;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;

    const ConeSpec cone{kind, 0.0};

    struct Leg {
        double ratio_member = -std::numeric_limits<double>::infinity();
        double ratio_boundary = std::numeric_limits<double>::infinity();
        int members = 0, boundaries = 0, actives = 0;
    };
    std::vector<Leg> legs(trials);

    parallel_for_index(trials, params.workers, [&](int trial) {
        Leg& leg = legs[trial];
        SamplerParams sp = params;
        sp.workers = 1;

        // Theta leg: norm-to-scal ratio of a certified member.
        try {
            CurvatureTensor r = trial == 0
                                    ? identity_tensor(n)
                                    : sample_tensor(n, cone, SampleStrategy::interior,
                                                    mix_seed(seed, 2 * trial), sp)
                                          .tensor;
            const double sc = scalar(r);
            if (sc > 0.0) {
                leg.ratio_member = r.norm() / sc;
                leg.members = 1;
            }
        } catch (const SamplerStall&) {
        }

        // theta leg: normalized Q-functional over active frames of a
        // boundary tensor.
        try {
            SampledTensor b = sample_tensor(n, cone, SampleStrategy::boundary,
                                            mix_seed(seed, 2 * trial + 1), sp);
            TangentConeParams tp;
            tp.search.restarts = std::max(64, params.restarts);
            tp.search.seed = mix_seed(seed, 0xAC71F3ull + trial);
            ActiveFrameSweep sweep = active_frames(b.tensor, kind, tp);
            const CurvatureTensor q = q_map(b.tensor);
            const double sc2 = scalar(b.tensor) * scalar(b.tensor);
            if (sc2 > 0.0) {
                leg.boundaries = 1;
                for (const ActiveFrame& a : sweep.active) {
                    const double vi = (1.0 + a.frame.lambda * a.frame.lambda) *
                                      (1.0 + a.frame.mu * a.frame.mu);
                    const double ratio = frame_value(q, a.frame, kind) / (sc2 * vi);
                    leg.ratio_boundary = std::min(leg.ratio_boundary, ratio);
                    ++leg.actives;
                }
            }
        } catch (const SamplerStall&) {
        } catch (const NotOnBoundary&) {
        }
    });

    for (const Leg& leg : legs) {
        rep.big_theta_hat = std::max(rep.big_theta_hat, leg.ratio_member);
        rep.min_ratio_raw = std::min(rep.min_ratio_raw, leg.ratio_boundary);
        rep.member_samples += leg.members;
        rep.boundary_samples += leg.boundaries;
        rep.active_frames += leg.actives;
    }
    rep.theta_hat = std::isfinite(rep.min_ratio_raw) ? std::max(0.0, rep.min_ratio_raw) : 0.0;
    return rep;
}

}  // namespace piclab
