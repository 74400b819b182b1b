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
#include "piclab/quadratic.hpp"

namespace piclab {

// ============================================================
// Hamilton ODE  dR/dt = Q(R)
// ============================================================
//
// Embedded Dormand-Prince 5(4) with per-accepted-step first-Bianchi
// re-projection (pure roundoff hygiene: the Bianchi subspace is invariant
// under the exact flow).  Normalized mode rescales each accepted state back
// to the starting scalar curvature, so rays through fixed directions stay
// pointwise fixed.

struct FlowOptions {
    double rel_tol = 1e-8;
    bool normalized = false;
    int sample_count = 33;             // uniform in [0, t_end] when times empty
    std::vector<double> sample_times;  // overrides sample_count when nonempty
    double blowup_factor = 1e8;        // unnormalized norm cap, relative to start
    double initial_step = 0.0;         // 0 = automatic
    int max_steps = 500000;
    bool with_margins = true;
    int margin_restarts = 16;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct Diagnostics {
    double scal = 0.0;
    Eigen::VectorXd ricci_eigs;  // ascending
    double pic_margin = 0.0;
    double pic1_margin = 0.0;
    double pic2_margin = 0.0;
    double pinching_ratio = 0.0;
};

struct FlowSample {
    double t = 0.0;
    CurvatureTensor r;
    Diagnostics diag;
    double accepted_dt = 0.0;
};

struct Trajectory {
    int dim = 0;
    bool normalized = false;
    double scal0 = 0.0;
    std::vector<FlowSample> samples;
    int accepted_steps = 0;
    int rejected_steps = 0;
};

namespace detail {

inline Diagnostics diagnostics_of(const CurvatureTensor& r, const FlowOptions& opts,
                                  std::uint64_t sample_index) {
    Diagnostics d;
    d.scal = scalar(r);
    d.ricci_eigs = ricci(r).eigenvalues();
    const int n = r.dim;
    const CurvatureTensor dev = shift_identity(r, -d.scal / (n * (n - 1)));
    d.pinching_ratio = d.scal != 0.0 ? dev.norm() / std::abs(d.scal)
                                     : std::numeric_limits<double>::infinity();
    if (opts.with_margins) {
        SearchParams sp;
        sp.restarts = opts.margin_restarts;
        sp.workers = opts.workers;
        int k = 0;
        for (ConeKind kind : {ConeKind::pic, ConeKind::pic1, ConeKind::pic2}) {
            sp.seed = mix_seed(opts.seed, 3 * sample_index + k++);
            const double v = margin(r, ConeSpec{kind, 0.0}, sp).value;
            (kind == ConeKind::pic ? d.pic_margin
                                   : (kind == ConeKind::pic1 ? d.pic1_margin : d.pic2_margin)) = v;
        }
    }
    return d;
}

}  // namespace detail

/// Integrate dR/dt = Q(R) from r0 to t_end.  On BlowUp the samples gathered
/// so far are stored into *partial (when given) before the throw.
inline Trajectory flow(const CurvatureTensor& r0, double t_end, const FlowOptions& opts = {},
                       Trajectory* partial = nullptr) {
    if (t_end <= 0.0) throw Error("flow: t_end must be positive");
    const int n = r0.dim;
    const double scal0 = scalar(r0);
    if (opts.normalized && scal0 <= 0.0)
        throw ZeroScal("normalized flow needs positive starting scalar curvature");

    Trajectory traj;
    traj.dim = n;
    traj.normalized = opts.normalized;
    traj.scal0 = scal0;

    std::vector<double> times = opts.sample_times;
    if (times.empty()) {
        const int count = std::max(2, opts.sample_count);
        for (int i = 0; i < count; ++i) times.push_back(t_end * i / (count - 1));
    }
    std::sort(times.begin(), times.end());

    auto f = [n](const Eigen::MatrixXd& m) {
        CurvatureTensor r = CurvatureTensor::from_pair_matrix(n, m);
        return q_map(r).m;
    };

    // Dormand-Prince coefficients (autonomous system: no time arguments needed).
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                        e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                        e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    Eigen::MatrixXd m = r0.m;
    const double norm0 = m.norm();
    const double atol = 1e-12 * (1.0 + norm0);

    double t = 0.0;
    std::size_t next_sample = 0;
    std::uint64_t sample_index = 0;

    auto emit = [&](double ts, Eigen::MatrixXd ms, double dt) {
        CurvatureTensor r = project_bianchi(CurvatureTensor::from_pair_matrix(n, std::move(ms)));
        if (opts.normalized) {
            const double sc = scalar(r);
            if (sc <= 0.0) throw ZeroScal("scalar curvature lost positivity at t = " +
                                          std::to_string(ts));
            r.m *= scal0 / sc;
        }
        FlowSample s;
        s.t = ts;
        s.diag = detail::diagnostics_of(r, opts, sample_index++);
        s.r = std::move(r);
        s.accepted_dt = dt;
        traj.samples.push_back(std::move(s));
    };

    while (next_sample < times.size() && times[next_sample] <= 0.0) {
        emit(0.0, m, 0.0);
        ++next_sample;
    }

    Eigen::MatrixXd k1 = f(m);
    double h = opts.initial_step;
    if (h <= 0.0) {
        const double d1 = k1.norm();
        h = std::min(t_end, 0.01 * (norm0 + atol) / (d1 + 1e-300));
        h = std::max(h, 1e-10 * t_end);
    }

    for (int step = 0; step < opts.max_steps && t < t_end; ++step) {
        h = std::min(h, t_end - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t_end))) {
            if (partial) *partial = traj;
            throw StepUnderflow("step size underflow at t = " + std::to_string(t));
        }

        const Eigen::MatrixXd k2 = f(m + h * (a21 * k1));
        const Eigen::MatrixXd k3 = f(m + h * (a31 * k1 + a32 * k2));
        const Eigen::MatrixXd k4 = f(m + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::MatrixXd k5 = f(m + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::MatrixXd k6 =
            f(m + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Eigen::MatrixXd y5 = m + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::MatrixXd k7 = f(y5);
        const Eigen::MatrixXd err_m =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double err =
            err_m.norm() / (atol + opts.rel_tol * std::max(m.norm(), y5.norm()));

        if (err <= 1.0) {
            // Fourth-order continuous extension of the pair across the
            // accepted interval (one order beyond a Hermite cubic, which is
            // what keeps interior samples at the tolerance of the endpoints).
            if (next_sample < times.size() && times[next_sample] <= t + h + 1e-15 * t_end) {
                static const double d1 = -12715105075.0 / 11282082432.0,
                                    d3 = 87487479700.0 / 32700410799.0,
                                    d4 = -10690763975.0 / 1880347072.0,
                                    d5 = 701980252875.0 / 199316789632.0,
                                    d6 = -1453857185.0 / 822651844.0,
                                    d7 = 69997945.0 / 29380423.0;
                const Eigen::MatrixXd dy = y5 - m;
                const Eigen::MatrixXd r3 = h * k1 - dy;
                const Eigen::MatrixXd r4 = 2.0 * dy - h * (k1 + k7);
                const Eigen::MatrixXd r5 =
                    h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_sample < times.size() &&
                       times[next_sample] <= t + h + 1e-15 * t_end) {
                    const double th = std::clamp((times[next_sample] - t) / h, 0.0, 1.0);
                    const double th1 = 1.0 - th;
                    Eigen::MatrixXd ms = m + th * (dy + th1 * (r3 + th * (r4 + th1 * r5)));
                    emit(times[next_sample], std::move(ms), h);
                    ++next_sample;
                }
            }

            m = project_bianchi(CurvatureTensor::from_pair_matrix(n, std::move(y5))).m;
            if (opts.normalized) {
                CurvatureTensor r = CurvatureTensor::from_pair_matrix(n, m);
                const double sc = scalar(r);
                if (sc <= 0.0)
                    throw ZeroScal("scalar curvature lost positivity at t = " +
                                   std::to_string(t + h));
                m *= scal0 / sc;
            } else if (2.0 * m.norm() > opts.blowup_factor * (2.0 * norm0)) {
                if (partial) *partial = traj;
                throw BlowUp("norm exceeded " + std::to_string(opts.blowup_factor) +
                             " x initial at t = " + std::to_string(t + h));
            }
            t += h;
            ++traj.accepted_steps;
            k1 = f(m);
            h *= std::clamp(0.9 * std::pow(err + 1e-300, -0.2), 1.0, 5.0);
        } else {
            ++traj.rejected_steps;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
        }
    }

    if (t < t_end) {
        if (partial) *partial = traj;
        throw StepUnderflow("step budget exhausted at t = " + std::to_string(t));
    }
    return traj;
}

/// Scale-invariant distance of R from being a fixed direction of the flow:
/// || Q(R) - (scal(Q)/scal(R)) R || / ||Q(R)||.
inline double fixed_point_residual(const CurvatureTensor& r) {
    const double sc = scalar(r);
    if (std::abs(sc) <= 1e-300) throw ZeroScal("fixed_point_residual needs scal(R) != 0");
    const CurvatureTensor q = q_map(r);
    const double qn = q.norm();
    if (qn == 0.0) return 0.0;
    const CurvatureTensor num = q - (scal_of_q(r) / sc) * r;
    return num.norm() / qn;
}

struct PinchingReport {
    bool exited = false;
    double exit_time = std::numeric_limits<double>::quiet_NaN();
    double min_margin = std::numeric_limits<double>::infinity();
    bool ratio_nonincreasing = true;
    double initial_ratio = 0.0;
    double final_ratio = 0.0;
    double tolerance = 0.0;
};

/// Post-process a trajectory against one cone: first exit time (if any),
/// worst margin, and whether the pinching ratio decreased monotonically.
inline PinchingReport pinching_report(const Trajectory& traj, const ConeSpec& cone,
                                      int margin_restarts = 16, std::uint64_t seed = 0) {
    PinchingReport rep;
    if (traj.samples.empty()) return rep;
    rep.tolerance = 1e-6 * (1.0 + std::abs(traj.scal0));
    rep.initial_ratio = traj.samples.front().diag.pinching_ratio;
    rep.final_ratio = traj.samples.back().diag.pinching_ratio;

    double prev_ratio = rep.initial_ratio;
    std::uint64_t idx = 0;
    for (const FlowSample& s : traj.samples) {
        double mv;
        if (cone.delta == 0.0) {
            mv = cone.kind == ConeKind::pic
                     ? s.diag.pic_margin
                     : (cone.kind == ConeKind::pic1 ? s.diag.pic1_margin : s.diag.pic2_margin);
        } else if (cone.kind == ConeKind::pic) {
            mv = s.diag.pic_margin - 4.0 * cone.delta * s.diag.scal;
        } else {
            SearchParams sp;
            sp.restarts = margin_restarts;
            sp.seed = mix_seed(seed, idx);
            mv = margin(s.r, cone, sp).value;
        }
        rep.min_margin = std::min(rep.min_margin, mv);
        if (mv < -rep.tolerance && !rep.exited) {
            rep.exited = true;
            rep.exit_time = s.t;
        }
        if (s.diag.pinching_ratio > prev_ratio + 1e-9 * (1.0 + prev_ratio))
            rep.ratio_nonincreasing = false;
        prev_ratio = s.diag.pinching_ratio;
        ++idx;
    }
    return rep;
}

}  // namespace piclab
