#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "piclab/cone.hpp"
#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/flow.hpp"
#include "piclab/parallel.hpp"
#include "piclab/quadratic.hpp"
#include "piclab/rng.hpp"
#include "piclab/sampler.hpp"

namespace piclab {

// ============================================================
// Verification campaigns
// ============================================================
//
// Each campaign samples its hypothesis region, evaluates one inequality per
// admitted sample, and reports counts plus the worst normalized value with a
// serialized witness.  A campaign that admits nothing is INCONCLUSIVE, never
// a silent pass.  Reports are reproducible: all randomness derives from
// (seed, trial index), so worker count cannot change any field but the wall
// clock.

struct CampaignConfig {
    std::string campaign;
    int n = 5;
    ConeSpec cone{ConeKind::pic, 0.0};
    int trials = 100;
    std::uint64_t seed = 0;
    double theta = 0.0;
    double t_end = 1.0;
    int restarts = 32;
    int workers = 1;  // never serialized; reports are worker-independent
};

struct CampaignReport {
    CampaignConfig config;
    int attempted = 0;
    int admitted = 0;
    int violated = 0;
    bool inconclusive = false;
    double worst_value = 0.0;
    std::optional<CurvatureTensor> witness;
    double wall_seconds = 0.0;

    bool passed() const { return !inconclusive && violated == 0; }
};

namespace detail {

struct TrialOutcome {
    bool admitted = false;
    bool violated = false;
    double value = std::numeric_limits<double>::infinity();
    CurvatureTensor tensor;
};

/// Run trials in parallel and fold them into a report.  worst_value is the
/// minimum over admitted trials with ties broken by trial index, so the
/// result is independent of scheduling.
template <class TrialFn>
CampaignReport run_campaign(const CampaignConfig& cfg, TrialFn&& trial_fn) {
    if (cfg.trials < 1) throw Error("campaign needs trials >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<TrialOutcome> outcomes(cfg.trials);
    parallel_for_index(cfg.trials, cfg.workers,
                       [&](int trial) { outcomes[trial] = trial_fn(trial); });

    CampaignReport rep;
    rep.config = cfg;
    rep.attempted = cfg.trials;
    int best = -1;
    for (int i = 0; i < cfg.trials; ++i) {
        const TrialOutcome& o = outcomes[i];
        if (!o.admitted) continue;
        ++rep.admitted;
        if (o.violated) ++rep.violated;
        if (best < 0 || o.value < outcomes[best].value) best = i;
    }
    if (best >= 0) {
        rep.worst_value = outcomes[best].value;
        rep.witness = outcomes[best].tensor;
    }
    rep.inconclusive = rep.admitted == 0;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline SamplerParams sampler_params(const CampaignConfig& cfg) {
    SamplerParams sp;
    sp.restarts = cfg.restarts;
    sp.workers = 1;  // parallelism lives at the trial level
    return sp;
}

}  // namespace detail

/// Largest Ricci eigenvalue of a certified isotropic-cone member stays below
/// half the scalar curvature.  Admits samples that are plainly in the cone
/// (nonnegative shifted margin and nonnegative scal); value is the normalized
/// slack (scal/2 - max Ricci eigenvalue) / scal.
inline CampaignReport verify_ricci_bound(CampaignConfig cfg) {
    cfg.campaign = "ricci-bound";
    cfg.cone.kind = ConeKind::pic;
    return detail::run_campaign(cfg, [&cfg](int trial) {
        detail::TrialOutcome out;
        try {
            SampledTensor s = sample_tensor(cfg.n, cfg.cone, SampleStrategy::interior,
                                            mix_seed(cfg.seed, trial), detail::sampler_params(cfg));
            const double sc = scalar(s.tensor);
            if (s.certificate.value < 0.0 || sc <= 0.0) return out;  // not a plain cone member
            out.admitted = true;
            const Eigen::VectorXd ev = ricci(s.tensor).eigenvalues();
            out.value = (0.5 * sc - ev(ev.size() - 1)) / sc;
            out.violated = out.value < -1e-8;
            out.tensor = std::move(s.tensor);
        } catch (const SamplerStall&) {
        }
        return out;
    });
}

/// Two-positivity derivative inequality: on uniform cone members whose two
/// smallest Ricci eigenvalues sum to at most theta*scal, the same combination
/// for Q(R) stays above theta*scal(Q(R)).  theta must respect the explicit
/// precondition theta <= delta/(2n).  Interior and structured draws alternate
/// so both the generic and the small-two-positivity regions get sampled.
inline CampaignReport verify_two_positive_derivative(CampaignConfig cfg) {
    cfg.campaign = "two-positive";
    cfg.cone.kind = ConeKind::pic;
    if (cfg.theta < 0.0) throw Error("theta must be >= 0");
    if (cfg.theta > cfg.cone.delta / (2.0 * cfg.n))
        throw Error("two-positive campaign requires theta <= delta/(2n); got theta = " +
                    std::to_string(cfg.theta) + ", delta/(2n) = " +
                    std::to_string(cfg.cone.delta / (2.0 * cfg.n)));
    return detail::run_campaign(cfg, [&cfg](int trial) {
        detail::TrialOutcome out;
        const SampleStrategy strategy =
            trial % 2 == 0 ? SampleStrategy::interior : SampleStrategy::structured;
        try {
            SampledTensor s = sample_tensor(cfg.n, cfg.cone, strategy, mix_seed(cfg.seed, trial),
                                            detail::sampler_params(cfg));
            const CurvatureTensor& r = s.tensor;
            const double sc = scalar(r);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ricci(r).mat);
            const Eigen::VectorXd ev = es.eigenvalues();
            const double two_sum = ev(0) + ev(1);
            if (two_sum > cfg.theta * sc + 1e-12 * (1.0 + std::abs(sc)))
                return out;  // hypothesis filter: not in the small-two-positivity region
            out.admitted = true;

            const SymmetricForm qric = ricci_of_q(r);
            const Eigen::VectorXd v0 = es.eigenvectors().col(0), v1 = es.eigenvectors().col(1);
            const double d = v0.dot(qric.mat * v0) + v1.dot(qric.mat * v1) -
                             cfg.theta * scal_of_q(r);
            out.value = d / (1.0 + sc * sc);
            out.violated = d <= 0.0;
            out.tensor = s.tensor;
        } catch (const SamplerStall&) {
        }
        return out;
    });
}

/// Supporting-halfspace preservation test on the isotropic cone boundary:
/// every active frame of a boundary tensor R_b gives Q(R_b) a nonnegative
/// functional value, within 1e-6 * scal^2.  value is min over active frames
/// of value(Q(R_b), F) / scal^2.
inline CampaignReport verify_pic_preservation(CampaignConfig cfg) {
    cfg.campaign = "pic-preservation";
    cfg.cone.kind = ConeKind::pic;
    return detail::run_campaign(cfg, [&cfg](int trial) {
        detail::TrialOutcome out;
        try {
            SampledTensor s = sample_tensor(cfg.n, cfg.cone, SampleStrategy::boundary,
                                            mix_seed(cfg.seed, trial), detail::sampler_params(cfg));
            TangentConeParams tp;
            tp.search.restarts = std::max(64, cfg.restarts);
            tp.search.seed = mix_seed(cfg.seed, 0x5EEDull + trial);
            const ActiveFrameSweep sweep = active_frames(s.tensor, cfg.cone.kind, tp);
            const CurvatureTensor q = q_map(s.tensor);
            const double denom = std::max(scalar(s.tensor) * scalar(s.tensor), 1e-12);
            double worst = std::numeric_limits<double>::infinity();
            for (const ActiveFrame& a : sweep.active)
                worst = std::min(worst, frame_value(q, a.frame, cfg.cone.kind) / denom);
            out.admitted = true;
            out.value = worst;
            out.violated = worst < -1e-6;
            out.tensor = std::move(s.tensor);
        } catch (const SamplerStall&) {
        } catch (const NotOnBoundary&) {
        } catch (const NotInterior&) {
        }
        return out;
    });
}

/// Frame-functional step on the PIC2 boundary: at each minimizing
/// (frame, lambda, mu) of a boundary tensor S, the same functional applied to
/// Q(S) is nonnegative within 1e-6 * scal^2.
inline CampaignReport verify_pic1_pic2_step(CampaignConfig cfg) {
    cfg.campaign = "pic1-pic2";
    cfg.cone.kind = ConeKind::pic2;
    return detail::run_campaign(cfg, [&cfg](int trial) {
        detail::TrialOutcome out;
        try {
            SampledTensor s = sample_tensor(cfg.n, cfg.cone, SampleStrategy::boundary,
                                            mix_seed(cfg.seed, trial), detail::sampler_params(cfg));
            TangentConeParams tp;
            tp.search.restarts = std::max(64, cfg.restarts);
            tp.search.seed = mix_seed(cfg.seed, 0x5EEDull + trial);
            const ActiveFrameSweep sweep = active_frames(s.tensor, cfg.cone.kind, tp);
            const CurvatureTensor q = q_map(s.tensor);
            const double denom = std::max(scalar(s.tensor) * scalar(s.tensor), 1e-12);
            double worst = std::numeric_limits<double>::infinity();
            for (const ActiveFrame& a : sweep.active)
                worst = std::min(worst, frame_value(q, a.frame, cfg.cone.kind) / denom);
            out.admitted = true;
            out.value = worst;
            out.violated = worst < -1e-6;
            out.tensor = std::move(s.tensor);
        } catch (const SamplerStall&) {
        } catch (const NotOnBoundary&) {
        } catch (const NotInterior&) {
        }
        return out;
    });
}

/// Normalized-flow cone preservation: margins along trajectories started at
/// certified interior points never drop below -1e-6 * (1 + scal0); when
/// theta > 0 and the start satisfies two-positivity, that margin is tracked
/// too.  value is the worst normalized margin seen along the trajectory.
inline CampaignReport verify_flow_preservation(CampaignConfig cfg) {
    cfg.campaign = "flow-preservation";
    return detail::run_campaign(cfg, [&cfg](int trial) {
        detail::TrialOutcome out;
        try {
            SampledTensor s = sample_tensor(cfg.n, cfg.cone, SampleStrategy::interior,
                                            mix_seed(cfg.seed, trial), detail::sampler_params(cfg));
            FlowOptions fo;
            fo.normalized = true;
            fo.sample_count = 9;
            fo.margin_restarts = 12;
            fo.seed = mix_seed(cfg.seed, 0xF10Bull + trial);
            const Trajectory traj = flow(s.tensor, cfg.t_end, fo);
            const PinchingReport pr =
                pinching_report(traj, cfg.cone, fo.margin_restarts, fo.seed);
            const double norm0 = 1.0 + std::abs(scalar(s.tensor));
            double worst = pr.min_margin / norm0;
            if (cfg.theta > 0.0 &&
                two_positivity_margin(s.tensor, cfg.theta) >= 0.0) {
                for (const FlowSample& fs : traj.samples)
                    worst = std::min(worst, two_positivity_margin(fs.r, cfg.theta) / norm0);
            }
            out.admitted = true;
            out.value = worst;
            out.violated = worst < -1e-6;
            out.tensor = std::move(s.tensor);
        } catch (const SamplerStall&) {
        } catch (const BlowUp&) {
        } catch (const ZeroScal&) {
        } catch (const StepUnderflow&) {
        }
        return out;
    });
}

}  // namespace piclab
