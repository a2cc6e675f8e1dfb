#include "moqc/query_engine.hpp"

#include "moqc/error.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

namespace moqc {

namespace {

constexpr double kBoxTol = 1e-9;

using Clock = std::chrono::steady_clock;

/// Stop rule consulted after each projection: returns true to end the loop early.
using EarlyExit = std::function<bool(double loss_bar, double lower_bound)>;

QueryOutcome run_outer_loop(const AnalysisModel& model, const LossSpec& loss, const Box& box, double epsilon,
                            double fw_tol, std::size_t max_iters, const std::optional<Vector>& first_direction,
                            const SolverConfig& config, const EarlyExit& early_exit) {
    const std::size_t m = model.num_objectives();
    const auto dm = static_cast<Eigen::Index>(m);
    QueryOutcome out;

    auto add_support = [&](const Vector& w) {
        SupportPoint sp = support_point(model, w, config);
        ++out.oracle_calls;
        out.points.points.push_back(sp.point);
        out.points.schedulers.push_back(std::move(sp.scheduler));
        out.halfspaces.halfspaces.push_back({w, out.points.points.back()});
        return out.points.points.back();
    };
    auto mixture_of = [&](const Projection& proj) {
        MixtureScheduler mix;
        for (std::size_t i = 0; i < proj.weights.size(); ++i)
            if (proj.weights[i] > 0.0) mix.components.push_back({proj.weights[i], out.points.schedulers[i]});
        return mix;
    };

    for (Eigen::Index i = 0; i < dm; ++i) {
        Vector e = Vector::Zero(dm);
        e(i) = 1.0;
        add_support(e);
        add_support(-e);
    }

    Vector w = first_direction ? *first_direction : Vector::Constant(dm, 1.0 / static_cast<double>(m));
    std::optional<LossMinimum> low;
    bool have_best = false, best_in_box = false;
    double best_gap = std::numeric_limits<double>::infinity();
    Vector best_point;
    double best_value = 0.0, best_lower = 0.0;
    MixtureScheduler best_mix;

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        const auto started = Clock::now();
        out.iterations = iter;
        const Vector r = add_support(w);

        if (lp_solve(out.halfspaces, box, Vector::Zero(dm), Sense::Minimize).status == LpStatus::Infeasible) {
            out.status = QueryStatus::Infeasible;
            out.point = Vector();
            return out;
        }

        TraceEntry entry;
        entry.iteration = iter;
        entry.w = w;
        entry.r = r;
        if (!low || w.dot(r) < w.dot(low->point)) {
            low = minimize_loss_over_hrep(out.halfspaces, box, loss, fw_tol);
            entry.recomputed_low = true;
        }
        const Projection proj = min_norm_point(out.points.points, low->point);
        const double loss_bar = loss.value(proj.point);
        const double gap = loss_bar - low->lower_bound;
        const bool in_box = box.contains(proj.point, kBoxTol);

        entry.v_low = low->point;
        entry.v_bar = proj.point;
        entry.loss_low = low->value;
        entry.loss_bar = loss_bar;
        entry.lower_bound = low->lower_bound;
        entry.points = out.points.points.size();
        entry.halfspaces = out.halfspaces.halfspaces.size();
        entry.seconds = std::chrono::duration<double>(Clock::now() - started).count();
        out.trace.push_back(entry);

        if (!have_best || (in_box && !best_in_box) || (in_box == best_in_box && gap < best_gap)) {
            have_best = true;
            best_in_box = in_box;
            best_gap = gap;
            best_point = proj.point;
            best_value = loss_bar;
            best_lower = low->lower_bound;
            best_mix = mixture_of(proj);
        }

        const Vector step = low->point - proj.point;
        const bool converged = in_box && gap <= epsilon;
        if (converged || step.lpNorm<1>() == 0.0 || (early_exit && early_exit(loss_bar, low->lower_bound))) {
            out.status = QueryStatus::Optimal;
            out.point = proj.point;
            out.value = loss_bar;
            out.lower_bound = low->lower_bound;
            out.gap = gap;
            out.mixture = mixture_of(proj);
            return out;
        }
        w = step / step.lpNorm<1>();
    }

    out.status = QueryStatus::IterationCapReached;
    out.point = best_point;
    out.value = best_value;
    out.lower_bound = best_lower;
    out.gap = best_gap;
    out.mixture = std::move(best_mix);
    return out;
}

} // namespace

std::string to_string(QueryStatus status) {
    switch (status) {
    case QueryStatus::Optimal:
        return "Optimal";
    case QueryStatus::Infeasible:
        return "Infeasible";
    case QueryStatus::IterationCapReached:
        return "IterationCapReached";
    }
    return "?";
}

void ConvexQuerySpec::validate(std::size_t m) const {
    if (m == 0) throw Error(ErrorKind::InvalidArgument, "query needs at least one objective");
    if (!objectives.empty() && objectives.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "query names " + std::to_string(objectives.size()) +
                                                  " objectives but the model has " + std::to_string(m));
    loss.validate(m);
    box.validate();
    if (box.dim() != m) throw Error(ErrorKind::ShapeMismatch, "query box dimension differs from objective count");
    if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be nonnegative");
    if (max_outer_iters == 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be positive");
    if (initial_direction) validate_weights(*initial_direction, m);
}

QueryOutcome convex_query(const AnalysisModel& model, const ConvexQuerySpec& spec, const SolverConfig& config) {
    spec.validate(model.num_objectives());
    config.validate();
    const double fw_tol = std::max(spec.epsilon / 10.0, 1e-9);
    return run_outer_loop(model, spec.loss, spec.box, spec.epsilon, fw_tol, spec.max_outer_iters,
                          spec.initial_direction, config, nullptr);
}

void AchievabilitySpec::validate(std::size_t m) const {
    if (m == 0) throw Error(ErrorKind::InvalidArgument, "query needs at least one objective");
    if (!objectives.empty() && objectives.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "query names " + std::to_string(objectives.size()) +
                                                  " objectives but the model has " + std::to_string(m));
    if (static_cast<std::size_t>(thresholds.size()) != m || directions.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "thresholds and directions need one entry per objective");
    if (!thresholds.allFinite()) throw Error(ErrorKind::InvalidArgument, "thresholds must be finite");
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    if (max_outer_iters == 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be positive");
}

Box AchievabilitySpec::region() const {
    Box b = Box::unbounded(static_cast<std::size_t>(thresholds.size()));
    for (Eigen::Index i = 0; i < thresholds.size(); ++i) {
        if (directions[static_cast<std::size_t>(i)] == ThresholdDirection::AtMost) {
            b.upper(i) = thresholds(i);
        } else {
            b.lower(i) = thresholds(i);
        }
    }
    return b;
}

AchievabilityOutcome achievability_query(const AnalysisModel& model, const AchievabilitySpec& spec,
                                         const SolverConfig& config) {
    const std::size_t m = model.num_objectives();
    spec.validate(m);
    config.validate();
    LossSpec loss;
    loss.kind = LossKind::SqDistToBox;
    loss.target_box = spec.region();
    const double threshold = spec.delta * spec.delta;

    // Stop as soon as the answer is certain: a point within delta is found, or the
    // certified lower bound already exceeds delta^2.
    const EarlyExit decide = [threshold](double loss_bar, double lower_bound) {
        return loss_bar <= threshold || lower_bound > threshold;
    };
    AchievabilityOutcome out;
    out.run = run_outer_loop(model, loss, Box::unbounded(m), threshold, threshold / 10.0, spec.max_outer_iters,
                             std::nullopt, config, decide);
    out.point = out.run.point;
    out.mixture = out.run.mixture;
    out.distance_sq = out.run.value;
    out.lower_bound = out.run.lower_bound;
    out.achievable = out.run.value <= threshold;
    out.decided = out.achievable || out.run.lower_bound > threshold || out.run.status == QueryStatus::Optimal;
    return out;
}

ValueVector evaluate_query(const SparseMdp& mdp, const RewardVectorFunction& rewards, const AnyScheduler& scheduler,
                           const SolverConfig& config) {
    config.validate();
    rewards.validate(mdp);
    return std::visit(
        [&](const auto& s) -> ValueVector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MixtureScheduler>) {
                s.validate(mdp);
                ValueVector total = ValueVector::Zero(static_cast<Eigen::Index>(rewards.size()));
                for (const auto& c : s.components)
                    if (c.weight > 0.0) total += c.weight * evaluate_policy_all(mdp, rewards, c.scheduler, config);
                return total;
            } else {
                return evaluate_policy_all(mdp, rewards, s, config);
            }
        },
        scheduler);
}

SingleObjectiveOptimum optimize_single(const AnalysisModel& model, std::size_t objective, Sense sense,
                                       const SolverConfig& config) {
    const std::size_t m = model.num_objectives();
    if (objective >= m)
        throw Error(ErrorKind::ShapeMismatch, "objective index " + std::to_string(objective) + " out of range");
    Vector w = Vector::Zero(static_cast<Eigen::Index>(m));
    w(static_cast<Eigen::Index>(objective)) = sense == Sense::Maximize ? 1.0 : -1.0;
    SupportPoint sp = support_point(model, w, config);
    SingleObjectiveOptimum out;
    out.value = sp.point(static_cast<Eigen::Index>(objective));
    out.scheduler = std::move(sp.scheduler);
    out.point = std::move(sp.point);
    return out;
}

} // namespace moqc
