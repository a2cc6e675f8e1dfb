#pragma once

#include "moqc/convex_geometry.hpp"
#include "moqc/numeric_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace moqc {

struct ConvexQuerySpec {
    /// Objective names in order; they define m and must match the reward structures.
    std::vector<std::string> objectives;
    LossSpec loss;
    /// Hard constraint on the achieved vector.
    Box box;
    double epsilon = 1e-4;
    std::size_t max_outer_iters = 200;
    /// First loop direction; uniform (1/m, ..., 1/m) when unset.
    std::optional<Vector> initial_direction;

    void validate(std::size_t m) const;
};

enum class QueryStatus { Optimal, Infeasible, IterationCapReached };

std::string to_string(QueryStatus status);

/// One pass of the outer loop, for auditing.
struct TraceEntry {
    std::size_t iteration = 0;
    Vector w;
    Vector r;
    Vector v_low;
    Vector v_bar;
    double loss_low = 0.0;
    double loss_bar = 0.0;
    double lower_bound = 0.0;
    bool recomputed_low = false;
    /// Sizes of the point and halfspace lists after this iteration.
    std::size_t points = 0;
    std::size_t halfspaces = 0;
    double seconds = 0.0;
};

struct QueryOutcome {
    QueryStatus status = QueryStatus::Infeasible;
    double value = 0.0;        // loss at the returned point
    Vector point;              // v_bar
    double gap = 0.0;          // value minus the certified lower bound
    double lower_bound = 0.0;  // certified lower bound on the optimum
    std::size_t iterations = 0;
    std::size_t oracle_calls = 0;
    MixtureScheduler mixture;
    std::vector<TraceEntry> trace;
    VRep points;
    HRep halfspaces;
};

/// Convex query: minimize the loss over achievable vectors inside the box, to within
/// epsilon. Seeds the outer approximation with support points in the directions +-e_i.
QueryOutcome convex_query(const AnalysisModel& model, const ConvexQuerySpec& spec, const SolverConfig& config);

enum class ThresholdDirection { AtMost, AtLeast };

struct AchievabilitySpec {
    std::vector<std::string> objectives;
    Vector thresholds;
    std::vector<ThresholdDirection> directions;
    double delta = 1e-6;
    std::size_t max_outer_iters = 200;

    void validate(std::size_t m) const;
    /// The threshold region as a box.
    Box region() const;
};

struct AchievabilityOutcome {
    bool achievable = false;
    /// False when the iteration cap hit before the answer was certain.
    bool decided = true;
    Vector point;
    MixtureScheduler mixture;
    /// Squared distance of the point to the threshold region, and a certified lower bound.
    double distance_sq = 0.0;
    double lower_bound = 0.0;
    QueryOutcome run;
};

/// Is some scheduler's value within delta of the threshold region?
AchievabilityOutcome achievability_query(const AnalysisModel& model, const AchievabilitySpec& spec,
                                         const SolverConfig& config);

/// Value vector of any scheduler; mixtures by linearity over their components.
ValueVector evaluate_query(const SparseMdp& mdp, const RewardVectorFunction& rewards, const AnyScheduler& scheduler,
                           const SolverConfig& config);

struct SingleObjectiveOptimum {
    double value = 0.0;
    DeterministicScheduler scheduler;
    ValueVector point;
};

/// Maximizes or minimizes objective `objective` alone; the full vector is reported too.
SingleObjectiveOptimum optimize_single(const AnalysisModel& model, std::size_t objective, Sense sense,
                                       const SolverConfig& config);

} // namespace moqc
