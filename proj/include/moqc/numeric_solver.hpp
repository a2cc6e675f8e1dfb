#pragma once

#include "moqc/graph_analysis.hpp"
#include "moqc/mdp.hpp"

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace moqc {

struct SolverConfig {
    double value_tol = 1e-10;
    std::size_t max_value_iters = 200000;
    double policy_improvement_tol = 1e-9;
    std::size_t max_policy_iters = 1000;
    std::size_t workers = default_workers();
    /// Strongly connected blocks up to this size are solved directly (dense LU).
    std::size_t dense_limit = 2000;

    static std::size_t default_workers() {
        const unsigned n = std::thread::hardware_concurrency();
        return n == 0 ? 1 : n;
    }
    /// Throws InvalidArgument when a tolerance or limit is not positive.
    void validate() const;
};

/// Signed objective weights with unit 1-norm (within 1e-12).
using WeightVector = Vector;

void validate_weights(const WeightVector& w, std::size_t m);

/// Expected total reward of a Markov chain, one solve per reward vector. The SCC
/// structure is computed once and shared. Bottom components must carry zero reward
/// (they are pinned to 0); otherwise Divergence is thrown.
class ChainSolver {
public:
    ChainSolver(const MarkovChain& chain, const SolverConfig& config);

    /// Values for every state.
    std::vector<double> solve(const std::vector<double>& state_rewards) const;

    /// Solves each reward vector independently on up to `config.workers` threads.
    std::vector<std::vector<double>> solve_all(const std::vector<std::vector<double>>& state_rewards) const;

    std::size_t num_components() const { return scc_.components.size(); }

private:
    const MarkovChain& chain_;
    SolverConfig config_;
    SccDecomposition scc_;
    std::vector<char> bottom_;
};

/// Runs `task(i)` for i in [0, count) on up to `workers` threads. Each index is handled
/// exactly once; results must be written to per-index slots by the task.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

/// Preprocessed model for repeated scalarized solves: MEC decomposition, the reward
/// finiteness check (throws Divergence), and the MEC quotient used by policy iteration.
/// Keeps references to the model and rewards; both must outlive it.
class AnalysisModel {
public:
    AnalysisModel(const SparseMdp& mdp, const RewardVectorFunction& rewards);

    const SparseMdp& mdp() const { return mdp_; }
    const RewardVectorFunction& rewards() const { return rewards_; }
    const MecDecomposition& mecs() const { return mecs_; }
    std::size_t num_objectives() const { return rewards_.size(); }

    struct QuotientChoice {
        /// Original global choice index, or -1 for the "stay forever" edge and the sink loop.
        std::ptrdiff_t original = -1;
        std::vector<Transition> transitions;
    };

    std::size_t quotient_states() const { return q_row_starts_.size() - 1; }
    std::size_t quotient_state_of(std::size_t s) const { return q_state_of_[s]; }
    std::size_t quotient_row_start(std::size_t q) const { return q_row_starts_[q]; }
    std::size_t quotient_choice_count(std::size_t q) const { return q_row_starts_[q + 1] - q_row_starts_[q]; }
    const QuotientChoice& quotient_choice(std::size_t qc) const { return q_choices_[qc]; }

private:
    const SparseMdp& mdp_;
    const RewardVectorFunction& rewards_;
    MecDecomposition mecs_;
    std::vector<std::size_t> q_state_of_;
    std::vector<std::size_t> q_row_starts_;
    std::vector<QuotientChoice> q_choices_;
};

/// Expected total reward of objective `objective` from the initial state.
double evaluate_policy(const SparseMdp& mdp, const RewardVectorFunction& rewards, const DeterministicScheduler& sched,
                       std::size_t objective, const SolverConfig& config);

/// All objectives at once (shared SCC structure, objectives solved in parallel).
ValueVector evaluate_policy_all(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                const DeterministicScheduler& sched, const SolverConfig& config);
ValueVector evaluate_policy_all(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                const RandomizedScheduler& sched, const SolverConfig& config);

struct WeightedOptimum {
    DeterministicScheduler scheduler;
    double value = 0.0;
    /// Scalarized value at the initial state after each evaluation round.
    std::vector<double> round_values;
};

/// Policy iteration for max over schedulers of w . total reward.
WeightedOptimum optimal_weighted_scheduler(const AnalysisModel& model, const WeightVector& w,
                                           const SolverConfig& config);

struct SupportPoint {
    ValueVector point;
    DeterministicScheduler scheduler;
    double scalar_value = 0.0;
};

/// Optimal scheduler for w, then every objective evaluated under it (in parallel).
SupportPoint support_point(const AnalysisModel& model, const WeightVector& w, const SolverConfig& config);

} // namespace moqc
