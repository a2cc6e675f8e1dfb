#include "moqc/numeric_solver.hpp"

#include "moqc/error.hpp"

#include <algorithm>

namespace moqc {

namespace {

std::vector<Transition> merged(std::vector<Transition> row) {
    std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    std::vector<Transition> out;
    for (const auto& t : row) {
        if (!out.empty() && out.back().target == t.target) {
            out.back().probability += t.probability;
        } else {
            out.push_back(t);
        }
    }
    return out;
}

} // namespace

AnalysisModel::AnalysisModel(const SparseMdp& mdp, const RewardVectorFunction& rewards)
    : mdp_(mdp), rewards_(rewards), mecs_(mec_decomposition(mdp)) {
    rewards.validate(mdp);
    check_reward_finiteness(mdp, rewards, mecs_);

    const std::size_t n = mdp.num_states();
    std::vector<std::size_t> mec_q(mecs_.mecs.size(), 0);
    q_state_of_.assign(n, 0);
    std::size_t next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto m = mecs_.mec_of_state[s];
        if (m < 0) {
            q_state_of_[s] = next++;
        } else if (mecs_.mecs[static_cast<std::size_t>(m)].states.front() == s) {
            mec_q[static_cast<std::size_t>(m)] = next++;
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        const auto m = mecs_.mec_of_state[s];
        if (m >= 0) q_state_of_[s] = mec_q[static_cast<std::size_t>(m)];
    }
    const std::size_t sink = next;

    std::vector<char> staying(mdp.num_choices(), 0);
    for (const auto& mec : mecs_.mecs)
        for (std::size_t c : mec.staying_choices) staying[c] = 1;

    auto add_original = [&](std::size_t c) {
        QuotientChoice qc;
        qc.original = static_cast<std::ptrdiff_t>(c);
        for (const auto& t : mdp.choice(c))
            qc.transitions.push_back({static_cast<std::uint32_t>(q_state_of_[t.target]), t.probability});
        qc.transitions = merged(std::move(qc.transitions));
        q_choices_.push_back(std::move(qc));
    };

    q_row_starts_.push_back(0);
    for (std::size_t s = 0; s < n; ++s) {
        const auto m = mecs_.mec_of_state[s];
        if (m < 0) {
            for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c) add_original(c);
        } else {
            const auto& mec = mecs_.mecs[static_cast<std::size_t>(m)];
            if (mec.states.front() != s) continue;
            for (std::uint32_t member : mec.states)
                for (std::size_t c = mdp.row_start(member); c < mdp.row_start(member + 1); ++c)
                    if (!staying[c]) add_original(c);
            QuotientChoice stay;
            stay.transitions.push_back({static_cast<std::uint32_t>(sink), 1.0});
            q_choices_.push_back(std::move(stay));
        }
        q_row_starts_.push_back(q_choices_.size());
    }
    QuotientChoice loop;
    loop.transitions.push_back({static_cast<std::uint32_t>(sink), 1.0});
    q_choices_.push_back(std::move(loop));
    q_row_starts_.push_back(q_choices_.size());
}

ValueVector evaluate_policy_all(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                const DeterministicScheduler& sched, const SolverConfig& config) {
    const MarkovChain chain = induced_chain(mdp, rewards, sched);
    const ChainSolver solver(chain, config);
    const auto values = solver.solve_all(chain.state_rewards);
    ValueVector out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i][chain.initial_state];
    return out;
}

ValueVector evaluate_policy_all(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                const RandomizedScheduler& sched, const SolverConfig& config) {
    const MarkovChain chain = induced_chain(mdp, rewards, sched);
    const ChainSolver solver(chain, config);
    const auto values = solver.solve_all(chain.state_rewards);
    ValueVector out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i][chain.initial_state];
    return out;
}

double evaluate_policy(const SparseMdp& mdp, const RewardVectorFunction& rewards, const DeterministicScheduler& sched,
                       std::size_t objective, const SolverConfig& config) {
    if (objective >= rewards.size())
        throw Error(ErrorKind::ShapeMismatch, "objective index " + std::to_string(objective) + " out of range");
    const MarkovChain chain = induced_chain(mdp, rewards, sched);
    const ChainSolver solver(chain, config);
    return solver.solve(chain.state_rewards[objective])[chain.initial_state];
}

namespace {

/// Turns a quotient policy into a scheduler on the original states.
DeterministicScheduler unfold(const AnalysisModel& model, const std::vector<std::size_t>& q_policy) {
    const SparseMdp& mdp = model.mdp();
    DeterministicScheduler sched;
    sched.choice_per_state.assign(mdp.num_states(), 0);
    const auto& mecs = model.mecs();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        if (mecs.mec_of_state[s] >= 0) continue;
        const auto& qc = model.quotient_choice(model.quotient_row_start(model.quotient_state_of(s)) +
                                               q_policy[model.quotient_state_of(s)]);
        sched.choice_per_state[s] = static_cast<std::uint32_t>(static_cast<std::size_t>(qc.original) - mdp.row_start(s));
    }
    std::vector<char> attracted(mdp.num_states(), 0);
    for (const auto& mec : mecs.mecs) {
        const std::size_t q = model.quotient_state_of(mec.states.front());
        const auto& qc = model.quotient_choice(model.quotient_row_start(q) + q_policy[q]);
        if (qc.original < 0) {
            // Stay inside forever: every member takes its first staying choice.
            // Staying choices are grouped by state in ascending order.
            std::size_t last = mdp.num_states();
            for (std::size_t c : mec.staying_choices) {
                const std::size_t s = mdp.state_of_choice(c);
                if (s == last) continue;
                last = s;
                sched.choice_per_state[s] = static_cast<std::uint32_t>(c - mdp.row_start(s));
            }
        } else {
            // Route every member to the exit state with staying choices, layer by layer.
            const auto exit_choice = static_cast<std::size_t>(qc.original);
            const std::size_t exit_state = mdp.state_of_choice(exit_choice);
            attracted[exit_state] = 1;
            sched.choice_per_state[exit_state] = static_cast<std::uint32_t>(exit_choice - mdp.row_start(exit_state));
            std::size_t remaining = mec.states.size() - 1;
            while (remaining > 0) {
                std::vector<std::pair<std::size_t, std::size_t>> layer;
                std::size_t taken = mdp.num_states();
                for (std::size_t c : mec.staying_choices) {
                    const std::size_t s = mdp.state_of_choice(c);
                    if (attracted[s] || s == taken) continue;
                    bool hits = false;
                    for (const auto& t : mdp.choice(c)) hits = hits || attracted[t.target];
                    if (hits) {
                        layer.push_back({s, c});
                        taken = s;
                    }
                }
                if (layer.empty()) throw Error(ErrorKind::NumericalFailure, "end component is not strongly connected");
                for (const auto& [s, c] : layer) {
                    attracted[s] = 1;
                    sched.choice_per_state[s] = static_cast<std::uint32_t>(c - mdp.row_start(s));
                }
                remaining -= layer.size();
            }
            for (auto s : mec.states) attracted[s] = 0;
        }
    }
    return sched;
}

} // namespace

WeightedOptimum optimal_weighted_scheduler(const AnalysisModel& model, const WeightVector& w,
                                           const SolverConfig& config) {
    config.validate();
    validate_weights(w, model.num_objectives());
    const auto& rewards = model.rewards();
    const std::size_t nq = model.quotient_states();

    std::vector<double> scalar(model.quotient_row_start(nq), 0.0);
    for (std::size_t qc = 0; qc < scalar.size(); ++qc) {
        const auto orig = model.quotient_choice(qc).original;
        if (orig < 0) continue;
        double v = 0.0;
        for (std::size_t i = 0; i < rewards.size(); ++i)
            v += w(static_cast<Eigen::Index>(i)) * rewards.values[i][static_cast<std::size_t>(orig)];
        scalar[qc] = v;
    }

    std::vector<std::size_t> policy(nq, 0);
    const std::size_t q0 = model.quotient_state_of(model.mdp().initial_state());
    WeightedOptimum result;
    SolverConfig single = config;
    single.workers = 1;

    for (std::size_t round = 0;; ++round) {
        if (round >= config.max_policy_iters)
            throw Error(ErrorKind::NonConvergence,
                        "policy iteration did not stabilize within " + std::to_string(config.max_policy_iters) + " rounds");
        MarkovChain chain;
        chain.initial_state = q0;
        chain.row_starts.push_back(0);
        chain.state_rewards.assign(1, std::vector<double>(nq, 0.0));
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t qc = model.quotient_row_start(q) + policy[q];
            for (const auto& t : model.quotient_choice(qc).transitions) chain.entries.push_back(t);
            chain.row_starts.push_back(chain.entries.size());
            chain.state_rewards[0][q] = scalar[qc];
        }
        const std::vector<double> x = ChainSolver(chain, single).solve(chain.state_rewards[0]);
        result.round_values.push_back(x[q0]);

        bool switched = false;
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t base = model.quotient_row_start(q);
            const std::size_t k = model.quotient_choice_count(q);
            if (k == 1) continue;
            std::vector<double> qv(k);
            for (std::size_t a = 0; a < k; ++a) {
                double v = scalar[base + a];
                for (const auto& t : model.quotient_choice(base + a).transitions) v += t.probability * x[t.target];
                qv[a] = v;
            }
            const double best = *std::max_element(qv.begin(), qv.end());
            if (best > qv[policy[q]] + config.policy_improvement_tol) {
                policy[q] = static_cast<std::size_t>(std::find(qv.begin(), qv.end(), best) - qv.begin());
                switched = true;
            }
        }
        if (!switched) {
            result.value = x[q0];
            break;
        }
    }
    result.scheduler = unfold(model, policy);
    return result;
}

SupportPoint support_point(const AnalysisModel& model, const WeightVector& w, const SolverConfig& config) {
    WeightedOptimum opt = optimal_weighted_scheduler(model, w, config);
    SupportPoint sp;
    sp.point = evaluate_policy_all(model.mdp(), model.rewards(), opt.scheduler, config);
    sp.scheduler = std::move(opt.scheduler);
    sp.scalar_value = opt.value;
    return sp;
}

} // namespace moqc
