#pragma once

#include "moqc/error.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace moqc::test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string model_path(const std::string& name) { return std::string(MOQC_MODELS_DIR) + "/" + name; }

template <class F>
ErrorKind error_kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    throw std::runtime_error("expected an moqc::Error");
}

} // namespace moqc::test

#include "moqc/graph_analysis.hpp"
#include "moqc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace moqc::test {

/// Random MDP with `states` states, 1..max_choices choices per state, each choice with
/// 1..3 random successors. Rewards are random nonnegative integers/4 (some zero).
struct RandomModel {
    SparseMdp mdp;
    RewardVectorFunction rewards;
};

inline RandomModel random_model(std::mt19937& rng, std::size_t states, std::size_t max_choices, std::size_t objectives) {
    std::uniform_int_distribution<std::size_t> nchoice(1, max_choices), nsucc(1, 3), target(0, states - 1);
    std::uniform_int_distribution<int> reward(0, 8);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<std::size_t> row_starts{0}, tstarts{0};
    std::vector<std::string> labels;
    std::vector<Transition> transitions;
    RewardVectorFunction rewards;
    rewards.values.assign(objectives, {});
    for (std::size_t i = 0; i < objectives; ++i) rewards.names.push_back("r" + std::to_string(i));
    for (std::size_t s = 0; s < states; ++s) {
        const std::size_t k = nchoice(rng);
        for (std::size_t c = 0; c < k; ++c) {
            labels.push_back("c" + std::to_string(c));
            std::vector<std::uint32_t> succ;
            const std::size_t ns = nsucc(rng);
            for (std::size_t j = 0; j < ns; ++j) succ.push_back(static_cast<std::uint32_t>(target(rng)));
            std::sort(succ.begin(), succ.end());
            succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
            std::vector<double> w;
            double total = 0;
            for (std::size_t j = 0; j < succ.size(); ++j) {
                w.push_back(unit(rng));
                total += w.back();
            }
            double acc = 0;
            for (std::size_t j = 0; j < succ.size(); ++j) {
                double p = j + 1 == succ.size() ? 1.0 - acc : w[j] / total;
                acc += p;
                transitions.push_back({succ[j], p});
            }
            tstarts.push_back(transitions.size());
            for (std::size_t i = 0; i < objectives; ++i) {
                int r = reward(rng);
                rewards.values[i].push_back(r <= 2 ? 0.0 : r / 4.0);
            }
        }
        row_starts.push_back(labels.size());
    }
    return {SparseMdp(0, row_starts, labels, tstarts, transitions), rewards};
}

/// Maximal end components by definition: every state subset whose maximal set of
/// staying choices covers each member and is strongly connected is an end component;
/// MECs are the inclusion-maximal ones. Exponential, for tiny models only.
struct BruteMec {
    std::vector<std::uint32_t> states;
    std::vector<std::size_t> staying;
    bool operator==(const BruteMec&) const = default;
};

inline std::vector<BruteMec> brute_force_mecs(const SparseMdp& mdp) {
    const std::size_t n = mdp.num_states();
    std::vector<std::pair<unsigned, std::vector<std::size_t>>> ecs;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        auto in = [&](std::size_t s) { return (mask >> s) & 1u; };
        std::vector<std::size_t> staying;
        bool ok = true;
        for (std::size_t s = 0; s < n && ok; ++s) {
            if (!in(s)) continue;
            bool any = false;
            for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c) {
                bool stays = true;
                for (const auto& t : mdp.choice(c)) stays = stays && in(t.target);
                if (stays) {
                    staying.push_back(c);
                    any = true;
                }
            }
            ok = any;
        }
        if (!ok) continue;
        // strong connectivity: reachability closure from every member
        for (std::size_t s = 0; s < n && ok; ++s) {
            if (!in(s)) continue;
            unsigned seen = 1u << s;
            for (bool grew = true; grew;) {
                grew = false;
                for (std::size_t c : staying) {
                    if (!((seen >> mdp.state_of_choice(c)) & 1u)) continue;
                    for (const auto& t : mdp.choice(c))
                        if (!((seen >> t.target) & 1u)) {
                            seen |= 1u << t.target;
                            grew = true;
                        }
                }
            }
            ok = seen == mask;
        }
        if (ok) ecs.push_back({mask, staying});
    }
    std::vector<BruteMec> out;
    for (const auto& [mask, staying] : ecs) {
        bool maximal = true;
        for (const auto& other : ecs)
            if (other.first != mask && (other.first & mask) == mask) maximal = false;
        if (!maximal) continue;
        BruteMec m;
        for (std::size_t s = 0; s < n; ++s)
            if ((mask >> s) & 1u) m.states.push_back(static_cast<std::uint32_t>(s));
        m.staying = staying;
        out.push_back(m);
    }
    std::sort(out.begin(), out.end(), [](const BruteMec& a, const BruteMec& b) { return a.states < b.states; });
    return out;
}

/// Zeroes rewards on every choice that stays inside some end component, so total
/// rewards are finite under every scheduler. Small models use the brute-force MECs;
/// larger ones fall back to the library decomposition (checked against it elsewhere).
inline void make_finite(RandomModel& m) {
    auto zero = [&](std::size_t c) {
        for (auto& v : m.rewards.values) v[c] = 0.0;
    };
    if (m.mdp.num_states() <= 12) {
        for (const auto& mec : brute_force_mecs(m.mdp))
            for (std::size_t c : mec.staying) zero(c);
        return;
    }
    for (const auto& mec : mec_decomposition(m.mdp).mecs)
        for (std::size_t c : mec.staying_choices) zero(c);
}

/// Total reward of a deterministic scheduler by plain value iteration from zero.
inline std::vector<double> value_iteration_totals(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                                  const std::vector<std::uint32_t>& choice) {
    std::vector<double> out;
    for (const auto& rv : rewards.values) {
        std::vector<double> x(mdp.num_states(), 0.0), y(mdp.num_states(), 0.0);
        for (int it = 0; it < 2000000; ++it) {
            double change = 0;
            for (std::size_t s = 0; s < mdp.num_states(); ++s) {
                const std::size_t c = mdp.row_start(s) + choice[s];
                double v = rv[c];
                for (const auto& t : mdp.choice(c)) v += t.probability * x[t.target];
                change = std::max(change, std::abs(v - x[s]));
                y[s] = v;
            }
            x.swap(y);
            if (change < 1e-14) break;
        }
        out.push_back(x[mdp.initial_state()]);
    }
    return out;
}

/// Calls f for every deterministic scheduler (choice index per state).
inline void for_each_scheduler(const SparseMdp& mdp, const std::function<void(const std::vector<std::uint32_t>&)>& f) {
    std::vector<std::uint32_t> pick(mdp.num_states(), 0);
    for (;;) {
        f(pick);
        std::size_t s = 0;
        while (s < pick.size()) {
            if (++pick[s] < mdp.choice_count(s)) break;
            pick[s] = 0;
            ++s;
        }
        if (s == pick.size()) return;
    }
}

/// TwoArm: s0 --a--> sink with reward (1,0); s0 --b--> sink with (0,1); sink self-loop.
inline RandomModel two_arm() {
    SparseMdp mdp(0, {0, 2, 3}, {"a", "b", "done"}, {0, 1, 2, 3}, {{1, 1.0}, {1, 1.0}, {1, 1.0}});
    RewardVectorFunction r{{"first", "second"}, {{1, 0, 0}, {0, 1, 0}}};
    return {mdp, r};
}

/// One decision among `arms` choices, each moving to an absorbing state and earning a
/// reward vector drawn near the unit sphere around (2, ..., 2). Its achievable set is a
/// polytope with many vertices on a curved front.
inline RandomModel fan_model(std::mt19937& rng, std::size_t arms, std::size_t objectives) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::string> labels;
    std::vector<std::size_t> tstarts{0};
    std::vector<Transition> transitions;
    RewardVectorFunction rewards;
    rewards.values.assign(objectives, {});
    for (std::size_t i = 0; i < objectives; ++i) rewards.names.push_back("r" + std::to_string(i));
    for (std::size_t a = 0; a < arms; ++a) {
        labels.push_back("a" + std::to_string(a));
        transitions.push_back({1, 1.0});
        tstarts.push_back(transitions.size());
        std::vector<double> dir(objectives);
        double norm = 0;
        for (auto& x : dir) {
            x = gauss(rng);
            norm += x * x;
        }
        for (std::size_t i = 0; i < objectives; ++i) rewards.values[i].push_back(2.0 + dir[i] / std::sqrt(norm));
    }
    labels.push_back("done");
    transitions.push_back({1, 1.0});
    tstarts.push_back(transitions.size());
    for (auto& v : rewards.values) v.push_back(0.0);
    return {SparseMdp(0, {0, arms, arms + 1}, labels, tstarts, transitions), rewards};
}

} // namespace moqc::test
