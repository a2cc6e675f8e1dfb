#include "moqc/graph_analysis.hpp"

#include "moqc/error.hpp"

#include <algorithm>
#include <limits>

namespace moqc {

SccDecomposition strongly_connected_components(const Digraph& g) {
    // Iterative Tarjan; components come out sinks-first.
    const std::size_t n = g.size();
    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::pair<std::uint32_t, std::size_t>> call; // (node, next edge position)
    SccDecomposition out;
    out.component_of.assign(n, 0);
    std::uint32_t counter = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, g.starts[root]});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < g.starts[v + 1]) {
                const std::uint32_t w = g.targets[pos++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, g.starts[w]});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) {
                const std::uint32_t parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                std::vector<std::uint32_t> comp;
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    out.component_of[w] = static_cast<std::uint32_t>(out.components.size());
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                out.components.push_back(std::move(comp));
            }
        }
    }
    return out;
}

Restriction reachable_restriction(const SparseMdp& mdp, const RewardVectorFunction& rewards) {
    const std::size_t n = mdp.num_states();
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> frontier{mdp.initial_state()};
    seen[mdp.initial_state()] = 1;
    while (!frontier.empty()) {
        const std::size_t s = frontier.back();
        frontier.pop_back();
        for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c)
            for (const auto& t : mdp.choice(c))
                if (!seen[t.target]) {
                    seen[t.target] = 1;
                    frontier.push_back(t.target);
                }
    }

    Restriction r;
    std::vector<std::uint32_t> new_index(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (!seen[s]) continue;
        new_index[s] = static_cast<std::uint32_t>(r.original_state.size());
        r.original_state.push_back(s);
    }
    std::vector<std::size_t> row_starts{0}, tstarts{0};
    std::vector<std::string> labels;
    std::vector<Transition> transitions;
    r.rewards.names = rewards.names;
    r.rewards.values.assign(rewards.size(), {});
    for (std::size_t s : r.original_state) {
        for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c) {
            labels.push_back(mdp.label(c));
            r.original_choice.push_back(c);
            for (const auto& t : mdp.choice(c)) transitions.push_back({new_index[t.target], t.probability});
            tstarts.push_back(transitions.size());
            for (std::size_t i = 0; i < rewards.size(); ++i) r.rewards.values[i].push_back(rewards.values[i][c]);
        }
        row_starts.push_back(labels.size());
    }
    r.mdp = SparseMdp(new_index[mdp.initial_state()], std::move(row_starts), std::move(labels), std::move(tstarts),
                      std::move(transitions));
    return r;
}

MecDecomposition mec_decomposition(const SparseMdp& mdp) {
    const std::size_t n = mdp.num_states();
    std::vector<char> state_alive(n, 1);
    std::vector<char> choice_alive(mdp.num_choices(), 1);

    SccDecomposition scc;
    for (bool changed = true; changed;) {
        changed = false;
        Digraph g;
        g.starts.reserve(n + 1);
        g.starts.push_back(0);
        for (std::size_t s = 0; s < n; ++s) {
            if (state_alive[s]) {
                for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c) {
                    if (!choice_alive[c]) continue;
                    for (const auto& t : mdp.choice(c)) g.targets.push_back(t.target);
                }
            }
            g.starts.push_back(g.targets.size());
        }
        scc = strongly_connected_components(g);

        for (std::size_t s = 0; s < n; ++s) {
            if (!state_alive[s]) continue;
            bool any = false;
            for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c) {
                if (!choice_alive[c]) continue;
                bool stays = true;
                for (const auto& t : mdp.choice(c)) {
                    if (!state_alive[t.target] || scc.component_of[t.target] != scc.component_of[s]) {
                        stays = false;
                        break;
                    }
                }
                if (!stays) {
                    choice_alive[c] = 0;
                    changed = true;
                } else {
                    any = true;
                }
            }
            if (!any) {
                state_alive[s] = 0;
                changed = true;
            }
        }
    }

    MecDecomposition out;
    out.mec_of_state.assign(n, -1);
    // Components are sorted internally; order MECs by their smallest state.
    std::vector<const std::vector<std::uint32_t>*> comps;
    for (const auto& comp : scc.components)
        if (state_alive[comp.front()]) comps.push_back(&comp);
    std::sort(comps.begin(), comps.end(), [](auto* a, auto* b) { return a->front() < b->front(); });
    for (const auto* comp : comps) {
        Mec mec;
        mec.states = *comp;
        for (std::uint32_t s : mec.states) {
            out.mec_of_state[s] = static_cast<std::int32_t>(out.mecs.size());
            for (std::size_t c = mdp.row_start(s); c < mdp.row_start(s + 1); ++c)
                if (choice_alive[c]) mec.staying_choices.push_back(c);
        }
        out.mecs.push_back(std::move(mec));
    }
    return out;
}

std::optional<FinitenessViolation> find_reward_divergence(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                                          const MecDecomposition& mecs) {
    (void)mdp;
    for (std::size_t m = 0; m < mecs.mecs.size(); ++m)
        for (std::size_t c : mecs.mecs[m].staying_choices)
            for (std::size_t i = 0; i < rewards.size(); ++i)
                if (rewards.values[i][c] != 0.0) return FinitenessViolation{i, m, c};
    return std::nullopt;
}

void check_reward_finiteness(const SparseMdp& mdp, const RewardVectorFunction& rewards, const MecDecomposition& mecs) {
    if (auto v = find_reward_divergence(mdp, rewards, mecs)) {
        const std::string name = v->objective < rewards.names.size() ? rewards.names[v->objective] : "";
        throw Error(ErrorKind::Divergence,
                    "objective " + std::to_string(v->objective + 1) + " ('" + name + "') has reward " +
                        format_double(rewards.values[v->objective][v->choice]) + " on choice " +
                        std::to_string(v->choice) + " inside end component " + std::to_string(v->mec) +
                        " (state " + std::to_string(mdp.state_of_choice(v->choice)) +
                        "); total reward is infinite");
    }
}

} // namespace moqc
