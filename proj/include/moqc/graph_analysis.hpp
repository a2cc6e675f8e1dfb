#pragma once

#include "moqc/mdp.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace moqc {

/// Directed graph in CSR form.
struct Digraph {
    std::vector<std::size_t> starts; // size n + 1
    std::vector<std::uint32_t> targets;
    std::size_t size() const { return starts.empty() ? 0 : starts.size() - 1; }
};

/// Strongly connected components, listed in reverse topological order: every edge
/// leaving a component points to a component listed earlier. States inside a
/// component are sorted ascending.
struct SccDecomposition {
    std::vector<std::vector<std::uint32_t>> components;
    std::vector<std::uint32_t> component_of;
};

SccDecomposition strongly_connected_components(const Digraph& graph);

struct Restriction {
    SparseMdp mdp;
    RewardVectorFunction rewards;
    /// new state index -> original state index
    std::vector<std::size_t> original_state;
    /// new choice index -> original choice index
    std::vector<std::size_t> original_choice;
};

/// Keeps only states forward-reachable from the initial state. Relative order of the
/// kept states is preserved.
Restriction reachable_restriction(const SparseMdp& mdp, const RewardVectorFunction& rewards);

struct Mec {
    std::vector<std::uint32_t> states;         // ascending
    std::vector<std::size_t> staying_choices;  // ascending global choice indices
};

struct MecDecomposition {
    std::vector<Mec> mecs; // ordered by smallest member state
    std::vector<std::int32_t> mec_of_state; // -1 when the state is in no MEC
};

/// Maximal end components by iterated SCC refinement.
MecDecomposition mec_decomposition(const SparseMdp& mdp);

struct FinitenessViolation {
    std::size_t objective = 0;
    std::size_t mec = 0;
    std::size_t choice = 0;
};

/// First staying choice of some MEC that carries a positive reward, if any.
std::optional<FinitenessViolation> find_reward_divergence(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                                                          const MecDecomposition& mecs);

/// Throws Error(Divergence) naming the first violating objective, MEC and choice.
void check_reward_finiteness(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                             const MecDecomposition& mecs);

} // namespace moqc
