#pragma once

#include "moqc/mdp.hpp"
#include "moqc/ta/automaton.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace moqc::ta {

struct SkeletonOutcome {
    std::size_t target = 0;
    /// Parameter giving the probability; empty means probability 1.
    std::string parameter;
    bool operator==(const SkeletonOutcome&) const = default;
};

struct SkeletonChoice {
    std::string action;
    std::vector<SkeletonOutcome> outcomes;
    bool operator==(const SkeletonChoice&) const = default;
};

/// MDP whose branching rows refer to named parameters. The first `original_states`
/// states are the automaton's, in its order; fresh states follow.
struct MdpSkeleton {
    std::vector<std::string> state_names;
    std::size_t initial = 0;
    std::size_t original_states = 0;
    std::vector<std::vector<SkeletonChoice>> choices;
    /// Invariants carried along as text, by state index.
    std::map<std::size_t, std::string> invariants;

    std::size_t fresh_states() const { return state_names.size() - original_states; }
};

struct ParamInfo {
    std::string state;
    std::string action;
    Guard guard;
};

/// Probabilities of the guards at branching states, named "p__<state>__<action>".
struct ParamTable {
    std::vector<std::string> names;  // conversion order
    std::map<std::string, ParamInfo> info;
    /// Branching state -> its parameters, in edge order.
    std::map<std::string, std::vector<std::string>> groups;
    std::map<std::string, double> values;

    /// Throws UnknownParameter for names not in the table, InvalidArgument outside [0, 1].
    void set(const std::string& name, double value);
    bool assigned(const std::string& name) const { return values.count(name) > 0; }
    /// Throws UnassignedParameter, or NonNormalizedDistribution when a group does not
    /// sum to 1 within 1e-9.
    void validate() const;
};

struct Conversion {
    MdpSkeleton skeleton;
    ParamTable params;
};

/// Choice and singleton states keep their edges as probability-1 choices. A branching
/// state gets a single tau choice: each named action a leads with p__s__a to a fresh
/// state "~s__a", which takes a to the edge target; anonymous edges lead straight to
/// their target. Several anonymous edges at one state are keyed tau, tau_2, tau_3, ...
Conversion convert_to_mdp(const TimedAutomaton& ta, const StateClassification& classification);

/// Edge key used in parameter names: the action, or the numbered tau key.
std::vector<std::string> edge_keys(const std::vector<const Edge*>& edges);

/// The skeleton with parameter values filled in. Calls validate() first.
SparseMdp instantiate(const MdpSkeleton& skeleton, const ParamTable& params);

using RewardSpecs = std::vector<std::pair<std::string, std::map<std::string, double>>>;

/// Flat single-module PRISM text: one variable s over the skeleton's states, one command
/// per choice with labels preserved, parameters as double constants, and one reward
/// structure per entry of `rewards` keyed by action label.
std::string emit_prism(const MdpSkeleton& skeleton, const ParamTable& params, const RewardSpecs& rewards = {});

/// Replaces characters outside [A-Za-z0-9_] by '_' so the name is a PRISM identifier.
std::string prism_identifier(const std::string& name);

} // namespace moqc::ta
