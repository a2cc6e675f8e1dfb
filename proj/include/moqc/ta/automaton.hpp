#pragma once

#include "moqc/ta/guard.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moqc::ta {

/// Label of anonymous edges. Anonymous edges never synchronize.
inline constexpr const char* kTau = "tau";

struct Edge {
    std::string from;
    Guard guard;
    std::string action;
    std::vector<std::string> resets;
    std::string to;
    bool operator==(const Edge&) const = default;
};

struct TimedAutomaton {
    std::string name;
    std::vector<std::string> states;
    std::string initial;
    /// Synchronizing alphabet: every named action on an edge, plus any declared extras.
    std::vector<std::string> actions;
    /// States without an entry have invariant `true`.
    std::map<std::string, Guard> invariants;
    std::vector<Edge> edges;

    /// Throws InvalidModel for unknown states or clocks, or a second edge for the same
    /// (state, action) pair; StateNameClash for repeated state names.
    void validate(const Declarations& decls) const;
    std::vector<const Edge*> edges_from(const std::string& state) const;
    bool has_action(const std::string& action) const;
    Guard invariant(const std::string& state) const;
};

/// Synchronized product restricted to states reachable from the initial pair. Product
/// states are named "s1.s2". Shared named actions move both sides with conjoined guards
/// and united resets; other actions (and tau) move one side.
TimedAutomaton compose(const TimedAutomaton& a, const TimedAutomaton& b);

/// Left-associative composition of one or more automata.
TimedAutomaton compose_all(const std::vector<TimedAutomaton>& automata);

struct TaFile {
    Declarations decls;
    std::vector<TimedAutomaton> automata;
    /// Optional reward structures: name -> action -> reward per occurrence.
    std::vector<std::pair<std::string, std::map<std::string, double>>> rewards;
};

/// Reads the JSON TA format; edges without an "action" are anonymous.
TaFile parse_ta_file(std::string_view text);

enum class StateKind { Branching, Choice, Singleton };

const char* to_string(StateKind kind);

struct StateClassification {
    std::map<std::string, StateKind> kinds;

    std::vector<std::string> of_kind(StateKind kind) const;
};

/// States with at most one outgoing edge are Singleton. Otherwise every pair of guards
/// must be mutually exclusive (Branching) or every pair equivalent (Choice); anything
/// else throws AssumptionViolated naming the state and the offending pair.
StateClassification classify_states(const TimedAutomaton& ta);

} // namespace moqc::ta
