#pragma once

#include "moqc/mdp.hpp"
#include "moqc/prism/ast.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moqc::prism {

/// Parses the supported PRISM subset and type-checks it: every identifier must be a
/// declared constant or variable, guards must be Boolean, probabilities and reward
/// values numeric, assignments must target the owning module's variables.
ModelSpec parse_model(std::string_view source);

/// Canonical pretty-print. parse_model(print_model(s)) == s for any parsed s.
std::string print_model(const ModelSpec& spec);

using ConstantOverrides = std::map<std::string, Value>;

/// Folds every constant to a literal and substitutes it everywhere. Overrides may
/// only define constants declared without a value.
ModelSpec resolve_constants(const ModelSpec& spec, const ConstantOverrides& overrides);

/// Like resolve_constants, but `forced` values replace in-file definitions too.
/// Used by the sensitivity runner to perturb constants wherever they were defined.
ModelSpec resolve_constants_forced(const ModelSpec& spec, const ConstantOverrides& overrides,
                                   const ConstantOverrides& forced);

/// Parses "NAME=VALUE" as given on the command line.
std::pair<std::string, Value> parse_override(const std::string& text);

struct BuildOptions {
    bool fix_deadlocks = false;
    /// Ordered reward-structure names; defines the objective order.
    std::vector<std::string> reward_structures;
};

struct BuildReport {
    std::size_t num_states = 0;
    std::size_t num_choices = 0;
    std::size_t num_transitions = 0;
    std::vector<std::size_t> deadlock_states;
    double build_time_ms = 0.0;
};

struct BuildResult {
    SparseMdp mdp;
    RewardVectorFunction rewards;
    BuildReport report;
    std::vector<std::string> variable_names;
    /// Per state, the variable values in variable_names order.
    std::vector<std::vector<int>> valuations;
};

/// Explicit-state construction by forward exploration from the initial valuation.
/// Labeled commands synchronize across every module whose alphabet contains the
/// label; unlabeled commands interleave. Choice order within a state: module order,
/// then command order, then lexicographic over the partner modules' commands.
BuildResult build_mdp(const ModelSpec& resolved, const BuildOptions& options);

} // namespace moqc::prism
