#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace moqc {

using Vector = Eigen::VectorXd;

/// One objective value per reward structure.
using ValueVector = Vector;

struct Transition {
    std::uint32_t target = 0;
    double probability = 0.0;
    bool operator==(const Transition&) const = default;
};

/// Explicit MDP in compressed-row layout. Choices are indexed globally; the choices of
/// state s are [row_start(s), row_start(s + 1)). Immutable after construction.
class SparseMdp {
public:
    SparseMdp() = default;

    /// Validates every structural invariant and throws Error(InvalidModel) on violation:
    /// each state has at least one choice, each row sums to 1 within 1e-9, all targets are
    /// in range, probabilities lie in (0, 1].
    SparseMdp(std::size_t initial_state, std::vector<std::size_t> row_starts,
              std::vector<std::string> labels, std::vector<std::size_t> transition_starts,
              std::vector<Transition> transitions);

    std::size_t num_states() const { return row_starts_.empty() ? 0 : row_starts_.size() - 1; }
    std::size_t num_choices() const { return labels_.size(); }
    std::size_t num_transitions() const { return transitions_.size(); }
    std::size_t initial_state() const { return initial_; }

    std::size_t row_start(std::size_t state) const { return row_starts_[state]; }
    std::size_t choice_count(std::size_t state) const { return row_starts_[state + 1] - row_starts_[state]; }
    std::span<const Transition> choice(std::size_t c) const {
        return {transitions_.data() + transition_starts_[c], transition_starts_[c + 1] - transition_starts_[c]};
    }
    const std::string& label(std::size_t c) const { return labels_[c]; }
    std::size_t state_of_choice(std::size_t c) const;

    const std::vector<std::size_t>& row_starts() const { return row_starts_; }
    const std::vector<std::size_t>& transition_starts() const { return transition_starts_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const SparseMdp&) const = default;

private:
    std::size_t initial_ = 0;
    std::vector<std::size_t> row_starts_;
    std::vector<std::string> labels_;
    std::vector<std::size_t> transition_starts_;
    std::vector<Transition> transitions_;
};

/// m nonnegative reward functions over choices.
struct RewardVectorFunction {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;

    std::size_t size() const { return values.size(); }
    /// Throws ShapeMismatch / InvalidModel when lengths or signs are wrong.
    void validate(const SparseMdp& mdp) const;
    bool operator==(const RewardVectorFunction&) const = default;
};

struct DeterministicScheduler {
    /// Local choice index (0-based within the state's row group).
    std::vector<std::uint32_t> choice_per_state;
    void validate(const SparseMdp& mdp) const;
    bool operator==(const DeterministicScheduler&) const = default;
};

struct RandomizedScheduler {
    /// Per state, one weight per local choice.
    std::vector<std::vector<double>> weights_per_state;
    void validate(const SparseMdp& mdp) const;
    static RandomizedScheduler uniform(const SparseMdp& mdp);
    bool operator==(const RandomizedScheduler&) const = default;
};

struct MixtureComponent {
    double weight = 0.0;
    DeterministicScheduler scheduler;
    bool operator==(const MixtureComponent&) const = default;
};

/// Picks component i with probability weight_i once, at time zero, and follows it forever.
struct MixtureScheduler {
    std::vector<MixtureComponent> components;
    void validate(const SparseMdp& mdp) const;
    bool operator==(const MixtureScheduler&) const = default;
};

using AnyScheduler = std::variant<DeterministicScheduler, RandomizedScheduler, MixtureScheduler>;

/// A discrete-time chain with per-objective state rewards.
struct MarkovChain {
    std::size_t initial_state = 0;
    std::vector<std::size_t> row_starts;
    std::vector<Transition> entries;
    std::vector<std::vector<double>> state_rewards;

    std::size_t num_states() const { return row_starts.empty() ? 0 : row_starts.size() - 1; }
    std::span<const Transition> row(std::size_t s) const {
        return {entries.data() + row_starts[s], row_starts[s + 1] - row_starts[s]};
    }
};

MarkovChain induced_chain(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                          const DeterministicScheduler& scheduler);
MarkovChain induced_chain(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                          const RandomizedScheduler& scheduler);
// Mixtures are evaluated by linearity over their components, never as one chain.
MarkovChain induced_chain(const SparseMdp&, const RewardVectorFunction&, const MixtureScheduler&) = delete;

struct MdpStats {
    std::size_t states = 0;
    std::size_t choices = 0;
    std::size_t transitions = 0;
    bool operator==(const MdpStats&) const = default;
};

MdpStats mdp_stats(const SparseMdp& mdp);

/// Model exchange format (JSON). Doubles are written with 17 significant digits so a
/// round trip is bit-exact.
std::string export_model_json(const SparseMdp& mdp, const RewardVectorFunction& rewards);
std::pair<SparseMdp, RewardVectorFunction> import_model_json(std::string_view text);

std::string scheduler_to_json(const AnyScheduler& scheduler, std::size_t num_states);
AnyScheduler scheduler_from_json(std::string_view text);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

} // namespace moqc
