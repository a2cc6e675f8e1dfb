#include "moqc/mdp.hpp"

#include "moqc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace moqc {

namespace {

constexpr double kRowTolerance = 1e-9;

void check_shape(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

} // namespace

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

SparseMdp::SparseMdp(std::size_t initial_state, std::vector<std::size_t> row_starts,
                     std::vector<std::string> labels, std::vector<std::size_t> transition_starts,
                     std::vector<Transition> transitions)
    : initial_(initial_state),
      row_starts_(std::move(row_starts)),
      labels_(std::move(labels)),
      transition_starts_(std::move(transition_starts)),
      transitions_(std::move(transitions)) {
    if (row_starts_.size() < 2) throw Error(ErrorKind::InvalidModel, "model has no states");
    const std::size_t n = num_states();
    if (initial_ >= n) throw Error(ErrorKind::InvalidModel, "initial state out of range");
    if (row_starts_.front() != 0 || row_starts_.back() != labels_.size())
        throw Error(ErrorKind::InvalidModel, "row_starts do not cover the choice range");
    for (std::size_t s = 0; s < n; ++s) {
        if (row_starts_[s + 1] <= row_starts_[s])
            throw Error(ErrorKind::InvalidModel, "state " + std::to_string(s) + " has no choice");
    }
    if (transition_starts_.size() != labels_.size() + 1 || transition_starts_.front() != 0 ||
        transition_starts_.back() != transitions_.size())
        throw Error(ErrorKind::InvalidModel, "transition_starts do not cover the transition range");
    for (std::size_t c = 0; c < labels_.size(); ++c) {
        if (transition_starts_[c + 1] <= transition_starts_[c])
            throw Error(ErrorKind::InvalidModel, "choice " + std::to_string(c) + " has no transition");
        double sum = 0.0;
        std::int64_t previous = -1;
        for (const auto& t : choice(c)) {
            if (t.target >= n) throw Error(ErrorKind::InvalidModel, "transition target out of range");
            if (static_cast<std::int64_t>(t.target) <= previous)
                throw Error(ErrorKind::InvalidModel, "targets of choice " + std::to_string(c) + " are not strictly ascending");
            previous = t.target;
            if (!(t.probability > 0.0 && t.probability <= 1.0))
                throw Error(ErrorKind::InvalidModel, "transition probability outside (0,1]");
            sum += t.probability;
        }
        if (std::abs(sum - 1.0) > kRowTolerance)
            throw Error(ErrorKind::InvalidModel, "choice " + std::to_string(c) + " sums to " + format_double(sum));
    }
}

std::size_t SparseMdp::state_of_choice(std::size_t c) const {
    auto it = std::upper_bound(row_starts_.begin(), row_starts_.end(), c);
    return static_cast<std::size_t>(it - row_starts_.begin()) - 1;
}

void RewardVectorFunction::validate(const SparseMdp& mdp) const {
    check_shape(names.size() == values.size(), "reward names and arrays differ in count");
    for (std::size_t i = 0; i < values.size(); ++i) {
        check_shape(values[i].size() == mdp.num_choices(), "reward array '" + names[i] + "' has wrong length");
        for (double v : values[i]) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorKind::InvalidModel, "reward '" + names[i] + "' has a negative or non-finite entry");
        }
    }
}

void DeterministicScheduler::validate(const SparseMdp& mdp) const {
    check_shape(choice_per_state.size() == mdp.num_states(), "scheduler state count differs from model");
    for (std::size_t s = 0; s < choice_per_state.size(); ++s)
        check_shape(choice_per_state[s] < mdp.choice_count(s),
                    "scheduler picks a choice outside the row group of state " + std::to_string(s));
}

void RandomizedScheduler::validate(const SparseMdp& mdp) const {
    check_shape(weights_per_state.size() == mdp.num_states(), "scheduler state count differs from model");
    for (std::size_t s = 0; s < weights_per_state.size(); ++s) {
        const auto& w = weights_per_state[s];
        check_shape(w.size() == mdp.choice_count(s), "weight vector of state " + std::to_string(s) + " has wrong length");
        double sum = 0.0;
        for (double x : w) {
            check_shape(x >= 0.0, "negative scheduler weight");
            sum += x;
        }
        check_shape(std::abs(sum - 1.0) <= kRowTolerance, "weights of state " + std::to_string(s) + " do not sum to 1");
    }
}

RandomizedScheduler RandomizedScheduler::uniform(const SparseMdp& mdp) {
    RandomizedScheduler r;
    r.weights_per_state.resize(mdp.num_states());
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        const auto k = mdp.choice_count(s);
        r.weights_per_state[s].assign(k, 1.0 / static_cast<double>(k));
    }
    return r;
}

void MixtureScheduler::validate(const SparseMdp& mdp) const {
    check_shape(!components.empty(), "mixture has no components");
    double sum = 0.0;
    for (const auto& c : components) {
        check_shape(c.weight >= 0.0, "negative mixture weight");
        sum += c.weight;
        c.scheduler.validate(mdp);
    }
    check_shape(std::abs(sum - 1.0) <= kRowTolerance, "mixture weights do not sum to 1");
}

MarkovChain induced_chain(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                          const DeterministicScheduler& scheduler) {
    scheduler.validate(mdp);
    check_shape(rewards.values.empty() || rewards.values.front().size() == mdp.num_choices(),
                "reward arrays do not match the model");
    MarkovChain chain;
    chain.initial_state = mdp.initial_state();
    chain.row_starts.reserve(mdp.num_states() + 1);
    chain.row_starts.push_back(0);
    chain.state_rewards.assign(rewards.size(), std::vector<double>(mdp.num_states(), 0.0));
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        const std::size_t c = mdp.row_start(s) + scheduler.choice_per_state[s];
        for (const auto& t : mdp.choice(c)) chain.entries.push_back(t);
        chain.row_starts.push_back(chain.entries.size());
        for (std::size_t i = 0; i < rewards.size(); ++i) chain.state_rewards[i][s] = rewards.values[i][c];
    }
    return chain;
}

MarkovChain induced_chain(const SparseMdp& mdp, const RewardVectorFunction& rewards,
                          const RandomizedScheduler& scheduler) {
    scheduler.validate(mdp);
    check_shape(rewards.values.empty() || rewards.values.front().size() == mdp.num_choices(),
                "reward arrays do not match the model");
    MarkovChain chain;
    chain.initial_state = mdp.initial_state();
    chain.row_starts.push_back(0);
    chain.state_rewards.assign(rewards.size(), std::vector<double>(mdp.num_states(), 0.0));
    std::vector<double> row(mdp.num_states(), 0.0);
    std::vector<std::uint32_t> touched;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        touched.clear();
        const auto& w = scheduler.weights_per_state[s];
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (w[k] == 0.0) continue;
            const std::size_t c = mdp.row_start(s) + k;
            for (const auto& t : mdp.choice(c)) {
                if (row[t.target] == 0.0) touched.push_back(t.target);
                row[t.target] += w[k] * t.probability;
            }
            for (std::size_t i = 0; i < rewards.size(); ++i) chain.state_rewards[i][s] += w[k] * rewards.values[i][c];
        }
        std::sort(touched.begin(), touched.end());
        for (auto target : touched) {
            chain.entries.push_back({target, row[target]});
            row[target] = 0.0;
        }
        chain.row_starts.push_back(chain.entries.size());
    }
    return chain;
}

MdpStats mdp_stats(const SparseMdp& mdp) {
    return {mdp.num_states(), mdp.num_choices(), mdp.num_transitions()};
}

std::string export_model_json(const SparseMdp& mdp, const RewardVectorFunction& rewards) {
    std::ostringstream out;
    out << "{\"num_states\":" << mdp.num_states() << ",\"initial_state\":" << mdp.initial_state()
        << ",\"row_starts\":[";
    for (std::size_t i = 0; i < mdp.row_starts().size(); ++i) out << (i ? "," : "") << mdp.row_starts()[i];
    out << "],\"choices\":[";
    for (std::size_t c = 0; c < mdp.num_choices(); ++c) {
        out << (c ? "," : "") << "{\"label\":" << nlohmann::json(mdp.label(c)).dump() << ",\"transitions\":[";
        bool first = true;
        for (const auto& t : mdp.choice(c)) {
            out << (first ? "" : ",") << "[" << t.target << "," << format_double(t.probability) << "]";
            first = false;
        }
        out << "]}";
    }
    out << "],\"rewards\":[";
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out << (i ? "," : "") << "{\"name\":" << nlohmann::json(rewards.names[i]).dump() << ",\"values\":[";
        for (std::size_t c = 0; c < rewards.values[i].size(); ++c)
            out << (c ? "," : "") << format_double(rewards.values[i][c]);
        out << "]}";
    }
    out << "]}";
    return out.str();
}

std::pair<SparseMdp, RewardVectorFunction> import_model_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("model JSON: ") + e.what());
    }
    try {
        auto row_starts = j.at("row_starts").get<std::vector<std::size_t>>();
        std::vector<std::string> labels;
        std::vector<std::size_t> tstarts{0};
        std::vector<Transition> transitions;
        for (const auto& c : j.at("choices")) {
            labels.push_back(c.at("label").get<std::string>());
            for (const auto& t : c.at("transitions"))
                transitions.push_back({t.at(0).get<std::uint32_t>(), t.at(1).get<double>()});
            tstarts.push_back(transitions.size());
        }
        SparseMdp mdp(j.at("initial_state").get<std::size_t>(), std::move(row_starts), std::move(labels),
                      std::move(tstarts), std::move(transitions));
        RewardVectorFunction rewards;
        for (const auto& r : j.at("rewards")) {
            rewards.names.push_back(r.at("name").get<std::string>());
            rewards.values.push_back(r.at("values").get<std::vector<double>>());
        }
        rewards.validate(mdp);
        return {std::move(mdp), std::move(rewards)};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("model JSON: ") + e.what());
    }
}

namespace {

void write_choices(std::ostringstream& out, const DeterministicScheduler& s) {
    out << "[";
    for (std::size_t i = 0; i < s.choice_per_state.size(); ++i) out << (i ? "," : "") << s.choice_per_state[i];
    out << "]";
}

DeterministicScheduler read_choices(const nlohmann::json& j) {
    return DeterministicScheduler{j.get<std::vector<std::uint32_t>>()};
}

} // namespace

std::string scheduler_to_json(const AnyScheduler& scheduler, std::size_t num_states) {
    std::ostringstream out;
    if (const auto* d = std::get_if<DeterministicScheduler>(&scheduler)) {
        out << "{\"kind\":\"deterministic\",\"num_states\":" << num_states << ",\"choices\":";
        write_choices(out, *d);
        out << "}";
    } else if (const auto* r = std::get_if<RandomizedScheduler>(&scheduler)) {
        out << "{\"kind\":\"randomized\",\"num_states\":" << num_states << ",\"weights_per_state\":[";
        for (std::size_t s = 0; s < r->weights_per_state.size(); ++s) {
            out << (s ? "," : "") << "[";
            for (std::size_t k = 0; k < r->weights_per_state[s].size(); ++k)
                out << (k ? "," : "") << format_double(r->weights_per_state[s][k]);
            out << "]";
        }
        out << "]}";
    } else {
        const auto& m = std::get<MixtureScheduler>(scheduler);
        out << "{\"kind\":\"mixture\",\"num_states\":" << num_states << ",\"components\":[";
        for (std::size_t i = 0; i < m.components.size(); ++i) {
            out << (i ? "," : "") << "{\"weight\":" << format_double(m.components[i].weight) << ",\"choices\":";
            write_choices(out, m.components[i].scheduler);
            out << "}";
        }
        out << "]}";
    }
    return out.str();
}

AnyScheduler scheduler_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto kind = j.at("kind").get<std::string>();
        const auto n = j.at("num_states").get<std::size_t>();
        auto check_n = [n](std::size_t got) {
            if (got != n) throw Error(ErrorKind::ShapeMismatch, "scheduler file: num_states disagrees with its arrays");
        };
        if (kind == "deterministic") {
            auto d = read_choices(j.at("choices"));
            check_n(d.choice_per_state.size());
            return d;
        }
        if (kind == "randomized") {
            RandomizedScheduler r{j.at("weights_per_state").get<std::vector<std::vector<double>>>()};
            check_n(r.weights_per_state.size());
            return r;
        }
        if (kind == "mixture") {
            MixtureScheduler m;
            for (const auto& c : j.at("components")) {
                m.components.push_back({c.at("weight").get<double>(), read_choices(c.at("choices"))});
                check_n(m.components.back().scheduler.choice_per_state.size());
            }
            return m;
        }
        throw Error(ErrorKind::SyntaxError, "scheduler file: unknown kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("scheduler file: ") + e.what());
    }
}

} // namespace moqc
