#include "moqc/error.hpp"
#include "moqc/prism/prism.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace moqc::prism {

namespace {

constexpr double kNormTolerance = 1e-9;

/// Postfix program evaluated on a valuation; Booleans are 0/1, ints are exact doubles.
class CompiledExpr {
public:
    CompiledExpr() = default;
    CompiledExpr(const Expr& e, const std::unordered_map<std::string, std::size_t>& var_index) {
        compile(e, var_index);
    }

    double eval(const int* vals) const {
        double stack[64];
        std::size_t top = 0;
        for (const auto& n : code_) {
            switch (n.op) {
            case ExprOp::IntLit:
            case ExprOp::DoubleLit:
            case ExprOp::BoolLit: stack[top++] = n.value; break;
            case ExprOp::Ident: stack[top++] = vals[n.var]; break;
            case ExprOp::Neg: stack[top - 1] = -stack[top - 1]; break;
            case ExprOp::Not: stack[top - 1] = stack[top - 1] != 0.0 ? 0.0 : 1.0; break;
            default: {
                const double b = stack[--top];
                double& a = stack[top - 1];
                switch (n.op) {
                case ExprOp::Add: a = a + b; break;
                case ExprOp::Sub: a = a - b; break;
                case ExprOp::Mul: a = a * b; break;
                case ExprOp::Div: a = a / b; break;
                case ExprOp::Eq: a = a == b; break;
                case ExprOp::Ne: a = a != b; break;
                case ExprOp::Lt: a = a < b; break;
                case ExprOp::Le: a = a <= b; break;
                case ExprOp::Gt: a = a > b; break;
                case ExprOp::Ge: a = a >= b; break;
                case ExprOp::And: a = (a != 0.0 && b != 0.0); break;
                case ExprOp::Or: a = (a != 0.0 || b != 0.0); break;
                default: break;
                }
            }
            }
        }
        return stack[0];
    }

    bool holds(const int* vals) const { return eval(vals) != 0.0; }

private:
    struct Node {
        ExprOp op;
        double value = 0.0;
        std::size_t var = 0;
    };

    std::size_t compile(const Expr& e, const std::unordered_map<std::string, std::size_t>& var_index) {
        std::size_t depth = 0, extra = 0;
        for (const auto& a : e.args) depth = std::max(depth, extra++ + compile(a, var_index));
        Node n{e.op};
        switch (e.op) {
        case ExprOp::IntLit: n.value = static_cast<double>(e.int_value); break;
        case ExprOp::DoubleLit: n.value = e.double_value; break;
        case ExprOp::BoolLit: n.value = e.bool_value ? 1.0 : 0.0; break;
        case ExprOp::Ident: {
            auto it = var_index.find(e.name);
            if (it == var_index.end())
                throw Error(ErrorKind::UnknownIdentifier, "'" + e.name + "' is neither a variable nor a resolved constant");
            n.var = it->second;
            break;
        }
        default: break;
        }
        code_.push_back(n);
        depth = std::max<std::size_t>(depth, 1);
        if (depth >= 64) throw Error(ErrorKind::InvalidModel, "expression nesting too deep");
        return depth;
    }

    std::vector<Node> code_;
};

struct CompiledUpdate {
    bool has_probability = false;
    CompiledExpr probability;
    std::vector<std::pair<std::size_t, CompiledExpr>> assignments;
};

struct CompiledCommand {
    std::string action;
    CompiledExpr guard;
    std::vector<CompiledUpdate> updates;
};

struct CompiledRewardItem {
    bool is_action = false;
    std::string action;
    CompiledExpr guard;
    CompiledExpr value;
};

struct VarInfo {
    std::string name;
    int low = 0;
    int high = 0;
    int init = 0;
};

int int_literal(const Expr& e, const std::string& what) {
    if (e.op != ExprOp::IntLit) throw Error(ErrorKind::InvalidModel, what + " is not a constant integer after resolution");
    if (e.int_value < std::numeric_limits<int>::min() || e.int_value > std::numeric_limits<int>::max())
        throw Error(ErrorKind::InvalidModel, what + " is out of the supported integer range");
    return static_cast<int>(e.int_value);
}

class Builder {
public:
    Builder(const ModelSpec& spec, const BuildOptions& options) : spec_(spec), options_(options) {
        std::unordered_map<std::string, std::size_t> var_index;
        for (std::size_t mi = 0; mi < spec.modules.size(); ++mi) {
            for (const auto& v : spec.modules[mi].variables) {
                VarInfo info;
                info.name = v.name;
                info.low = int_literal(v.low, "lower bound of '" + v.name + "'");
                info.high = int_literal(v.high, "upper bound of '" + v.name + "'");
                info.init = v.init ? int_literal(*v.init, "initial value of '" + v.name + "'") : info.low;
                if (info.low > info.high)
                    throw Error(ErrorKind::InvalidModel, "variable '" + v.name + "' has an empty range");
                if (info.init < info.low || info.init > info.high)
                    throw Error(ErrorKind::VariableRangeViolation, "initial value of '" + v.name + "' is out of range");
                var_index[v.name] = vars_.size();
                vars_.push_back(info);
            }
        }
        radix_mult_.resize(vars_.size());
        unsigned __int128 mult = 1;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            radix_mult_[i] = static_cast<std::uint64_t>(mult);
            mult *= static_cast<unsigned __int128>(vars_[i].high - vars_[i].low + 1);
            if (mult > std::numeric_limits<std::uint64_t>::max())
                throw Error(ErrorKind::InvalidModel, "variable state space exceeds 64-bit encoding");
        }

        modules_.resize(spec.modules.size());
        for (std::size_t mi = 0; mi < spec.modules.size(); ++mi) {
            for (const auto& cmd : spec.modules[mi].commands) {
                CompiledCommand cc;
                cc.action = cmd.action;
                cc.guard = CompiledExpr(cmd.guard, var_index);
                for (const auto& u : cmd.updates) {
                    CompiledUpdate cu;
                    if (u.probability) {
                        cu.has_probability = true;
                        cu.probability = CompiledExpr(*u.probability, var_index);
                    }
                    for (const auto& a : u.assignments)
                        cu.assignments.emplace_back(var_index.at(a.variable), CompiledExpr(a.value, var_index));
                    cc.updates.push_back(std::move(cu));
                }
                if (!cc.action.empty()) {
                    auto& mods = alphabet_[cc.action];
                    if (mods.empty() || mods.back() != mi) mods.push_back(mi);
                }
                modules_[mi].push_back(std::move(cc));
            }
        }

        std::vector<std::string> names = options.reward_structures;
        if (names.empty())
            for (const auto& r : spec.reward_structures) names.push_back(r.name);
        for (const auto& name : names) {
            const RewardStructure* r = spec.find_rewards(name);
            if (!r) throw Error(ErrorKind::UnknownIdentifier, "no reward structure named '" + name + "'");
            std::vector<CompiledRewardItem> items;
            for (const auto& item : r->items) {
                CompiledRewardItem ci;
                ci.is_action = item.action.has_value();
                ci.action = item.action.value_or("");
                ci.guard = CompiledExpr(item.guard, var_index);
                ci.value = CompiledExpr(item.value, var_index);
                items.push_back(std::move(ci));
            }
            rewards_.push_back(std::move(items));
            reward_names_.push_back(name);
        }
    }

    BuildResult run() {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<int> init(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) init[i] = vars_[i].init;
        intern(init);

        std::vector<std::size_t> row_starts{0};
        std::vector<std::string> labels;
        std::vector<std::size_t> tstarts{0};
        std::vector<Transition> transitions;
        std::vector<std::vector<double>> reward_values(rewards_.size());
        std::vector<std::size_t> deadlocks;

        std::vector<PendingChoice> choices;
        for (std::size_t s = 0; s < num_states_; ++s) {
            const std::vector<int> vals(valuations_.begin() + static_cast<std::ptrdiff_t>(s * vars_.size()),
                                        valuations_.begin() + static_cast<std::ptrdiff_t>((s + 1) * vars_.size()));
            choices.clear();
            expand(vals, choices);
            if (choices.empty()) {
                deadlocks.push_back(s);
                PendingChoice loop;
                loop.branches.push_back({vals, 1.0});
                loop.self_loop_fix = true;
                choices.push_back(std::move(loop));
            }
            for (auto& ch : choices) {
                labels.push_back(ch.label);
                std::vector<Transition> row;
                for (const auto& b : ch.branches) {
                    if (b.probability <= 0.0) continue;
                    row.push_back({intern(b.vals), b.probability});
                }
                std::sort(row.begin(), row.end(),
                          [](const Transition& a, const Transition& b) { return a.target < b.target; });
                std::size_t start = transitions.size();
                for (const auto& t : row) {
                    if (transitions.size() > start && transitions.back().target == t.target) {
                        transitions.back().probability += t.probability;
                    } else {
                        transitions.push_back(t);
                    }
                }
                tstarts.push_back(transitions.size());
                for (std::size_t r = 0; r < rewards_.size(); ++r)
                    reward_values[r].push_back(ch.self_loop_fix ? 0.0 : reward_of(r, ch.label, vals.data()));
            }
            row_starts.push_back(labels.size());
        }

        if (!deadlocks.empty() && !options_.fix_deadlocks) {
            std::string list;
            for (std::size_t i = 0; i < deadlocks.size() && i < 20; ++i) list += "\n  " + describe_state(deadlocks[i]);
            throw Error(ErrorKind::DeadlockDetected, std::to_string(deadlocks.size()) +
                                                         " deadlock state(s) (use --fix-deadlocks to add self-loops):" + list);
        }

        BuildResult result;
        result.mdp = SparseMdp(0, std::move(row_starts), std::move(labels), std::move(tstarts), std::move(transitions));
        result.rewards.names = reward_names_;
        result.rewards.values = std::move(reward_values);
        result.report.num_states = result.mdp.num_states();
        result.report.num_choices = result.mdp.num_choices();
        result.report.num_transitions = result.mdp.num_transitions();
        result.report.deadlock_states = std::move(deadlocks);
        for (const auto& v : vars_) result.variable_names.push_back(v.name);
        result.valuations.resize(num_states_);
        for (std::size_t s = 0; s < num_states_; ++s)
            result.valuations[s].assign(valuations_.begin() + static_cast<std::ptrdiff_t>(s * vars_.size()),
                                        valuations_.begin() + static_cast<std::ptrdiff_t>((s + 1) * vars_.size()));
        result.report.build_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return result;
    }

private:
    struct Branch {
        std::vector<int> vals;
        double probability = 1.0;
    };

    struct PendingChoice {
        std::string label;
        std::vector<Branch> branches;
        bool self_loop_fix = false;
    };

    struct LocalBranch {
        double probability;
        const CompiledUpdate* update;
    };

    std::uint32_t intern(const std::vector<int>& vals) {
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            code += static_cast<std::uint64_t>(vals[i] - vars_[i].low) * radix_mult_[i];
        auto [it, inserted] = index_.try_emplace(code, static_cast<std::uint32_t>(num_states_));
        if (inserted) {
            if (num_states_ >= std::numeric_limits<std::uint32_t>::max())
                throw Error(ErrorKind::InvalidModel, "too many states");
            valuations_.insert(valuations_.end(), vals.begin(), vals.end());
            ++num_states_;
        }
        return it->second;
    }

    std::string describe_state(std::size_t s) const {
        std::string out = "(";
        for (std::size_t i = 0; i < vars_.size(); ++i)
            out += (i ? "," : "") + vars_[i].name + "=" + std::to_string(valuations_[s * vars_.size() + i]);
        return out + ")";
    }

    std::string describe_vals(const std::vector<int>& vals) const {
        std::string out = "(";
        for (std::size_t i = 0; i < vars_.size(); ++i) out += (i ? "," : "") + vars_[i].name + "=" + std::to_string(vals[i]);
        return out + ")";
    }

    /// Evaluates one command's update distribution, validating normalization.
    std::vector<LocalBranch> distribution(const CompiledCommand& cmd, const std::vector<int>& vals) const {
        std::vector<LocalBranch> out;
        double sum = 0.0;
        for (const auto& u : cmd.updates) {
            const double p = u.has_probability ? u.probability.eval(vals.data()) : 1.0;
            if (!(p >= -kNormTolerance && p <= 1.0 + kNormTolerance))
                throw Error(ErrorKind::NonNormalizedDistribution,
                            "update probability " + format_double(p) + " outside [0,1] in state " + describe_vals(vals));
            sum += p;
            out.push_back({p, &u});
        }
        if (std::abs(sum - 1.0) > kNormTolerance)
            throw Error(ErrorKind::NonNormalizedDistribution, "command" + (cmd.action.empty() ? "" : " [" + cmd.action + "]") +
                                                                  " probabilities sum to " + format_double(sum) +
                                                                  " in state " + describe_vals(vals));
        return out;
    }

    void apply(const CompiledUpdate& u, const std::vector<int>& source, std::vector<int>& target) const {
        for (const auto& [var, value] : u.assignments) {
            const double v = value.eval(source.data());
            const VarInfo& info = vars_[var];
            if (!(v >= info.low && v <= info.high))
                throw Error(ErrorKind::VariableRangeViolation, "update sets '" + info.name + "' to " + format_double(v) +
                                                                   " outside [" + std::to_string(info.low) + ".." +
                                                                   std::to_string(info.high) + "] from state " +
                                                                   describe_vals(source));
            target[var] = static_cast<int>(v);
        }
    }

    void expand(const std::vector<int>& vals, std::vector<PendingChoice>& out) const {
        for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
            for (const auto& cmd : modules_[mi]) {
                if (cmd.action.empty()) {
                    if (!cmd.guard.holds(vals.data())) continue;
                    PendingChoice ch;
                    for (const auto& b : distribution(cmd, vals)) {
                        if (b.probability <= 0.0) continue;
                        Branch br{vals, b.probability};
                        apply(*b.update, vals, br.vals);
                        ch.branches.push_back(std::move(br));
                    }
                    out.push_back(std::move(ch));
                    continue;
                }
                const auto& mods = alphabet_.at(cmd.action);
                if (mods.front() != mi || !cmd.guard.holds(vals.data())) continue;

                // Enabled same-label commands of every partner module, in module order.
                std::vector<std::vector<const CompiledCommand*>> partners;
                bool blocked = false;
                for (std::size_t k = 1; k < mods.size() && !blocked; ++k) {
                    std::vector<const CompiledCommand*> enabled;
                    for (const auto& other : modules_[mods[k]])
                        if (other.action == cmd.action && other.guard.holds(vals.data())) enabled.push_back(&other);
                    blocked = enabled.empty();
                    partners.push_back(std::move(enabled));
                }
                if (blocked) continue;

                std::vector<std::size_t> pick(partners.size(), 0);
                for (;;) {
                    std::vector<const CompiledCommand*> combo{&cmd};
                    for (std::size_t k = 0; k < partners.size(); ++k) combo.push_back(partners[k][pick[k]]);
                    out.push_back(synchronize(cmd.action, combo, vals));
                    // Lexicographic odometer, last partner varies fastest.
                    std::size_t k = partners.size();
                    bool done = true;
                    while (k > 0) {
                        --k;
                        if (++pick[k] < partners[k].size()) {
                            done = false;
                            break;
                        }
                        pick[k] = 0;
                    }
                    if (done) break;
                }
            }
        }
    }

    PendingChoice synchronize(const std::string& action, const std::vector<const CompiledCommand*>& combo,
                              const std::vector<int>& vals) const {
        std::vector<std::vector<LocalBranch>> dists;
        for (const auto* c : combo) dists.push_back(distribution(*c, vals));
        PendingChoice ch;
        ch.label = action;
        std::vector<std::size_t> idx(dists.size(), 0);
        for (;;) {
            double p = 1.0;
            for (std::size_t k = 0; k < dists.size(); ++k) p *= dists[k][idx[k]].probability;
            if (p > 0.0) {
                Branch br{vals, p};
                for (std::size_t k = 0; k < dists.size(); ++k) apply(*dists[k][idx[k]].update, vals, br.vals);
                ch.branches.push_back(std::move(br));
            }
            std::size_t k = dists.size();
            bool done = true;
            while (k > 0) {
                --k;
                if (++idx[k] < dists[k].size()) {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if (done) break;
        }
        return ch;
    }

    double reward_of(std::size_t r, const std::string& label, const int* vals) const {
        double total = 0.0;
        for (const auto& item : rewards_[r]) {
            if (item.is_action && item.action != label) continue;
            if (!item.guard.holds(vals)) continue;
            const double v = item.value.eval(vals);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorKind::InvalidModel, "reward structure '" + reward_names_[r] + "' yields " +
                                                         format_double(v) + "; rewards must be nonnegative");
            total += v;
        }
        return total;
    }

    const ModelSpec& spec_;
    const BuildOptions& options_;
    std::vector<VarInfo> vars_;
    std::vector<std::uint64_t> radix_mult_;
    std::vector<std::vector<CompiledCommand>> modules_;
    std::unordered_map<std::string, std::vector<std::size_t>> alphabet_;
    std::vector<std::vector<CompiledRewardItem>> rewards_;
    std::vector<std::string> reward_names_;

    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<int> valuations_;
    std::size_t num_states_ = 0;
};

} // namespace

BuildResult build_mdp(const ModelSpec& resolved, const BuildOptions& options) {
    Builder builder(resolved, options);
    return builder.run();
}

} // namespace moqc::prism
