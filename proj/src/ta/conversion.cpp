#include "moqc/ta/conversion.hpp"

#include "moqc/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

namespace moqc::ta {

void ParamTable::set(const std::string& name, double value) {
    if (!info.count(name)) throw Error(ErrorKind::UnknownParameter, "'" + name + "' is not a parameter of the converted model");
    if (!(value >= 0.0 && value <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "parameter '" + name + "' = " + format_double(value) + " is not in [0, 1]");
    values[name] = value;
}

void ParamTable::validate() const {
    for (const auto& n : names)
        if (!assigned(n)) throw Error(ErrorKind::UnassignedParameter, "parameter '" + n + "' has no value");
    for (const auto& [state, members] : groups) {
        double total = 0.0;
        for (const auto& n : members) total += values.at(n);
        if (std::abs(total - 1.0) > 1e-9)
            throw Error(ErrorKind::NonNormalizedDistribution,
                        "parameters of branching state '" + state + "' sum to " + format_double(total));
    }
}

std::vector<std::string> edge_keys(const std::vector<const Edge*>& edges) {
    std::vector<std::string> keys;
    std::size_t taus = 0;
    for (const Edge* e : edges) {
        if (e->action != kTau) {
            keys.push_back(e->action);
        } else {
            ++taus;
            keys.push_back(taus == 1 ? std::string(kTau) : std::string(kTau) + "_" + std::to_string(taus));
        }
    }
    return keys;
}

Conversion convert_to_mdp(const TimedAutomaton& ta, const StateClassification& classification) {
    Conversion out;
    MdpSkeleton& sk = out.skeleton;
    ParamTable& params = out.params;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& s : ta.states) {
        index.emplace(s, sk.state_names.size());
        sk.state_names.push_back(s);
    }
    sk.original_states = sk.state_names.size();
    sk.initial = index.at(ta.initial);
    sk.choices.resize(sk.original_states);
    for (const auto& [s, g] : ta.invariants) sk.invariants[index.at(s)] = to_string(g);

    for (const auto& s : ta.states) {
        const std::size_t si = index.at(s);
        const auto edges = ta.edges_from(s);
        const auto kind = classification.kinds.find(s);
        if (kind == classification.kinds.end())
            throw Error(ErrorKind::InvalidArgument, "classification has no entry for state '" + s + "'");
        if (kind->second != StateKind::Branching) {
            for (const Edge* e : edges) sk.choices[si].push_back({e->action, {{index.at(e->to), ""}}});
            continue;
        }
        const auto keys = edge_keys(edges);
        SkeletonChoice tau{kTau, {}};
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Edge& e = *edges[i];
            const std::string param = "p__" + s + "__" + keys[i];
            if (params.info.count(param)) throw Error(ErrorKind::StateNameClash, "parameter name '" + param + "' is not unique");
            params.names.push_back(param);
            params.info[param] = {s, keys[i], e.guard};
            params.groups[s].push_back(param);
            if (e.action == kTau) {
                tau.outcomes.push_back({index.at(e.to), param});
                continue;
            }
            const std::string fresh = "~" + s + "__" + e.action;
            if (index.count(fresh)) throw Error(ErrorKind::StateNameClash, "fresh state name '" + fresh + "' is taken");
            const std::size_t fi = sk.state_names.size();
            index.emplace(fresh, fi);
            sk.state_names.push_back(fresh);
            sk.choices.push_back({{e.action, {{index.at(e.to), ""}}}});
            tau.outcomes.push_back({fi, param});
        }
        sk.choices[si].push_back(std::move(tau));
    }
    return out;
}

namespace {

std::vector<Transition> outcomes_of(const SkeletonChoice& c, const ParamTable& params) {
    std::vector<Transition> ts;
    for (const auto& o : c.outcomes) {
        const double p = o.parameter.empty() ? 1.0 : params.values.at(o.parameter);
        if (p == 0.0) continue;
        const auto t = static_cast<std::uint32_t>(o.target);
        auto it = std::find_if(ts.begin(), ts.end(), [t](const Transition& x) { return x.target == t; });
        if (it == ts.end()) {
            ts.push_back({t, p});
        } else {
            it->probability += p;
        }
    }
    std::sort(ts.begin(), ts.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    return ts;
}

} // namespace

SparseMdp instantiate(const MdpSkeleton& skeleton, const ParamTable& params) {
    params.validate();
    std::vector<std::size_t> row_starts{0}, tstarts{0};
    std::vector<std::string> labels;
    std::vector<Transition> transitions;
    for (const auto& row : skeleton.choices) {
        for (const auto& c : row) {
            labels.push_back(c.action);
            for (const auto& t : outcomes_of(c, params)) transitions.push_back(t);
            tstarts.push_back(transitions.size());
        }
        row_starts.push_back(labels.size());
    }
    return SparseMdp(skeleton.initial, row_starts, labels, tstarts, transitions);
}

std::string prism_identifier(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), '_');
    return out;
}

std::string emit_prism(const MdpSkeleton& skeleton, const ParamTable& params, const RewardSpecs& rewards) {
    params.validate();
    std::map<std::string, std::string> ident;
    std::set<std::string> taken;
    for (const auto& n : params.names) {
        const std::string id = prism_identifier(n);
        if (!taken.insert(id).second)
            throw Error(ErrorKind::StateNameClash, "parameters '" + n + "' and another map to the PRISM name '" + id + "'");
        ident[n] = id;
    }
    for (const auto& row : skeleton.choices)
        for (const auto& c : row)
            if (prism_identifier(c.action) != c.action)
                throw Error(ErrorKind::InvalidModel, "action '" + c.action + "' is not a PRISM identifier");

    std::ostringstream out;
    out << "mdp\n\n";
    for (const auto& n : params.names) out << "const double " << ident[n] << " = " << format_double(params.values.at(n)) << ";\n";
    if (!params.names.empty()) out << "\n";
    out << "module M\n";
    out << "  s : [0.." << (skeleton.state_names.size() - 1) << "] init " << skeleton.initial << ";\n";
    for (std::size_t i = 0; i < skeleton.state_names.size(); ++i) {
        out << "  // " << i << ": " << skeleton.state_names[i];
        if (auto it = skeleton.invariants.find(i); it != skeleton.invariants.end()) out << "  inv: " << it->second;
        out << "\n";
        for (const auto& c : skeleton.choices[i]) {
            out << "  [" << c.action << "] s=" << i << " -> ";
            for (std::size_t k = 0; k < c.outcomes.size(); ++k) {
                const auto& o = c.outcomes[k];
                if (k) out << " + ";
                if (!o.parameter.empty()) out << ident[o.parameter] << " : ";
                out << "(s'=" << o.target << ")";
            }
            out << ";\n";
        }
    }
    out << "endmodule\n";
    for (const auto& [name, per_action] : rewards) {
        out << "\nrewards \"" << name << "\"\n";
        for (const auto& [action, value] : per_action) out << "  [" << action << "] true : " << format_double(value) << ";\n";
        out << "endrewards\n";
    }
    return out.str();
}

} // namespace moqc::ta
