#include "moqc/ta/automaton.hpp"

#include "moqc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace moqc::ta {

namespace {

bool contains(const std::vector<std::string>& xs, const std::string& x) {
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

} // namespace

void TimedAutomaton::validate(const Declarations& decls) const {
    std::set<std::string> seen;
    for (const auto& s : states)
        if (!seen.insert(s).second) throw Error(ErrorKind::StateNameClash, name + ": state '" + s + "' is listed twice");
    if (!seen.count(initial)) throw Error(ErrorKind::InvalidModel, name + ": initial state '" + initial + "' is not a state");
    auto check_clocks = [&](const Guard& g, const std::string& where) {
        std::set<std::string> clocks, bools;
        collect_names(g, clocks, bools);
        for (const auto& c : clocks)
            if (!decls.is_clock(c)) throw Error(ErrorKind::InvalidModel, name + ": " + where + " uses undeclared clock '" + c + "'");
        for (const auto& b : bools)
            if (!decls.is_boolean(b))
                throw Error(ErrorKind::InvalidModel, name + ": " + where + " uses undeclared Boolean '" + b + "'");
    };
    for (const auto& [s, g] : invariants) {
        if (!seen.count(s)) throw Error(ErrorKind::InvalidModel, name + ": invariant for unknown state '" + s + "'");
        check_clocks(g, "invariant of " + s);
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : edges) {
        if (!seen.count(e.from) || !seen.count(e.to))
            throw Error(ErrorKind::InvalidModel, name + ": edge " + e.from + " -> " + e.to + " names an unknown state");
        const std::string where = "edge " + e.from + " -[" + e.action + "]-> " + e.to;
        check_clocks(e.guard, where);
        for (const auto& z : e.resets)
            if (!decls.is_clock(z)) throw Error(ErrorKind::InvalidModel, name + ": " + where + " resets unknown clock '" + z + "'");
        if (e.action != kTau && !pairs.insert({e.from, e.action}).second)
            throw Error(ErrorKind::InvalidModel,
                        name + ": state '" + e.from + "' has more than one edge for action '" + e.action + "'");
        if (e.action != kTau && !contains(actions, e.action))
            throw Error(ErrorKind::InvalidModel, name + ": action '" + e.action + "' missing from the alphabet");
    }
}

std::vector<const Edge*> TimedAutomaton::edges_from(const std::string& state) const {
    std::vector<const Edge*> out;
    for (const auto& e : edges)
        if (e.from == state) out.push_back(&e);
    return out;
}

bool TimedAutomaton::has_action(const std::string& action) const { return action != kTau && contains(actions, action); }

Guard TimedAutomaton::invariant(const std::string& state) const {
    const auto it = invariants.find(state);
    return it == invariants.end() ? Guard::truth() : it->second;
}

TimedAutomaton compose(const TimedAutomaton& a, const TimedAutomaton& b) {
    for (const auto& s : a.states)
        if (contains(b.states, s))
            throw Error(ErrorKind::StateNameClash, "cannot compose " + a.name + " and " + b.name + ": both have a state '" +
                                                       s + "'");
    TimedAutomaton out;
    out.name = a.name + "||" + b.name;
    out.actions = a.actions;
    for (const auto& x : b.actions)
        if (!contains(out.actions, x)) out.actions.push_back(x);

    auto joined = [](const std::string& x, const std::string& y) { return x + "." + y; };
    std::unordered_map<std::string, std::pair<std::string, std::string>> parts;
    std::deque<std::pair<std::string, std::string>> queue;
    auto visit = [&](const std::string& x, const std::string& y) {
        const std::string n = joined(x, y);
        auto [it, fresh] = parts.emplace(n, std::make_pair(x, y));
        if (fresh) {
            out.states.push_back(n);
            queue.emplace_back(x, y);
        } else if (it->second != std::make_pair(x, y)) {
            throw Error(ErrorKind::StateNameClash, "product state name '" + n + "' is ambiguous");
        }
        return n;
    };
    out.initial = visit(a.initial, b.initial);

    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        const std::string here = joined(x, y);
        const Guard inv = Guard::conjunction(a.invariant(x), b.invariant(y));
        if (inv.kind != Guard::Kind::True) out.invariants[here] = inv;

        const auto from_b = b.edges_from(y);
        for (const Edge* e : a.edges_from(x)) {
            if (!b.has_action(e->action)) {
                out.edges.push_back({here, e->guard, e->action, e->resets, visit(e->to, y)});
                continue;
            }
            for (const Edge* f : from_b) {
                if (f->action != e->action) continue;
                std::vector<std::string> resets = e->resets;
                for (const auto& z : f->resets)
                    if (!contains(resets, z)) resets.push_back(z);
                out.edges.push_back({here, Guard::conjunction(e->guard, f->guard), e->action, resets, visit(e->to, f->to)});
            }
        }
        for (const Edge* f : from_b)
            if (!a.has_action(f->action)) out.edges.push_back({here, f->guard, f->action, f->resets, visit(x, f->to)});
    }
    return out;
}

TimedAutomaton compose_all(const std::vector<TimedAutomaton>& automata) {
    if (automata.empty()) throw Error(ErrorKind::InvalidArgument, "no automata to compose");
    TimedAutomaton acc = automata.front();
    for (std::size_t i = 1; i < automata.size(); ++i) acc = compose(acc, automata[i]);
    return acc;
}

TaFile parse_ta_file(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("TA file: ") + e.what());
    }
    try {
        TaFile out;
        out.decls.clocks = j.value("clocks", std::vector<std::string>{});
        out.decls.booleans = j.value("booleans", std::vector<std::string>{});
        if (j.contains("constants")) {
            for (const auto& [k, v] : j.at("constants").items()) {
                const double c = v.get<double>();
                if (!(c >= 0.0)) throw Error(ErrorKind::InvalidModel, "TA file: constant '" + k + "' must be nonnegative");
                out.decls.constants[k] = c;
            }
        }
        for (const auto& a : j.at("automata")) {
            TimedAutomaton ta;
            ta.name = a.at("name").get<std::string>();
            ta.states = a.at("states").get<std::vector<std::string>>();
            ta.initial = a.value("init", ta.states.empty() ? std::string() : ta.states.front());
            ta.actions = a.value("actions", std::vector<std::string>{});
            if (a.contains("invariants"))
                for (const auto& [s, g] : a.at("invariants").items())
                    ta.invariants[s] = parse_guard(g.get<std::string>(), out.decls);
            for (const auto& e : a.at("edges")) {
                Edge edge;
                edge.from = e.at("from").get<std::string>();
                edge.to = e.at("to").get<std::string>();
                edge.guard = parse_guard(e.value("guard", std::string("true")), out.decls);
                edge.action = e.value("action", std::string(kTau));
                if (edge.action.empty()) edge.action = kTau;
                edge.resets = e.value("resets", std::vector<std::string>{});
                if (edge.action != kTau && !contains(ta.actions, edge.action)) ta.actions.push_back(edge.action);
                ta.edges.push_back(std::move(edge));
            }
            ta.validate(out.decls);
            out.automata.push_back(std::move(ta));
        }
        if (out.automata.empty()) throw Error(ErrorKind::InvalidModel, "TA file: no automata");
        if (j.contains("rewards"))
            for (const auto& [name, per_action] : j.at("rewards").items())
                out.rewards.emplace_back(name, per_action.get<std::map<std::string, double>>());
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("TA file: ") + e.what());
    }
}

const char* to_string(StateKind kind) {
    switch (kind) {
    case StateKind::Branching:
        return "branching";
    case StateKind::Choice:
        return "choice";
    case StateKind::Singleton:
        return "singleton";
    }
    return "?";
}

std::vector<std::string> StateClassification::of_kind(StateKind kind) const {
    std::vector<std::string> out;
    for (const auto& [s, k] : kinds)
        if (k == kind) out.push_back(s);
    return out;
}

StateClassification classify_states(const TimedAutomaton& ta) {
    StateClassification out;
    for (const auto& s : ta.states) {
        const auto edges = ta.edges_from(s);
        if (edges.size() <= 1) {
            out.kinds[s] = StateKind::Singleton;
            continue;
        }
        bool all_exclusive = true, all_equivalent = true;
        const Edge* bad_a = nullptr;
        const Edge* bad_b = nullptr;
        for (std::size_t i = 0; i < edges.size(); ++i)
            for (std::size_t j = i + 1; j < edges.size(); ++j) {
                const bool ex = mutually_exclusive(edges[i]->guard, edges[j]->guard);
                const bool eq = equivalent(edges[i]->guard, edges[j]->guard);
                all_exclusive = all_exclusive && ex;
                all_equivalent = all_equivalent && eq;
                if (!ex && !eq && !bad_a) {
                    bad_a = edges[i];
                    bad_b = edges[j];
                }
            }
        if (all_exclusive) {
            out.kinds[s] = StateKind::Branching;
        } else if (all_equivalent) {
            out.kinds[s] = StateKind::Choice;
        } else {
            if (!bad_a)
                throw Error(ErrorKind::AssumptionViolated,
                            "state '" + s + "': some guard pairs are mutually exclusive and others equivalent");
            throw Error(ErrorKind::AssumptionViolated,
                        "state '" + s + "': guards of '" + bad_a->action + "' (" + to_string(bad_a->guard) + ") and '" +
                            bad_b->action + "' (" + to_string(bad_b->guard) +
                            ") are neither mutually exclusive nor equivalent");
        }
    }
    return out;
}

} // namespace moqc::ta
