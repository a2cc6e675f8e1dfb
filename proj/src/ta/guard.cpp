#include "moqc/ta/guard.hpp"

#include "moqc/error.hpp"
#include "moqc/mdp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>

namespace moqc::ta {

const char* to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Lt:
        return "<";
    case CmpOp::Le:
        return "<=";
    case CmpOp::Eq:
        return "=";
    case CmpOp::Ge:
        return ">=";
    case CmpOp::Gt:
        return ">";
    }
    return "?";
}

Guard Guard::falsity() {
    Guard g;
    g.kind = Kind::False;
    return g;
}

Guard Guard::boolean(std::string var) {
    Guard g;
    g.kind = Kind::Bool;
    g.name = std::move(var);
    return g;
}

Guard Guard::compare(std::string clock, CmpOp op, double constant) {
    Guard g;
    g.kind = Kind::ClockCmp;
    g.name = std::move(clock);
    g.op = op;
    g.constant = constant;
    return g;
}

Guard Guard::negation(Guard inner) {
    Guard g;
    g.kind = Kind::Not;
    g.args.push_back(std::move(inner));
    return g;
}

namespace {

Guard junction(Guard::Kind kind, const Guard& a, const Guard& b) {
    const Guard::Kind unit = kind == Guard::Kind::And ? Guard::Kind::True : Guard::Kind::False;
    if (a.kind == unit) return b;
    if (b.kind == unit) return a;
    Guard g;
    g.kind = kind;
    for (const Guard* x : {&a, &b}) {
        if (x->kind == kind) {
            g.args.insert(g.args.end(), x->args.begin(), x->args.end());
        } else {
            g.args.push_back(*x);
        }
    }
    return g;
}

} // namespace

Guard Guard::conjunction(const Guard& a, const Guard& b) { return junction(Kind::And, a, b); }
Guard Guard::disjunction(const Guard& a, const Guard& b) { return junction(Kind::Or, a, b); }

bool Declarations::is_clock(const std::string& name) const {
    return std::find(clocks.begin(), clocks.end(), name) != clocks.end();
}

bool Declarations::is_boolean(const std::string& name) const {
    return std::find(booleans.begin(), booleans.end(), name) != booleans.end();
}

namespace {

// ---- parsing ----

class GuardParser {
public:
    GuardParser(std::string_view text, const Declarations& decls) : text_(text), decls_(decls) {}

    Guard parse() {
        Guard g = parse_or();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return g;
    }

private:
    struct Operand {
        std::string ident;  // empty for numbers
        double number = 0.0;
    };

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::SyntaxError, "guard '" + std::string(text_) + "': " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view token) {
        skip_space();
        if (text_.substr(pos_, token.size()) != token) return false;
        pos_ += token.size();
        return true;
    }

    Guard parse_or() {
        Guard g = parse_and();
        while (accept("||")) g = Guard::disjunction(g, parse_and());
        return g;
    }

    Guard parse_and() {
        Guard g = parse_unary();
        while (accept("&&")) g = Guard::conjunction(g, parse_unary());
        return g;
    }

    Guard parse_unary() {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '!' && text_.substr(pos_, 2) != "!=") {
            ++pos_;
            return Guard::negation(parse_unary());
        }
        return parse_atom();
    }

    Guard parse_atom() {
        if (accept("(")) {
            Guard g = parse_or();
            if (!accept(")")) fail("expected ')'");
            return g;
        }
        const Operand lhs = parse_operand();
        const auto op = parse_cmp();
        if (!op) {
            if (lhs.ident == "true") return Guard::truth();
            if (lhs.ident == "false") return Guard::falsity();
            if (lhs.ident.empty()) fail("a number is not a guard");
            if (decls_.is_boolean(lhs.ident)) return Guard::boolean(lhs.ident);
            if (decls_.is_clock(lhs.ident))
                throw Error(ErrorKind::TypeMismatch, "guard '" + std::string(text_) + "': clock '" + lhs.ident +
                                                         "' used as a condition");
            unknown(lhs.ident);
        }
        const Operand rhs = parse_operand();
        const bool lclock = decls_.is_clock(lhs.ident), rclock = decls_.is_clock(rhs.ident);
        if (lclock && rclock)
            throw Error(ErrorKind::UnsupportedGuardAtom,
                        "guard '" + std::string(text_) +
                            "': clock-vs-clock comparisons are not supported; compare clocks with constants");
        if (lclock) return Guard::compare(lhs.ident, *op, constant(rhs));
        if (rclock) return Guard::compare(rhs.ident, mirror(*op), constant(lhs));
        // Constant against constant folds to a truth value.
        const double a = constant(lhs), b = constant(rhs);
        const bool v = *op == CmpOp::Lt ? a < b : *op == CmpOp::Le ? a <= b : *op == CmpOp::Eq ? a == b
                     : *op == CmpOp::Ge ? a >= b : a > b;
        return v ? Guard::truth() : Guard::falsity();
    }

    std::optional<CmpOp> parse_cmp() {
        if (accept("<=")) return CmpOp::Le;
        if (accept(">=")) return CmpOp::Ge;
        if (accept("==")) return CmpOp::Eq;
        if (accept("<")) return CmpOp::Lt;
        if (accept(">")) return CmpOp::Gt;
        if (accept("=")) return CmpOp::Eq;
        return std::nullopt;
    }

    static CmpOp mirror(CmpOp op) {
        switch (op) {
        case CmpOp::Lt:
            return CmpOp::Gt;
        case CmpOp::Le:
            return CmpOp::Ge;
        case CmpOp::Ge:
            return CmpOp::Le;
        case CmpOp::Gt:
            return CmpOp::Lt;
        default:
            return op;
        }
    }

    Operand parse_operand() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end");
        const char c = text_[pos_];
        Operand out;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            out.ident = std::string(text_.substr(start, pos_ - start));
            return out;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string rest(text_.substr(pos_));
            std::size_t used = 0;
            try {
                out.number = std::stod(rest, &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            return out;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    double constant(const Operand& o) const {
        if (o.ident.empty()) return o.number;
        if (auto it = decls_.constants.find(o.ident); it != decls_.constants.end()) return it->second;
        if (decls_.is_boolean(o.ident))
            throw Error(ErrorKind::UnsupportedGuardAtom,
                        "guard '" + std::string(text_) + "': Boolean '" + o.ident + "' cannot be compared");
        unknown(o.ident);
    }

    [[noreturn]] void unknown(const std::string& name) const {
        throw Error(ErrorKind::UnknownIdentifier, "guard '" + std::string(text_) + "': unknown name '" + name + "'");
    }

    std::string_view text_;
    const Declarations& decls_;
    std::size_t pos_ = 0;
};

// ---- symbolic reasoning ----

struct Literal {
    bool is_clock = false;
    std::string name;
    bool positive = true;  // Bool literals
    CmpOp op = CmpOp::Lt;  // clock literals
    double constant = 0.0;
};

using Conjunct = std::vector<Literal>;
using Dnf = std::vector<Conjunct>;

Dnf dnf_of(const Guard& g, bool negated);

Dnf dnf_and(const Dnf& a, const Dnf& b) {
    Dnf out;
    for (const auto& x : a)
        for (const auto& y : b) {
            Conjunct c = x;
            c.insert(c.end(), y.begin(), y.end());
            out.push_back(std::move(c));
        }
    return out;
}

Dnf dnf_of(const Guard& g, bool negated) {
    using K = Guard::Kind;
    switch (g.kind) {
    case K::True:
        return negated ? Dnf{} : Dnf{Conjunct{}};
    case K::False:
        return negated ? Dnf{Conjunct{}} : Dnf{};
    case K::Bool:
        return Dnf{Conjunct{Literal{false, g.name, !negated, CmpOp::Lt, 0.0}}};
    case K::ClockCmp: {
        if (!negated) return Dnf{Conjunct{Literal{true, g.name, true, g.op, g.constant}}};
        auto lit = [&](CmpOp op) { return Literal{true, g.name, true, op, g.constant}; };
        switch (g.op) {
        case CmpOp::Lt:
            return Dnf{Conjunct{lit(CmpOp::Ge)}};
        case CmpOp::Le:
            return Dnf{Conjunct{lit(CmpOp::Gt)}};
        case CmpOp::Ge:
            return Dnf{Conjunct{lit(CmpOp::Lt)}};
        case CmpOp::Gt:
            return Dnf{Conjunct{lit(CmpOp::Le)}};
        case CmpOp::Eq:
            return Dnf{Conjunct{lit(CmpOp::Lt)}, Conjunct{lit(CmpOp::Gt)}};
        }
        return {};
    }
    case K::Not:
        return dnf_of(g.args.front(), !negated);
    case K::And:
    case K::Or: {
        // De Morgan: a negated conjunction is a disjunction of negations and vice versa.
        const bool conj = (g.kind == K::And) != negated;
        if (conj) {
            Dnf acc{Conjunct{}};
            for (const auto& a : g.args) acc = dnf_and(acc, dnf_of(a, negated));
            return acc;
        }
        Dnf acc;
        for (const auto& a : g.args) {
            Dnf d = dnf_of(a, negated);
            acc.insert(acc.end(), d.begin(), d.end());
        }
        return acc;
    }
    }
    return {};
}

struct Interval {
    double lo = 0.0;
    bool lo_open = false;
    double hi = std::numeric_limits<double>::infinity();
    bool hi_open = true;

    void raise(double v, bool open) {
        if (v > lo || (v == lo && open)) {
            lo = v;
            lo_open = open;
        }
    }
    void lower(double v, bool open) {
        if (v < hi || (v == hi && open)) {
            hi = v;
            hi_open = open;
        }
    }
    bool empty() const { return lo > hi || (lo == hi && (lo_open || hi_open)); }
};

bool consistent(const Conjunct& c) {
    std::map<std::string, bool> bools;
    std::map<std::string, Interval> clocks;
    for (const auto& l : c) {
        if (!l.is_clock) {
            auto [it, fresh] = bools.emplace(l.name, l.positive);
            if (!fresh && it->second != l.positive) return false;
            continue;
        }
        Interval& iv = clocks[l.name];
        switch (l.op) {
        case CmpOp::Lt:
            iv.lower(l.constant, true);
            break;
        case CmpOp::Le:
            iv.lower(l.constant, false);
            break;
        case CmpOp::Eq:
            iv.lower(l.constant, false);
            iv.raise(l.constant, false);
            break;
        case CmpOp::Ge:
            iv.raise(l.constant, false);
            break;
        case CmpOp::Gt:
            iv.raise(l.constant, true);
            break;
        }
        if (iv.empty()) return false;
    }
    return true;
}

bool precedence_needs_parens(const Guard& child, Guard::Kind parent) {
    using K = Guard::Kind;
    if (child.kind == K::Or) return parent != K::Or;
    if (child.kind == K::And) return parent == K::Not;
    return false;
}

} // namespace

Guard parse_guard(std::string_view text, const Declarations& decls) { return GuardParser(text, decls).parse(); }

std::string to_string(const Guard& g) {
    using K = Guard::Kind;
    auto sub = [&](const Guard& c) {
        const std::string s = to_string(c);
        return precedence_needs_parens(c, g.kind) ? "(" + s + ")" : s;
    };
    switch (g.kind) {
    case K::True:
        return "true";
    case K::False:
        return "false";
    case K::Bool:
        return g.name;
    case K::ClockCmp:
        return g.name + " " + to_string(g.op) + " " + format_double(g.constant);
    case K::Not:
        return "!" + (g.args.front().kind == K::And || g.args.front().kind == K::Or ||
                              g.args.front().kind == K::ClockCmp
                          ? "(" + to_string(g.args.front()) + ")"
                          : to_string(g.args.front()));
    case K::And:
    case K::Or: {
        std::string out;
        for (const auto& a : g.args) out += (out.empty() ? "" : g.kind == K::And ? " && " : " || ") + sub(a);
        return out;
    }
    }
    return "?";
}

void collect_names(const Guard& g, std::set<std::string>& clocks, std::set<std::string>& booleans) {
    if (g.kind == Guard::Kind::Bool) booleans.insert(g.name);
    if (g.kind == Guard::Kind::ClockCmp) clocks.insert(g.name);
    for (const auto& a : g.args) collect_names(a, clocks, booleans);
}

bool evaluate(const Guard& g, const std::map<std::string, double>& clocks, const std::map<std::string, bool>& booleans) {
    using K = Guard::Kind;
    switch (g.kind) {
    case K::True:
        return true;
    case K::False:
        return false;
    case K::Bool: {
        const auto it = booleans.find(g.name);
        return it != booleans.end() && it->second;
    }
    case K::ClockCmp: {
        const auto it = clocks.find(g.name);
        const double v = it == clocks.end() ? 0.0 : it->second;
        switch (g.op) {
        case CmpOp::Lt:
            return v < g.constant;
        case CmpOp::Le:
            return v <= g.constant;
        case CmpOp::Eq:
            return v == g.constant;
        case CmpOp::Ge:
            return v >= g.constant;
        case CmpOp::Gt:
            return v > g.constant;
        }
        return false;
    }
    case K::Not:
        return !evaluate(g.args.front(), clocks, booleans);
    case K::And:
        return std::all_of(g.args.begin(), g.args.end(), [&](const Guard& a) { return evaluate(a, clocks, booleans); });
    case K::Or:
        return std::any_of(g.args.begin(), g.args.end(), [&](const Guard& a) { return evaluate(a, clocks, booleans); });
    }
    return false;
}

bool satisfiable(const Guard& g) {
    const Dnf d = dnf_of(g, false);
    return std::any_of(d.begin(), d.end(), consistent);
}

bool mutually_exclusive(const Guard& a, const Guard& b) { return !satisfiable(Guard::conjunction(a, b)); }

bool equivalent(const Guard& a, const Guard& b) {
    return !satisfiable(Guard::conjunction(a, Guard::negation(b))) &&
           !satisfiable(Guard::conjunction(Guard::negation(a), b));
}

} // namespace moqc::ta
