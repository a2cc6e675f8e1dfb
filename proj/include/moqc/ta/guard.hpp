#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace moqc::ta {

enum class CmpOp { Lt, Le, Eq, Ge, Gt };

const char* to_string(CmpOp op);

/// Guard over Boolean variables and clock-vs-constant comparisons.
struct Guard {
    enum class Kind { True, False, Bool, ClockCmp, Not, And, Or };

    Kind kind = Kind::True;
    std::string name;        // Bool: variable, ClockCmp: clock
    CmpOp op = CmpOp::Lt;    // ClockCmp
    double constant = 0.0;   // ClockCmp
    std::vector<Guard> args; // Not (one), And / Or (two or more)

    static Guard truth() { return {}; }
    static Guard falsity();
    static Guard boolean(std::string var);
    static Guard compare(std::string clock, CmpOp op, double constant);
    static Guard negation(Guard g);
    /// Flattens nested conjunctions and drops `true` operands.
    static Guard conjunction(const Guard& a, const Guard& b);
    static Guard disjunction(const Guard& a, const Guard& b);

    bool operator==(const Guard&) const = default;
};

struct Declarations {
    std::vector<std::string> clocks;
    std::vector<std::string> booleans;
    /// Named nonnegative constants usable on the constant side of comparisons.
    std::map<std::string, double> constants;

    bool is_clock(const std::string& name) const;
    bool is_boolean(const std::string& name) const;
};

/// Surface syntax: true, false, identifiers, !, &&, ||, parentheses and comparisons
/// (<, <=, =, ==, >=, >) between a clock and a number or constant. Comparing two
/// clocks throws UnsupportedGuardAtom; unknown names throw UnknownIdentifier.
Guard parse_guard(std::string_view text, const Declarations& decls);

std::string to_string(const Guard& g);

/// Clock names and Boolean names referenced by the guard.
void collect_names(const Guard& g, std::set<std::string>& clocks, std::set<std::string>& booleans);

/// Truth value under a valuation; missing names default to 0 / false.
bool evaluate(const Guard& g, const std::map<std::string, double>& clocks, const std::map<std::string, bool>& booleans);

/// Decided symbolically: negation normal form, DNF expansion, then a consistency check
/// per conjunct (Boolean literal clash, or an empty interval for some clock, with clocks
/// ranging over [0, inf)).
bool satisfiable(const Guard& g);
bool mutually_exclusive(const Guard& a, const Guard& b);
bool equivalent(const Guard& a, const Guard& b);

} // namespace moqc::ta
