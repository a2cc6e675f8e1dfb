#include "moqc/error.hpp"
#include "moqc/prism/prism.hpp"

#include <set>

namespace moqc::prism {

namespace {

using ValueMap = std::map<std::string, Value>;

Value literal_value(const Expr& e) {
    switch (e.op) {
    case ExprOp::IntLit: return Value::of_int(e.int_value);
    case ExprOp::DoubleLit: return Value::of_double(e.double_value);
    default: return Value::of_bool(e.bool_value);
    }
}

Value apply_op(ExprOp op, const std::vector<Value>& a) {
    auto both_int = [&] { return a[0].type == ValueType::Int && a[1].type == ValueType::Int; };
    switch (op) {
    case ExprOp::Neg:
        return a[0].type == ValueType::Int ? Value::of_int(-a[0].int_value) : Value::of_double(-a[0].double_value);
    case ExprOp::Not: return Value::of_bool(!a[0].bool_value);
    case ExprOp::Add:
        return both_int() ? Value::of_int(a[0].int_value + a[1].int_value) : Value::of_double(a[0].as_double() + a[1].as_double());
    case ExprOp::Sub:
        return both_int() ? Value::of_int(a[0].int_value - a[1].int_value) : Value::of_double(a[0].as_double() - a[1].as_double());
    case ExprOp::Mul:
        return both_int() ? Value::of_int(a[0].int_value * a[1].int_value) : Value::of_double(a[0].as_double() * a[1].as_double());
    case ExprOp::Div: return Value::of_double(a[0].as_double() / a[1].as_double());
    case ExprOp::Eq:
    case ExprOp::Ne: {
        bool eq = a[0].type == ValueType::Bool ? a[0].bool_value == a[1].bool_value : a[0].as_double() == a[1].as_double();
        return Value::of_bool(op == ExprOp::Eq ? eq : !eq);
    }
    case ExprOp::Lt: return Value::of_bool(a[0].as_double() < a[1].as_double());
    case ExprOp::Le: return Value::of_bool(a[0].as_double() <= a[1].as_double());
    case ExprOp::Gt: return Value::of_bool(a[0].as_double() > a[1].as_double());
    case ExprOp::Ge: return Value::of_bool(a[0].as_double() >= a[1].as_double());
    case ExprOp::And: return Value::of_bool(a[0].bool_value && a[1].bool_value);
    case ExprOp::Or: return Value::of_bool(a[0].bool_value || a[1].bool_value);
    default: return Value::of_bool(false);
    }
}

/// Substitutes known constants and folds every literal-only subtree.
Expr fold(const Expr& e, const ValueMap& values) {
    if (e.op == ExprOp::Ident) {
        auto it = values.find(e.name);
        return it == values.end() ? e : Expr::literal(it->second);
    }
    if (e.is_literal()) return e;
    Expr out = e;
    bool all_literal = true;
    for (auto& arg : out.args) {
        arg = fold(arg, values);
        all_literal = all_literal && arg.is_literal();
    }
    if (!all_literal) return out;
    std::vector<Value> args;
    for (const auto& arg : out.args) args.push_back(literal_value(arg));
    return Expr::literal(apply_op(e.op, args));
}

void collect_identifiers(const Expr& e, std::set<std::string>& out) {
    if (e.op == ExprOp::Ident) out.insert(e.name);
    for (const auto& a : e.args) collect_identifiers(a, out);
}

Value coerce(const ConstantDecl& c, const Value& v) {
    if (v.type == c.type) return v;
    if (c.type == ValueType::Double && v.type == ValueType::Int) return Value::of_double(static_cast<double>(v.int_value));
    throw Error(ErrorKind::TypeMismatch, "constant '" + c.name + "' is " + to_string(c.type) + " but was given a " +
                                             to_string(v.type) + " value");
}

ModelSpec resolve_impl(const ModelSpec& spec, const ConstantOverrides& overrides, const ConstantOverrides& forced) {
    for (const auto& [name, v] : overrides) {
        const ConstantDecl* c = spec.find_constant(name);
        if (!c) throw Error(ErrorKind::UnknownIdentifier, "override for undeclared constant '" + name + "'");
        if (c->value && !forced.count(name))
            throw Error(ErrorKind::ConstantRedefinition,
                        "constant '" + name + "' already has a value in the model and cannot be overridden");
    }
    for (const auto& [name, v] : forced) {
        if (!spec.find_constant(name))
            throw Error(ErrorKind::UnknownParameter, "'" + name + "' is not a constant of the model");
    }

    std::vector<std::string> missing;
    for (const auto& c : spec.constants)
        if (!c.value && !overrides.count(c.name) && !forced.count(c.name)) missing.push_back(c.name);
    if (!missing.empty()) {
        std::string list;
        for (const auto& n : missing) list += (list.empty() ? "" : ", ") + n;
        throw Error(ErrorKind::MissingConstant, "no value for constant(s): " + list);
    }

    // Constants may refer to each other in any order; fold to a fixpoint.
    ValueMap values;
    for (const auto& c : spec.constants) {
        if (auto f = forced.find(c.name); f != forced.end()) {
            values[c.name] = coerce(c, f->second);
        } else if (auto o = overrides.find(c.name); o != overrides.end()) {
            values[c.name] = coerce(c, o->second);
        }
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& c : spec.constants) {
            if (values.count(c.name) || !c.value) continue;
            Expr folded = fold(*c.value, values);
            if (folded.is_literal()) {
                values[c.name] = coerce(c, literal_value(folded));
                progress = true;
            }
        }
    }
    for (const auto& c : spec.constants) {
        if (!values.count(c.name))
            throw Error(ErrorKind::InvalidModel, "constant '" + c.name + "' has a circular definition");
    }

    std::set<std::string> probability_constants;
    for (const auto& m : spec.modules)
        for (const auto& cmd : m.commands)
            for (const auto& u : cmd.updates)
                if (u.probability) collect_identifiers(*u.probability, probability_constants);
    for (const auto& name : probability_constants) {
        const ConstantDecl* c = spec.find_constant(name);
        if (!c || c->type != ValueType::Double) continue;
        const double v = values[name].double_value;
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorKind::ProbabilityOutOfRange,
                        "probability constant '" + name + "' = " + std::to_string(v) + " is outside [0,1]");
    }

    ModelSpec out = spec;
    for (auto& c : out.constants) c.value = Expr::literal(values[c.name]);
    for (auto& m : out.modules) {
        for (auto& v : m.variables) {
            v.low = fold(v.low, values);
            v.high = fold(v.high, values);
            if (v.init) v.init = fold(*v.init, values);
        }
        for (auto& cmd : m.commands) {
            cmd.guard = fold(cmd.guard, values);
            for (auto& u : cmd.updates) {
                if (u.probability) u.probability = fold(*u.probability, values);
                for (auto& a : u.assignments) a.value = fold(a.value, values);
            }
        }
    }
    for (auto& r : out.reward_structures) {
        for (auto& item : r.items) {
            item.guard = fold(item.guard, values);
            item.value = fold(item.value, values);
        }
    }
    return out;
}

} // namespace

ModelSpec resolve_constants(const ModelSpec& spec, const ConstantOverrides& overrides) {
    return resolve_impl(spec, overrides, {});
}

ModelSpec resolve_constants_forced(const ModelSpec& spec, const ConstantOverrides& overrides,
                                   const ConstantOverrides& forced) {
    return resolve_impl(spec, overrides, forced);
}

std::pair<std::string, Value> parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw Error(ErrorKind::InvalidArgument, "expected NAME=VALUE, got '" + text + "'");
    return {text.substr(0, eq), parse_literal(text.substr(eq + 1))};
}

} // namespace moqc::prism
