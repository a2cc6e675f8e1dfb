#include "typecheck.hpp"

#include "moqc/error.hpp"

#include <set>

namespace moqc::prism::detail {

namespace {

bool numeric(ValueType t) { return t == ValueType::Int || t == ValueType::Double; }

[[noreturn]] void mismatch(const std::string& context, const std::string& what) {
    throw Error(ErrorKind::TypeMismatch, context + ": " + what);
}

ValueType expect_type(const Expr& e, const TypeEnv& env, const std::string& context, bool want_bool,
                      const std::string& role) {
    const ValueType t = infer_type(e, env, context);
    if (want_bool && t != ValueType::Bool) mismatch(context, role + " must be Boolean, got " + to_string(t));
    if (!want_bool && !numeric(t)) mismatch(context, role + " must be numeric, got " + to_string(t));
    return t;
}

} // namespace

ValueType infer_type(const Expr& e, const TypeEnv& env, const std::string& context) {
    switch (e.op) {
    case ExprOp::IntLit: return ValueType::Int;
    case ExprOp::DoubleLit: return ValueType::Double;
    case ExprOp::BoolLit: return ValueType::Bool;
    case ExprOp::Ident: {
        auto it = env.find(e.name);
        if (it == env.end()) throw Error(ErrorKind::UnknownIdentifier, context + ": '" + e.name + "' is not declared");
        return it->second;
    }
    case ExprOp::Neg: {
        const ValueType t = infer_type(e.args[0], env, context);
        if (!numeric(t)) mismatch(context, "unary minus applied to " + std::string(to_string(t)));
        return t;
    }
    case ExprOp::Not:
        expect_type(e.args[0], env, context, true, "operand of '!'");
        return ValueType::Bool;
    case ExprOp::And:
    case ExprOp::Or:
        expect_type(e.args[0], env, context, true, "operand of '&'/'|'");
        expect_type(e.args[1], env, context, true, "operand of '&'/'|'");
        return ValueType::Bool;
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul: {
        const ValueType a = expect_type(e.args[0], env, context, false, "arithmetic operand");
        const ValueType b = expect_type(e.args[1], env, context, false, "arithmetic operand");
        return a == ValueType::Int && b == ValueType::Int ? ValueType::Int : ValueType::Double;
    }
    case ExprOp::Div:
        expect_type(e.args[0], env, context, false, "arithmetic operand");
        expect_type(e.args[1], env, context, false, "arithmetic operand");
        return ValueType::Double;
    case ExprOp::Eq:
    case ExprOp::Ne: {
        const ValueType a = infer_type(e.args[0], env, context);
        const ValueType b = infer_type(e.args[1], env, context);
        if (numeric(a) != numeric(b)) mismatch(context, "comparison between Boolean and numeric operands");
        return ValueType::Bool;
    }
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge:
        expect_type(e.args[0], env, context, false, "operand of ordering comparison");
        expect_type(e.args[1], env, context, false, "operand of ordering comparison");
        return ValueType::Bool;
    }
    return ValueType::Bool;
}

void typecheck(const ModelSpec& spec) {
    if (spec.model_kind != "mdp") throw Error(ErrorKind::InvalidModel, "only 'mdp' models are supported");

    TypeEnv const_env;
    for (const auto& c : spec.constants) {
        if (!const_env.emplace(c.name, c.type).second)
            throw Error(ErrorKind::InvalidModel, "constant '" + c.name + "' declared twice");
    }
    TypeEnv env = const_env;
    std::map<std::string, std::string> owner;
    std::set<std::string> module_names;
    for (const auto& m : spec.modules) {
        if (!module_names.insert(m.name).second)
            throw Error(ErrorKind::InvalidModel, "module '" + m.name + "' declared twice");
        for (const auto& v : m.variables) {
            if (!env.emplace(v.name, ValueType::Int).second)
                throw Error(ErrorKind::InvalidModel, "name '" + v.name + "' declared twice");
            owner[v.name] = m.name;
        }
    }

    for (const auto& c : spec.constants) {
        if (!c.value) continue;
        const std::string ctx = "constant '" + c.name + "'";
        const ValueType t = infer_type(*c.value, const_env, ctx);
        const bool ok = t == c.type || (c.type == ValueType::Double && t == ValueType::Int);
        if (!ok) mismatch(ctx, std::string("declared ") + to_string(c.type) + " but defined as " + to_string(t));
    }

    for (const auto& m : spec.modules) {
        for (const auto& v : m.variables) {
            const std::string ctx = "variable '" + v.name + "'";
            auto int_only = [&](const Expr& e, const char* role) {
                if (infer_type(e, const_env, ctx) != ValueType::Int) mismatch(ctx, std::string(role) + " must be an int");
            };
            int_only(v.low, "lower bound");
            int_only(v.high, "upper bound");
            if (v.init) int_only(*v.init, "initial value");
        }
        for (std::size_t ci = 0; ci < m.commands.size(); ++ci) {
            const auto& cmd = m.commands[ci];
            const std::string ctx = "module '" + m.name + "', command " + std::to_string(ci + 1);
            expect_type(cmd.guard, env, ctx, true, "guard");
            for (const auto& u : cmd.updates) {
                if (u.probability) expect_type(*u.probability, env, ctx, false, "update probability");
                std::set<std::string> assigned;
                for (const auto& a : u.assignments) {
                    auto it = owner.find(a.variable);
                    if (it == owner.end())
                        throw Error(ErrorKind::UnknownIdentifier, ctx + ": '" + a.variable + "' is not a variable");
                    if (it->second != m.name)
                        throw Error(ErrorKind::InvalidModel,
                                    ctx + ": assignment to '" + a.variable + "' owned by module '" + it->second + "'");
                    if (!assigned.insert(a.variable).second)
                        throw Error(ErrorKind::InvalidModel, ctx + ": '" + a.variable + "' assigned twice");
                    if (infer_type(a.value, env, ctx) != ValueType::Int)
                        mismatch(ctx, "value assigned to '" + a.variable + "' must be an int");
                }
            }
        }
    }

    std::set<std::string> reward_names;
    for (const auto& r : spec.reward_structures) {
        if (!reward_names.insert(r.name).second)
            throw Error(ErrorKind::InvalidModel, "reward structure '" + r.name + "' declared twice");
        for (std::size_t i = 0; i < r.items.size(); ++i) {
            const std::string ctx = "rewards '" + r.name + "', item " + std::to_string(i + 1);
            expect_type(r.items[i].guard, env, ctx, true, "guard");
            expect_type(r.items[i].value, env, ctx, false, "reward value");
        }
    }
}

} // namespace moqc::prism::detail
