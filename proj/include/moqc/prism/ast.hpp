#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace moqc::prism {

enum class ValueType { Int, Double, Bool };

const char* to_string(ValueType type);

/// A typed scalar produced by constant folding or expression evaluation.
struct Value {
    ValueType type = ValueType::Int;
    std::int64_t int_value = 0;
    double double_value = 0.0;
    bool bool_value = false;

    static Value of_int(std::int64_t v) { return {ValueType::Int, v, static_cast<double>(v), false}; }
    static Value of_double(double v) { return {ValueType::Double, 0, v, false}; }
    static Value of_bool(bool v) { return {ValueType::Bool, 0, 0.0, v}; }

    double as_double() const { return type == ValueType::Int ? static_cast<double>(int_value) : double_value; }
    bool operator==(const Value&) const = default;
};

/// Parses "3", "-2", "0.25", "1e-3", "true", "false".
Value parse_literal(const std::string& text);

enum class ExprOp {
    IntLit,
    DoubleLit,
    BoolLit,
    Ident,
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
};

struct Expr {
    ExprOp op = ExprOp::BoolLit;
    std::int64_t int_value = 0;
    double double_value = 0.0;
    bool bool_value = true;
    std::string name;
    std::vector<Expr> args;

    static Expr int_lit(std::int64_t v);
    static Expr double_lit(double v);
    static Expr bool_lit(bool v);
    static Expr ident(std::string n);
    static Expr unary(ExprOp op, Expr operand);
    static Expr binary(ExprOp op, Expr lhs, Expr rhs);
    static Expr literal(const Value& v);

    bool is_literal() const { return op == ExprOp::IntLit || op == ExprOp::DoubleLit || op == ExprOp::BoolLit; }
    bool operator==(const Expr&) const = default;
};

struct ConstantDecl {
    std::string name;
    ValueType type = ValueType::Int;
    std::optional<Expr> value;
    bool operator==(const ConstantDecl&) const = default;
};

struct VariableDecl {
    std::string name;
    Expr low;
    Expr high;
    std::optional<Expr> init;
    bool operator==(const VariableDecl&) const = default;
};

struct Assignment {
    std::string variable;
    Expr value;
    bool operator==(const Assignment&) const = default;
};

/// One probabilistic branch of a command. A missing probability means 1.
struct Update {
    std::optional<Expr> probability;
    std::vector<Assignment> assignments;
    bool operator==(const Update&) const = default;
};

struct Command {
    std::string action; // empty: unlabeled
    Expr guard;
    std::vector<Update> updates;
    bool operator==(const Command&) const = default;
};

struct ModuleSpec {
    std::string name;
    std::vector<VariableDecl> variables;
    std::vector<Command> commands;
    bool operator==(const ModuleSpec&) const = default;
};

/// `guard : value;` when action is empty-optional, `[label] guard : value;` otherwise.
/// An action of "" (written `[]`) matches unlabeled choices.
struct RewardItem {
    std::optional<std::string> action;
    Expr guard;
    Expr value;
    bool operator==(const RewardItem&) const = default;
};

struct RewardStructure {
    std::string name;
    std::vector<RewardItem> items;
    bool operator==(const RewardStructure&) const = default;
};

struct ModelSpec {
    std::string model_kind = "mdp";
    std::vector<ConstantDecl> constants;
    std::vector<ModuleSpec> modules;
    std::vector<RewardStructure> reward_structures;

    const ConstantDecl* find_constant(const std::string& name) const;
    const RewardStructure* find_rewards(const std::string& name) const;
    bool operator==(const ModelSpec&) const = default;
};

} // namespace moqc::prism
