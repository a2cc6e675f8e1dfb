#include "lexer.hpp"
#include "typecheck.hpp"

#include "moqc/error.hpp"
#include "moqc/prism/prism.hpp"

#include <charconv>
#include <cstdlib>
#include <set>

namespace moqc::prism {

const char* to_string(ValueType type) {
    switch (type) {
    case ValueType::Int: return "int";
    case ValueType::Double: return "double";
    case ValueType::Bool: return "bool";
    }
    return "?";
}

Expr Expr::int_lit(std::int64_t v) {
    Expr e;
    e.op = ExprOp::IntLit;
    e.int_value = v;
    return e;
}

Expr Expr::double_lit(double v) {
    Expr e;
    e.op = ExprOp::DoubleLit;
    e.double_value = v;
    return e;
}

Expr Expr::bool_lit(bool v) {
    Expr e;
    e.op = ExprOp::BoolLit;
    e.bool_value = v;
    return e;
}

Expr Expr::ident(std::string n) {
    Expr e;
    e.op = ExprOp::Ident;
    e.name = std::move(n);
    return e;
}

Expr Expr::unary(ExprOp op, Expr operand) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

Expr Expr::literal(const Value& v) {
    switch (v.type) {
    case ValueType::Int: return int_lit(v.int_value);
    case ValueType::Double: return double_lit(v.double_value);
    case ValueType::Bool: return bool_lit(v.bool_value);
    }
    return bool_lit(false);
}

const ConstantDecl* ModelSpec::find_constant(const std::string& name) const {
    for (const auto& c : constants)
        if (c.name == name) return &c;
    return nullptr;
}

const RewardStructure* ModelSpec::find_rewards(const std::string& name) const {
    for (const auto& r : reward_structures)
        if (r.name == name) return &r;
    return nullptr;
}

Value parse_literal(const std::string& text) {
    if (text == "true") return Value::of_bool(true);
    if (text == "false") return Value::of_bool(false);
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const bool looks_double = text.find_first_of(".eE") != std::string::npos || text.find("inf") != std::string::npos;
    if (!looks_double) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(begin, end, v);
        if (ec == std::errc() && p == end) return Value::of_int(v);
    } else {
        double v = 0.0;
        auto [p, ec] = std::from_chars(begin, end, v);
        if (ec == std::errc() && p == end) return Value::of_double(v);
    }
    throw Error(ErrorKind::SyntaxError, "not a literal: '" + text + "'");
}

namespace {

using detail::Tok;
using detail::Token;

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ModelSpec parse() {
        ModelSpec spec;
        expect(Tok::KwMdp, "model type 'mdp'");
        while (!at(Tok::End)) {
            if (at(Tok::KwConst)) {
                spec.constants.push_back(parse_constant());
            } else if (at(Tok::KwModule)) {
                spec.modules.push_back(parse_module());
            } else if (at(Tok::KwRewards)) {
                spec.reward_structures.push_back(parse_rewards());
            } else {
                fail("'const', 'module' or 'rewards'");
            }
        }
        return spec;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    bool at(Tok t) const { return peek().kind == t; }
    bool accept(Tok t) {
        if (!at(t)) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw Error(ErrorKind::SyntaxError, "line " + std::to_string(t.line) + ", column " + std::to_string(t.column) +
                                                ": expected " + expected + ", found " + found);
    }
    Token expect(Tok t, const std::string& expected) {
        if (!at(t)) fail(expected);
        return toks_[pos_++];
    }
    Token expect(Tok t) { return expect(t, detail::describe(t)); }

    ConstantDecl parse_constant() {
        expect(Tok::KwConst);
        ConstantDecl c;
        if (accept(Tok::KwInt)) {
            c.type = ValueType::Int;
        } else if (accept(Tok::KwDouble)) {
            c.type = ValueType::Double;
        } else if (accept(Tok::KwBool)) {
            c.type = ValueType::Bool;
        } else {
            c.type = ValueType::Int; // PRISM default for untyped constants
        }
        c.name = expect(Tok::Ident, "constant name").text;
        if (accept(Tok::Eq)) c.value = parse_expr();
        expect(Tok::Semi);
        return c;
    }

    ModuleSpec parse_module() {
        expect(Tok::KwModule);
        ModuleSpec m;
        m.name = expect(Tok::Ident, "module name").text;
        while (!at(Tok::KwEndModule)) {
            if (at(Tok::Ident)) {
                m.variables.push_back(parse_variable());
            } else if (at(Tok::LBracket)) {
                m.commands.push_back(parse_command());
            } else {
                fail("variable declaration, command or 'endmodule'");
            }
        }
        expect(Tok::KwEndModule);
        return m;
    }

    VariableDecl parse_variable() {
        VariableDecl v;
        v.name = expect(Tok::Ident).text;
        expect(Tok::Colon);
        expect(Tok::LBracket, "'[' (only bounded integer variables are supported)");
        v.low = parse_expr();
        expect(Tok::DotDot);
        v.high = parse_expr();
        expect(Tok::RBracket);
        if (accept(Tok::KwInit)) v.init = parse_expr();
        expect(Tok::Semi);
        return v;
    }

    std::string parse_action() {
        expect(Tok::LBracket);
        std::string action;
        if (at(Tok::Ident)) action = expect(Tok::Ident).text;
        expect(Tok::RBracket, "']'");
        return action;
    }

    Command parse_command() {
        Command c;
        c.action = parse_action();
        c.guard = parse_expr();
        expect(Tok::Arrow);
        c.updates.push_back(parse_update());
        while (accept(Tok::Plus)) c.updates.push_back(parse_update());
        expect(Tok::Semi);
        return c;
    }

    bool at_assignments() const {
        if (at(Tok::KwTrue)) {
            const Tok next = peek(1).kind;
            return next == Tok::Semi || next == Tok::Plus;
        }
        return at(Tok::LParen) && peek(1).kind == Tok::Ident && peek(2).kind == Tok::Prime;
    }

    std::vector<Assignment> parse_assignments() {
        std::vector<Assignment> out;
        if (accept(Tok::KwTrue)) return out;
        do {
            expect(Tok::LParen);
            Assignment a;
            a.variable = expect(Tok::Ident, "variable name").text;
            expect(Tok::Prime);
            expect(Tok::Eq);
            a.value = parse_expr();
            expect(Tok::RParen);
            out.push_back(std::move(a));
        } while (accept(Tok::And));
        return out;
    }

    Update parse_update() {
        Update u;
        if (!at_assignments()) {
            u.probability = parse_expr();
            expect(Tok::Colon, "':' after update probability");
        }
        u.assignments = parse_assignments();
        return u;
    }

    RewardStructure parse_rewards() {
        expect(Tok::KwRewards);
        RewardStructure r;
        r.name = expect(Tok::String, "reward structure name in quotes").text;
        while (!accept(Tok::KwEndRewards)) {
            RewardItem item;
            if (at(Tok::LBracket)) item.action = parse_action();
            item.guard = parse_expr();
            expect(Tok::Colon);
            item.value = parse_expr();
            expect(Tok::Semi);
            r.items.push_back(std::move(item));
        }
        return r;
    }

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (accept(Tok::Or)) lhs = Expr::binary(ExprOp::Or, std::move(lhs), parse_and());
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (accept(Tok::And)) lhs = Expr::binary(ExprOp::And, std::move(lhs), parse_not());
        return lhs;
    }

    Expr parse_not() {
        if (accept(Tok::Not)) return Expr::unary(ExprOp::Not, parse_not());
        return parse_relation();
    }

    Expr parse_relation() {
        Expr lhs = parse_additive();
        ExprOp op;
        switch (peek().kind) {
        case Tok::Eq: op = ExprOp::Eq; break;
        case Tok::Ne: op = ExprOp::Ne; break;
        case Tok::Lt: op = ExprOp::Lt; break;
        case Tok::Le: op = ExprOp::Le; break;
        case Tok::Gt: op = ExprOp::Gt; break;
        case Tok::Ge: op = ExprOp::Ge; break;
        default: return lhs;
        }
        ++pos_;
        return Expr::binary(op, std::move(lhs), parse_additive());
    }

    Expr parse_additive() {
        Expr lhs = parse_multiplicative();
        for (;;) {
            if (accept(Tok::Plus)) {
                lhs = Expr::binary(ExprOp::Add, std::move(lhs), parse_multiplicative());
            } else if (at(Tok::Minus)) {
                ++pos_;
                lhs = Expr::binary(ExprOp::Sub, std::move(lhs), parse_multiplicative());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_multiplicative() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept(Tok::Star)) {
                lhs = Expr::binary(ExprOp::Mul, std::move(lhs), parse_unary());
            } else if (accept(Tok::Slash)) {
                lhs = Expr::binary(ExprOp::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept(Tok::Minus)) return Expr::unary(ExprOp::Neg, parse_unary());
        return parse_primary();
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            ++pos_;
            const Value v = parse_literal(t.text);
            if (v.type != ValueType::Int) fail("integer literal in range");
            return Expr::int_lit(v.int_value);
        }
        case Tok::Double: ++pos_; return Expr::double_lit(parse_literal(t.text).double_value);
        case Tok::KwTrue: ++pos_; return Expr::bool_lit(true);
        case Tok::KwFalse: ++pos_; return Expr::bool_lit(false);
        case Tok::Ident: ++pos_; return Expr::ident(t.text);
        case Tok::LParen: {
            ++pos_;
            Expr inner = parse_expr();
            expect(Tok::RParen);
            return inner;
        }
        default: fail("expression");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

ModelSpec parse_model(std::string_view source) {
    Parser parser(detail::tokenize(source));
    ModelSpec spec = parser.parse();
    detail::typecheck(spec);
    return spec;
}

} // namespace moqc::prism
