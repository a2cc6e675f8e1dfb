#include "moqc/prism/prism.hpp"

#include <cstdio>
#include <sstream>

namespace moqc::prism {

namespace {

const char* op_text(ExprOp op) {
    switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    case ExprOp::Eq: return "=";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::And: return "&";
    case ExprOp::Or: return "|";
    default: return "?";
    }
}

std::string double_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void print_expr(std::ostream& out, const Expr& e);

void print_operand(std::ostream& out, const Expr& e) {
    const bool atomic = e.op == ExprOp::Ident || (e.is_literal() && !(e.op == ExprOp::IntLit && e.int_value < 0) &&
                                                  !(e.op == ExprOp::DoubleLit && e.double_value < 0));
    if (atomic) {
        print_expr(out, e);
    } else {
        out << '(';
        print_expr(out, e);
        out << ')';
    }
}

void print_expr(std::ostream& out, const Expr& e) {
    switch (e.op) {
    case ExprOp::IntLit: out << e.int_value; break;
    case ExprOp::DoubleLit: out << double_text(e.double_value); break;
    case ExprOp::BoolLit: out << (e.bool_value ? "true" : "false"); break;
    case ExprOp::Ident: out << e.name; break;
    case ExprOp::Neg:
        out << '-';
        print_operand(out, e.args[0]);
        break;
    case ExprOp::Not:
        out << '!';
        print_operand(out, e.args[0]);
        break;
    default:
        print_operand(out, e.args[0]);
        out << ' ' << op_text(e.op) << ' ';
        print_operand(out, e.args[1]);
        break;
    }
}

std::string expr_text(const Expr& e) {
    std::ostringstream out;
    print_expr(out, e);
    return out.str();
}

} // namespace

std::string print_model(const ModelSpec& spec) {
    std::ostringstream out;
    out << spec.model_kind << "\n";
    if (!spec.constants.empty()) out << "\n";
    for (const auto& c : spec.constants) {
        out << "const " << to_string(c.type) << ' ' << c.name;
        if (c.value) out << " = " << expr_text(*c.value);
        out << ";\n";
    }
    for (const auto& m : spec.modules) {
        out << "\nmodule " << m.name << "\n";
        for (const auto& v : m.variables) {
            out << "  " << v.name << " : [" << expr_text(v.low) << ".." << expr_text(v.high) << "]";
            if (v.init) out << " init " << expr_text(*v.init);
            out << ";\n";
        }
        for (const auto& cmd : m.commands) {
            out << "  [" << cmd.action << "] " << expr_text(cmd.guard) << " -> ";
            for (std::size_t u = 0; u < cmd.updates.size(); ++u) {
                const auto& up = cmd.updates[u];
                if (u) out << " + ";
                if (up.probability) {
                    print_operand(out, *up.probability);
                    out << " : ";
                }
                if (up.assignments.empty()) out << "true";
                for (std::size_t a = 0; a < up.assignments.size(); ++a) {
                    if (a) out << " & ";
                    out << '(' << up.assignments[a].variable << "'=" << expr_text(up.assignments[a].value) << ')';
                }
            }
            out << ";\n";
        }
        out << "endmodule\n";
    }
    for (const auto& r : spec.reward_structures) {
        out << "\nrewards \"" << r.name << "\"\n";
        for (const auto& item : r.items) {
            out << "  ";
            if (item.action) out << '[' << *item.action << "] ";
            out << expr_text(item.guard) << " : " << expr_text(item.value) << ";\n";
        }
        out << "endrewards\n";
    }
    return out.str();
}

} // namespace moqc::prism
