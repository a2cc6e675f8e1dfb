#include "lexer.hpp"

#include "moqc/error.hpp"

#include <cctype>
#include <unordered_map>

namespace moqc::prism::detail {

const char* describe(Tok t) {
    switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer literal";
    case Tok::Double: return "double literal";
    case Tok::String: return "string literal";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Arrow: return "'->'";
    case Tok::Prime: return "'''";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::Not: return "'!'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::DotDot: return "'..'";
    case Tok::KwMdp: return "'mdp'";
    case Tok::KwConst: return "'const'";
    case Tok::KwInt: return "'int'";
    case Tok::KwDouble: return "'double'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwModule: return "'module'";
    case Tok::KwEndModule: return "'endmodule'";
    case Tok::KwRewards: return "'rewards'";
    case Tok::KwEndRewards: return "'endrewards'";
    case Tok::KwInit: return "'init'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    }
    return "token";
}

namespace {

const std::unordered_map<std::string_view, Tok>& keywords() {
    static const std::unordered_map<std::string_view, Tok> table{
        {"mdp", Tok::KwMdp},         {"const", Tok::KwConst},         {"int", Tok::KwInt},
        {"double", Tok::KwDouble},   {"bool", Tok::KwBool},           {"module", Tok::KwModule},
        {"endmodule", Tok::KwEndModule}, {"rewards", Tok::KwRewards}, {"endrewards", Tok::KwEndRewards},
        {"init", Tok::KwInit},       {"true", Tok::KwTrue},           {"false", Tok::KwFalse},
    };
    return table;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::SyntaxError,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
    };

    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        const std::size_t start = i;

        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            tok.text = std::string(src.substr(i, j - i));
            auto kw = keywords().find(tok.text);
            tok.kind = kw == keywords().end() ? Tok::Ident : kw->second;
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
            std::size_t j = i;
            bool is_double = false;
            while (j < src.size() && digit(src[j])) ++j;
            // "0..4" is a range, not the literal "0."
            if (j < src.size() && src[j] == '.' && !(j + 1 < src.size() && src[j + 1] == '.')) {
                is_double = true;
                ++j;
                while (j < src.size() && digit(src[j])) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && digit(src[k])) {
                    is_double = true;
                    j = k;
                    while (j < src.size() && digit(src[j])) ++j;
                }
            }
            tok.kind = is_double ? Tok::Double : Tok::Int;
            tok.text = std::string(src.substr(start, j - start));
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != '"') fail("unterminated string literal");
            tok.kind = Tok::String;
            tok.text = std::string(src.substr(i + 1, j - i - 1));
            advance(j + 1 - i);
            out.push_back(std::move(tok));
            continue;
        }

        auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
        std::size_t len = 1;
        if (two('-', '>')) {
            tok.kind = Tok::Arrow;
            len = 2;
        } else if (two('!', '=')) {
            tok.kind = Tok::Ne;
            len = 2;
        } else if (two('<', '=')) {
            tok.kind = Tok::Le;
            len = 2;
        } else if (two('>', '=')) {
            tok.kind = Tok::Ge;
            len = 2;
        } else if (two('.', '.')) {
            tok.kind = Tok::DotDot;
            len = 2;
        } else {
            switch (c) {
            case '[': tok.kind = Tok::LBracket; break;
            case ']': tok.kind = Tok::RBracket; break;
            case '(': tok.kind = Tok::LParen; break;
            case ')': tok.kind = Tok::RParen; break;
            case ';': tok.kind = Tok::Semi; break;
            case ':': tok.kind = Tok::Colon; break;
            case ',': tok.kind = Tok::Comma; break;
            case '\'': tok.kind = Tok::Prime; break;
            case '=': tok.kind = Tok::Eq; break;
            case '<': tok.kind = Tok::Lt; break;
            case '>': tok.kind = Tok::Gt; break;
            case '&': tok.kind = Tok::And; break;
            case '|': tok.kind = Tok::Or; break;
            case '!': tok.kind = Tok::Not; break;
            case '+': tok.kind = Tok::Plus; break;
            case '-': tok.kind = Tok::Minus; break;
            case '*': tok.kind = Tok::Star; break;
            case '/': tok.kind = Tok::Slash; break;
            default: fail(std::string("unexpected character '") + c + "'");
            }
        }
        tok.text = std::string(src.substr(i, len));
        advance(len);
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

} // namespace moqc::prism::detail
