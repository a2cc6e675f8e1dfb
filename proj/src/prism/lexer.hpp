#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace moqc::prism::detail {

enum class Tok {
    End,
    Ident,
    Int,
    Double,
    String,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Arrow,
    Prime,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    DotDot,
    // keywords
    KwMdp,
    KwConst,
    KwInt,
    KwDouble,
    KwBool,
    KwModule,
    KwEndModule,
    KwRewards,
    KwEndRewards,
    KwInit,
    KwTrue,
    KwFalse,
};

const char* describe(Tok t);

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

/// Splits PRISM source into tokens; `//` comments run to end of line. Throws SyntaxError
/// on characters outside the supported subset.
std::vector<Token> tokenize(std::string_view source);

} // namespace moqc::prism::detail
