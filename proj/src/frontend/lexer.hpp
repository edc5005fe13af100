#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "klrace/ast.hpp"

namespace klrace::detail {

enum class Tok {
    Ident,
    Number,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Less,
    LessEq,
    Greater,
    GreaterEq,
    Assign,     // =
    ColonEq,    // :=
    EqEq,       // ==
    NotEq,      // !=
    Bang,       // !
    AndAnd,     // &&
    OrOr,       // ||
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t number = 0;
    SourceLoc loc;
};

struct SyntaxError : std::runtime_error {
    SourceLoc loc;
    SyntaxError(SourceLoc l, const std::string& msg) : std::runtime_error(msg), loc(l) {}
};

std::vector<Token> tokenize(std::string_view text);

std::string_view token_name(Tok t);

}  // namespace klrace::detail
