#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace klrace::detail {

std::string_view token_name(Tok t)
{
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Less: return "'<'";
    case Tok::LessEq: return "'<='";
    case Tok::Greater: return "'>'";
    case Tok::GreaterEq: return "'>='";
    case Tok::Assign: return "'='";
    case Tok::ColonEq: return "':='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::End: return "end of input";
    }
    return "?";
}

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto push = [&](Tok kind, std::size_t len) {
        Token t;
        t.kind = kind;
        t.text = std::string(text.substr(i, len));
        t.loc = {line, col};
        out.push_back(std::move(t));
        advance(len);
    };

    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n')
                advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            const SourceLoc start{line, col};
            advance(2);
            while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/'))
                advance(1);
            if (i + 1 >= text.size())
                throw SyntaxError(start, "unterminated comment");
            advance(2);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t n = 1;
            while (i + n < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i + n])) || text[i + n] == '_'))
                ++n;
            push(Tok::Ident, n);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t n = 1;
            while (i + n < text.size() && std::isdigit(static_cast<unsigned char>(text[i + n])))
                ++n;
            Token t;
            t.kind = Tok::Number;
            t.text = std::string(text.substr(i, n));
            t.loc = {line, col};
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
                throw SyntaxError(t.loc, "integer literal out of range: " + t.text);
            out.push_back(std::move(t));
            advance(n);
            continue;
        }
        const char d = i + 1 < text.size() ? text[i + 1] : '\0';
        switch (c) {
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '[': push(Tok::LBracket, 1); continue;
        case ']': push(Tok::RBracket, 1); continue;
        case '{': push(Tok::LBrace, 1); continue;
        case '}': push(Tok::RBrace, 1); continue;
        case ',': push(Tok::Comma, 1); continue;
        case ';': push(Tok::Semi, 1); continue;
        case '+': push(Tok::Plus, 1); continue;
        case '-': push(Tok::Minus, 1); continue;
        case '*': push(Tok::Star, 1); continue;
        case '/': push(Tok::Slash, 1); continue;
        case '%': push(Tok::Percent, 1); continue;
        case '<':
            if (d == '=')
                push(Tok::LessEq, 2);
            else
                push(Tok::Less, 1);
            continue;
        case '>':
            if (d == '=')
                push(Tok::GreaterEq, 2);
            else
                push(Tok::Greater, 1);
            continue;
        case '=':
            if (d == '=')
                push(Tok::EqEq, 2);
            else
                push(Tok::Assign, 1);
            continue;
        case ':':
            if (d == '=') {
                push(Tok::ColonEq, 2);
                continue;
            }
            break;
        case '!':
            if (d == '=')
                push(Tok::NotEq, 2);
            else
                push(Tok::Bang, 1);
            continue;
        case '&':
            if (d == '&') {
                push(Tok::AndAnd, 2);
                continue;
            }
            break;
        case '|':
            if (d == '|') {
                push(Tok::OrOr, 2);
                continue;
            }
            break;
        default:
            break;
        }
        throw SyntaxError({line, col}, std::string("unexpected character '") + c + "'");
    }
    Token end;
    end.kind = Tok::End;
    end.loc = {line, col};
    out.push_back(end);
    return out;
}

}  // namespace klrace::detail
