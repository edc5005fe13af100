#include <algorithm>
#include <set>

#include "klrace/frontend.hpp"
#include "lexer.hpp"

namespace klrace {

namespace {

using detail::SyntaxError;
using detail::Tok;
using detail::Token;

const std::set<std::string, std::less<>> kKeywords = {
    "kernel", "int", "shared", "private", "if", "then", "else", "while", "do",
    "barrier", "assume", "assert", "tid", "size", "cos", "sqrt", "true", "false",
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ParseResult run()
    {
        ParseResult result;
        try {
            parse_file();
        } catch (const SyntaxError& e) {
            diags_.push_back({Diagnostic::Severity::Error, e.loc, e.what()});
        }
        const bool failed = std::any_of(diags_.begin(), diags_.end(), [](const Diagnostic& d) {
            return d.severity == Diagnostic::Severity::Error;
        });
        if (!failed) {
            auto cfg_diags = build_cfg(kernel_);
            diags_.insert(diags_.end(), cfg_diags.begin(), cfg_diags.end());
            const bool cfg_failed = std::any_of(cfg_diags.begin(), cfg_diags.end(), [](const Diagnostic& d) {
                return d.severity == Diagnostic::Severity::Error;
            });
            if (!cfg_failed)
                result.kernel = std::move(kernel_);
        }
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Kernel kernel_;
    std::vector<Diagnostic> diags_;
    std::set<std::string, std::less<>> declared_;
    StmtList pending_;
    int temp_counter_ = 0;

    const Token& peek(std::size_t ahead = 0) const
    {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }
    Token take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    Token expect(Tok k, std::string_view what = {})
    {
        if (!at(k)) {
            std::string msg = "expected ";
            msg += what.empty() ? detail::token_name(k) : what;
            msg += ", found ";
            msg += peek().kind == Tok::End ? std::string("end of input") : "'" + peek().text + "'";
            throw SyntaxError(peek().loc, msg);
        }
        return take();
    }

    void expect_word(std::string_view w)
    {
        if (!at_word(w))
            throw SyntaxError(peek().loc, "expected '" + std::string(w) + "'");
        take();
    }

    std::string expect_name()
    {
        Token t = expect(Tok::Ident, "identifier");
        if (kKeywords.count(t.text))
            throw SyntaxError(t.loc, "unexpected keyword '" + t.text + "'");
        return t.text;
    }

    void error(SourceLoc loc, std::string msg)
    {
        diags_.push_back({Diagnostic::Severity::Error, loc, std::move(msg)});
    }

    void declare(const std::string& name, SourceLoc loc)
    {
        if (!declared_.insert(name).second)
            error(loc, "redeclaration of " + name);
    }

    std::string fresh_temp()
    {
        std::string name;
        do {
            name = "__t" + std::to_string(++temp_counter_);
        } while (declared_.count(name));
        declared_.insert(name);
        kernel_.locals.push_back(name);
        kernel_.temps.push_back(name);
        return name;
    }

    void parse_file()
    {
        while (at_word("shared")) {
            const SourceLoc loc = take().loc;
            expect_word("int");
            std::string name = expect_name();
            if (at(Tok::LBracket))
                throw SyntaxError(peek().loc, "file-level arrays are not supported; pass arrays as kernel parameters");
            declare(name, loc);
            kernel_.globals.push_back(name);
            while (at(Tok::Semi))
                take();
        }
        expect_word("kernel");
        if (at(Tok::Ident))
            kernel_.name = expect_name();
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            parse_param();
            while (at(Tok::Comma)) {
                take();
                parse_param();
            }
        }
        expect(Tok::RParen);
        expect(Tok::LBrace);
        kernel_.body = parse_stmts();
        expect(Tok::RBrace);
        while (at(Tok::Semi))
            take();
        expect(Tok::End);
        std::stable_partition(kernel_.locals.begin(), kernel_.locals.end(), [&](const std::string& n) {
            return std::find(kernel_.temps.begin(), kernel_.temps.end(), n) == kernel_.temps.end();
        });
    }

    void parse_param()
    {
        const SourceLoc loc = peek().loc;
        std::optional<bool> qualifier;
        if (at_word("shared")) {
            take();
            qualifier = true;
        } else if (at_word("private")) {
            take();
            qualifier = false;
        }
        expect_word("int");
        Param p;
        p.name = expect_name();
        if (at(Tok::LBracket)) {
            take();
            expect(Tok::RBracket);
            p.is_array = true;
            if (qualifier && !*qualifier)
                error(loc, "private arrays are not supported: " + p.name);
            p.shared = true;
        } else {
            p.shared = qualifier.value_or(false);
        }
        declare(p.name, loc);
        kernel_.params.push_back(std::move(p));
    }

    StmtList parse_stmts()
    {
        StmtList out;
        while (!at(Tok::RBrace) && !at(Tok::End)) {
            if (at(Tok::Semi)) {
                take();
                continue;
            }
            parse_stmt(out);
        }
        return out;
    }

    StmtList parse_body()
    {
        if (at(Tok::LBrace)) {
            take();
            StmtList body = parse_stmts();
            expect(Tok::RBrace);
            return body;
        }
        StmtList body;
        parse_stmt(body);
        return body;
    }

    void flush_pending(StmtList& out)
    {
        for (auto& s : pending_)
            out.push_back(std::move(s));
        pending_.clear();
    }

    static Stmt basic(Command c)
    {
        Stmt s;
        s.kind = Stmt::Kind::Basic;
        s.loc = c.loc;
        s.command = std::move(c);
        return s;
    }

    void parse_stmt(StmtList& out)
    {
        const SourceLoc loc = peek().loc;
        if (at(Tok::LBrace)) {
            take();
            StmtList inner = parse_stmts();
            expect(Tok::RBrace);
            for (auto& s : inner)
                out.push_back(std::move(s));
            return;
        }
        if (at_word("int")) {
            take();
            do {
                if (at(Tok::Comma))
                    take();
                const SourceLoc vloc = peek().loc;
                std::string name = expect_name();
                if (at(Tok::LBracket))
                    throw SyntaxError(peek().loc, "local arrays are not supported: " + name);
                declare(name, vloc);
                kernel_.locals.push_back(name);
                if (at(Tok::Assign) || at(Tok::ColonEq)) {
                    take();
                    finish_assignment(out, name, vloc);
                }
            } while (at(Tok::Comma));
            end_stmt();
            return;
        }
        if (at_word("barrier")) {
            take();
            if (at(Tok::LParen)) {
                take();
                expect(Tok::RParen);
            }
            out.push_back(basic(Command::barrier(loc)));
            end_stmt();
            return;
        }
        if (at_word("assume") || at_word("assert")) {
            const bool is_assume = take().text == "assume";
            expect(Tok::LParen);
            BoolPtr b = parse_bool();
            expect(Tok::RParen);
            flush_pending(out);
            out.push_back(basic(is_assume ? Command::assume(b, loc) : Command::assert_(b, loc)));
            end_stmt();
            return;
        }
        if (at_word("if")) {
            take();
            Stmt s;
            s.kind = Stmt::Kind::If;
            s.loc = loc;
            s.cond = parse_bool();
            flush_pending(out);
            if (at_word("then"))
                take();
            s.then_body = parse_body();
            while (at(Tok::Semi) && peek(1).kind == Tok::Ident && peek(1).text == "else")
                take();
            if (at_word("else")) {
                take();
                s.else_body = parse_body();
            }
            out.push_back(std::move(s));
            return;
        }
        if (at_word("while")) {
            take();
            Stmt s;
            s.kind = Stmt::Kind::While;
            s.loc = loc;
            s.cond = parse_bool();
            flush_pending(s.loads);
            if (at_word("do"))
                take();
            s.then_body = parse_body();
            out.push_back(std::move(s));
            return;
        }

        // Assignment: v = e, v = a[e], a[e] = e.
        const SourceLoc tloc = peek().loc;
        if (at_word("tid"))
            throw SyntaxError(tloc, "cannot assign to tid");
        std::string name = expect_name();
        const auto kind = kernel_.kind_of(name);
        if (!declared_.count(name))
            error(tloc, "undeclared variable " + name);
        if (at(Tok::LBracket)) {
            take();
            if (declared_.count(name) && kind != VarKind::SharedArray)
                error(tloc, "indexing scalar " + name);
            ExprPtr idx = parse_expr();
            expect(Tok::RBracket);
            if (!at(Tok::Assign) && !at(Tok::ColonEq))
                throw SyntaxError(peek().loc, "expected '=' in assignment");
            take();
            ExprPtr value = parse_expr();
            flush_pending(out);
            out.push_back(basic(Command::store(name, idx, value, tloc)));
            end_stmt();
            return;
        }
        if (kind == VarKind::SharedArray)
            error(tloc, "assignment to array " + name + " without index");
        if (!at(Tok::Assign) && !at(Tok::ColonEq))
            throw SyntaxError(peek().loc, "expected '=' in assignment");
        take();
        finish_assignment(out, name, tloc);
        end_stmt();
    }

    void end_stmt()
    {
        if (at(Tok::Semi))
            take();
    }

    // Parses the right-hand side of `name = ...`; a bare array read becomes a
    // direct load into `name`.
    void finish_assignment(StmtList& out, const std::string& name, SourceLoc loc)
    {
        const int temps_before = temp_counter_;
        const std::size_t pending_before = pending_.size();
        ExprPtr value = parse_expr();
        if (value->kind == Expr::Kind::Var && pending_.size() == pending_before + 1 &&
            temp_counter_ == temps_before + 1 && pending_.back().command.target == value->name) {
            Command ld = pending_.back().command;
            pending_.pop_back();
            declared_.erase(ld.target);
            kernel_.locals.pop_back();
            kernel_.temps.pop_back();
            --temp_counter_;
            ld.target = name;
            ld.loc = loc;
            flush_pending(out);
            out.push_back(basic(std::move(ld)));
            return;
        }
        flush_pending(out);
        out.push_back(basic(Command::assign(name, value, loc)));
    }

    // ---- boolean expressions -------------------------------------------------

    BoolPtr parse_bool()
    {
        BoolPtr b = parse_band();
        while (at(Tok::OrOr)) {
            take();
            BoolPtr r = parse_band();
            b = BoolExpr::negate(BoolExpr::conj(BoolExpr::negate(b), BoolExpr::negate(r)));
        }
        return b;
    }

    BoolPtr parse_band()
    {
        BoolPtr b = parse_bnot();
        while (at(Tok::AndAnd)) {
            take();
            b = BoolExpr::conj(b, parse_bnot());
        }
        return b;
    }

    BoolPtr parse_bnot()
    {
        if (at(Tok::Bang)) {
            take();
            return BoolExpr::negate(parse_bnot());
        }
        if (at_word("true")) {
            take();
            return BoolExpr::equal(Expr::constant(0), Expr::constant(0));
        }
        if (at_word("false")) {
            take();
            return BoolExpr::less(Expr::constant(0), Expr::constant(0));
        }
        if (at(Tok::LParen)) {
            // Either a parenthesized condition or the start of an arithmetic
            // comparison such as (a + b) < c.
            const std::size_t save = pos_;
            const std::size_t pending_save = pending_.size();
            const int temps_save = temp_counter_;
            const std::size_t locals_save = kernel_.locals.size();
            const std::size_t diags_save = diags_.size();
            try {
                take();
                BoolPtr inner = parse_bool();
                expect(Tok::RParen);
                if (!is_comparison(peek().kind) && !is_arith(peek().kind))
                    return inner;
            } catch (const SyntaxError&) {
            }
            pos_ = save;
            pending_.resize(pending_save);
            while (kernel_.locals.size() > locals_save) {
                declared_.erase(kernel_.locals.back());
                kernel_.locals.pop_back();
                kernel_.temps.pop_back();
            }
            temp_counter_ = temps_save;
            diags_.resize(diags_save);
        }
        return parse_comparison();
    }

    static bool is_comparison(Tok k)
    {
        return k == Tok::Less || k == Tok::LessEq || k == Tok::Greater || k == Tok::GreaterEq ||
               k == Tok::Assign || k == Tok::EqEq || k == Tok::NotEq;
    }

    static bool is_arith(Tok k)
    {
        return k == Tok::Plus || k == Tok::Minus || k == Tok::Star || k == Tok::Slash || k == Tok::Percent;
    }

    BoolPtr parse_comparison()
    {
        ExprPtr a = parse_expr();
        if (!is_comparison(peek().kind))
            throw SyntaxError(peek().loc, "expected comparison operator");
        const Tok op = take().kind;
        ExprPtr b = parse_expr();
        switch (op) {
        case Tok::Less: return BoolExpr::less(a, b);
        case Tok::Greater: return BoolExpr::less(b, a);
        case Tok::LessEq: return BoolExpr::negate(BoolExpr::less(b, a));
        case Tok::GreaterEq: return BoolExpr::negate(BoolExpr::less(a, b));
        case Tok::NotEq: return BoolExpr::negate(BoolExpr::equal(a, b));
        default: return BoolExpr::equal(a, b);
        }
    }

    // ---- arithmetic expressions ----------------------------------------------

    ExprPtr parse_expr()
    {
        ExprPtr e = parse_term();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const OpKind op = take().kind == Tok::Plus ? OpKind::Add : OpKind::Sub;
            e = Expr::make_op(op, {e, parse_term()});
        }
        return e;
    }

    ExprPtr parse_term()
    {
        ExprPtr e = parse_unary();
        while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
            const Tok t = take().kind;
            const OpKind op = t == Tok::Star ? OpKind::Mul : t == Tok::Slash ? OpKind::Div : OpKind::Mod;
            e = Expr::make_op(op, {e, parse_unary()});
        }
        return e;
    }

    ExprPtr parse_unary()
    {
        if (at(Tok::Minus)) {
            take();
            return Expr::make_op(OpKind::Neg, {parse_unary()});
        }
        return parse_primary();
    }

    ExprPtr parse_primary()
    {
        const Token& t = peek();
        if (t.kind == Tok::Number)
            return Expr::constant(take().number);
        if (t.kind == Tok::LParen) {
            take();
            ExprPtr e = parse_expr();
            expect(Tok::RParen);
            return e;
        }
        if (t.kind != Tok::Ident)
            throw SyntaxError(t.loc, "expected expression, found " +
                                         (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
        if (t.text == "tid") {
            take();
            return Expr::tid();
        }
        if (t.text == "size") {
            take();
            expect(Tok::LParen);
            const SourceLoc loc = peek().loc;
            std::string name = expect_name();
            expect(Tok::RParen);
            if (!declared_.count(name))
                error(loc, "undeclared variable " + name);
            else if (!kernel_.is_array(name))
                error(loc, "size() applied to scalar " + name);
            return Expr::size(name);
        }
        if (t.text == "cos" || t.text == "sqrt") {
            const OpKind op = take().text == "cos" ? OpKind::Cos : OpKind::Sqrt;
            expect(Tok::LParen);
            ExprPtr e = parse_expr();
            expect(Tok::RParen);
            return Expr::make_op(op, {e});
        }
        const SourceLoc loc = t.loc;
        std::string name = expect_name();
        const bool known = declared_.count(name) > 0;
        if (!known)
            error(loc, "undeclared variable " + name);
        if (at(Tok::LBracket)) {
            take();
            ExprPtr idx = parse_expr();
            expect(Tok::RBracket);
            if (known && !kernel_.is_array(name))
                error(loc, "indexing scalar " + name);
            std::string tmp = fresh_temp();
            pending_.push_back(basic(Command::load(tmp, name, idx, loc)));
            return Expr::var(tmp);
        }
        if (known && kernel_.is_array(name))
            error(loc, "array " + name + " used as a scalar");
        return Expr::var(name);
    }
};

}  // namespace

ParseResult parse_kernel(std::string_view text)
{
    std::vector<Token> toks;
    try {
        toks = detail::tokenize(text);
    } catch (const SyntaxError& e) {
        ParseResult r;
        r.diagnostics.push_back({Diagnostic::Severity::Error, e.loc, e.what()});
        return r;
    }
    return Parser(std::move(toks)).run();
}

}  // namespace klrace
