#include <cctype>
#include <charconv>

#include "klrace/symheap.hpp"

namespace klrace::sym {

namespace {

struct Tok {
    enum Kind { Name, Number, Punct, End } kind = End;
    std::string text;
    Value number = 0;
    std::size_t pos = 0;
};

std::vector<Tok> lex(std::string_view s)
{
    static const char* multi[] = {"|->", "::", "!=", "<=", ":=", ">="};
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Tok t;
        t.pos = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            std::size_t j = i + 1;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'' ||
                                    s[j] == '@' || s[j] == '#' || s[j] == '$'))
                ++j;
            t.kind = Tok::Name;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
                ++j;
            t.kind = Tok::Number;
            t.text = std::string(s.substr(i, j - i));
            auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, t.number);
            if (ec != std::errc())
                throw FormulaError("number out of range at " + std::to_string(i));
            i = j;
        } else {
            t.kind = Tok::Punct;
            bool matched = false;
            for (const char* m : multi) {
                const std::string_view mv(m);
                if (s.substr(i, mv.size()) == mv) {
                    t.text = std::string(mv);
                    i += mv.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("()[]{},;.&*+-/%=<|").find(c) == std::string_view::npos)
                    throw FormulaError("unexpected character '" + std::string(1, c) + "' at " + std::to_string(i));
                t.text = std::string(1, c);
                ++i;
            }
        }
        out.push_back(std::move(t));
    }
    Tok end;
    end.pos = s.size();
    out.push_back(end);
    return out;
}

class Parser {
public:
    Parser(std::string_view text, const FormulaContext& ctx) : toks_(lex(text)), ctx_(ctx) {}

    SymbolicHeap heap()
    {
        SymbolicHeap h;
        h.pure = pure();
        expect("::");
        if (accept_name("emp")) {
        } else {
            h.spatial.push_back(cell());
            while (accept("*"))
                h.spatial.push_back(cell());
        }
        if (accept("[")) {
            do {
                auto n = name();
                expect(":=");
                h.scalar_writes[n] = sym();
            } while (accept(","));
            expect("]");
        }
        return h;
    }

    Pure pure()
    {
        Pure p;
        if (accept_name("true"))
            return p;
        p.push_back(atom());
        while (accept("&"))
            p.push_back(atom());
        return p;
    }

    FunPtr fun()
    {
        if (accept_name("lambda")) {
            auto v = name();
            expect(".");
            scope_.push_back(v);
            auto body = sym();
            scope_.pop_back();
            return FunctionExpr::lambda(v, body);
        }
        if (accept_name("eta")) {
            expect("(");
            auto v = name();
            expect(".");
            scope_.push_back(v);
            auto cond = pure();
            scope_.pop_back();
            expect(";");
            auto t = fun();
            expect(";");
            auto e = fun();
            expect(")");
            return FunctionExpr::eta(v, std::move(cond), t, e);
        }
        if (accept_name("collective")) {
            expect("(");
            auto v = name();
            expect(",");
            auto w = name();
            expect("<");
            auto count = sym();
            expect(".");
            std::vector<CollectiveMember> members;
            scope_.push_back(v);
            scope_.push_back(w);
            do {
                expect("{");
                CollectiveMember m;
                m.context = pure();
                expect(";");
                m.writes.push_back(pure());
                while (accept("|"))
                    m.writes.push_back(pure());
                expect(";");
                m.chain = fun();
                expect("}");
                members.push_back(std::move(m));
            } while (accept(","));
            scope_.pop_back();
            scope_.pop_back();
            expect(";");
            auto base = fun();
            expect(")");
            return FunctionExpr::collective(v, w, count, std::move(members), base);
        }
        if (accept("(")) {
            auto f = fun();
            expect(")");
            return f;
        }
        auto n = name();
        return FunctionExpr::named(n, ctx_.rigid.count(n) > 0);
    }

    SymPtr sym()
    {
        auto e = term();
        for (;;) {
            if (accept("+"))
                e = e + term();
            else if (accept("-"))
                e = e - term();
            else
                return e;
        }
    }

    void done()
    {
        if (peek().kind != Tok::End)
            fail("trailing input");
    }

private:
    std::vector<Tok> toks_;
    std::size_t at_ = 0;
    const FormulaContext& ctx_;
    std::vector<std::string> scope_;
    bool no_star_ = false;

    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& what) const
    {
        const Tok& t = peek();
        throw FormulaError(what + " at offset " + std::to_string(t.pos) +
                           (t.kind == Tok::End ? " (end of input)" : " near '" + t.text + "'"));
    }

    bool accept(std::string_view p)
    {
        if (peek().kind == Tok::Punct && peek().text == p) {
            ++at_;
            return true;
        }
        return false;
    }

    bool accept_name(std::string_view n)
    {
        if (peek().kind == Tok::Name && peek().text == n) {
            ++at_;
            return true;
        }
        return false;
    }

    void expect(std::string_view p)
    {
        if (!accept(p))
            fail("expected '" + std::string(p) + "'");
    }

    std::string name()
    {
        if (peek().kind != Tok::Name)
            fail("expected a name");
        return toks_[at_++].text;
    }

    Atom atom()
    {
        if (accept_name("fun")) {
            auto n = name();
            expect("=");
            auto f = fun();
            return Atom::def(n, f, ctx_.rigid.count(n) > 0);
        }
        auto l = sym();
        if (accept("="))
            return Atom::eq(l, sym());
        if (accept("!="))
            return Atom::ne(l, sym());
        if (accept("<="))
            return Atom::le(l, sym());
        if (accept("<"))
            return Atom::lt(l, sym());
        if (accept(">="))
            return Atom::le(sym(), l);
        fail("expected a comparison");
    }

    Cell cell()
    {
        // `a |-> A[lo, hi | F]`, `a |-> F` (whole array) or `e |-> e'`.
        if (peek().kind == Tok::Name && peek(1).kind == Tok::Punct && peek(1).text == "|->") {
            const std::string a = peek().text;
            if (peek(2).kind == Tok::Name && peek(2).text == "A" && peek(3).text == "[") {
                at_ += 4;
                auto lo = sym();
                expect(",");
                auto hi = sym();
                expect("|");
                auto f = fun();
                expect("]");
                return Cell::segment(a, lo, hi, f);
            }
            if (peek(2).kind == Tok::Name &&
                (peek(2).text == "lambda" || peek(2).text == "eta" || peek(2).text == "collective")) {
                at_ += 2;
                return Cell::whole(a, fun());
            }
        }
        // Unparenthesized `*` separates cells here.
        no_star_ = true;
        auto addr = sym();
        expect("|->");
        auto value = sym();
        no_star_ = false;
        return Cell::points_to(addr, value);
    }

    SymPtr term()
    {
        auto e = unary();
        for (;;) {
            if (!no_star_ && accept("*"))
                e = e * unary();
            else if (accept("/"))
                e = SymExpr::make_op(OpKind::Div, {e, unary()});
            else if (accept("%"))
                e = SymExpr::make_op(OpKind::Mod, {e, unary()});
            else
                return e;
        }
    }

    SymPtr unary()
    {
        if (accept("-")) {
            if (peek().kind == Tok::Number) {
                const Value v = toks_[at_++].number;
                return SymExpr::constant(-v);
            }
            return SymExpr::make_op(OpKind::Neg, {unary()});
        }
        return primary();
    }

    SymPtr primary()
    {
        if (peek().kind == Tok::Number)
            return SymExpr::constant(toks_[at_++].number);
        if (accept("(")) {
            const bool outer = no_star_;
            no_star_ = false;
            auto e = sym();
            no_star_ = outer;
            expect(")");
            return e;
        }
        if (accept("[")) {
            auto f = fun();
            expect("]");
            expect("(");
            auto i = sym();
            expect(")");
            return SymExpr::app(f, i);
        }
        const std::string n = name();
        if (n == "tid")
            return SymExpr::tid();
        if (accept("(")) {
            if (n == "size") {
                auto a = name();
                expect(")");
                return SymExpr::size(a);
            }
            auto arg = sym();
            expect(")");
            if (n == "cos")
                return SymExpr::make_op(OpKind::Cos, {arg});
            if (n == "sqrt")
                return SymExpr::make_op(OpKind::Sqrt, {arg});
            return SymExpr::app(FunctionExpr::named(n, ctx_.rigid.count(n) > 0), arg);
        }
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (*it == n)
                return SymExpr::bound(n);
        const bool rigid = ctx_.rigid.count(n) > 0;
        if (rigid || n.find('\'') != std::string::npos)
            return SymExpr::logic(n, rigid);
        std::string base = n.substr(0, n.find('@'));
        return SymExpr::var(n, ctx_.shared.count(n) > 0 || ctx_.shared.count(base) > 0);
    }
};

}  // namespace

SymPtr parse_sym(std::string_view text, const FormulaContext& ctx)
{
    Parser p(text, ctx);
    auto e = p.sym();
    p.done();
    return e;
}

FunPtr parse_fun(std::string_view text, const FormulaContext& ctx)
{
    Parser p(text, ctx);
    auto f = p.fun();
    p.done();
    return f;
}

Pure parse_pure(std::string_view text, const FormulaContext& ctx)
{
    Parser p(text, ctx);
    auto r = p.pure();
    p.done();
    return r;
}

SymbolicHeap parse_heap(std::string_view text, const FormulaContext& ctx)
{
    Parser p(text, ctx);
    auto h = p.heap();
    p.done();
    return h;
}

}  // namespace klrace::sym
