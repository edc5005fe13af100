#include <functional>

#include "klrace/symheap.hpp"

namespace klrace::sym {

namespace {

// Rewrites leaves and function-symbol names bottom-up, sharing untouched
// subtrees.
struct Mapper {
    std::function<SymPtr(const SymPtr&)> leaf;           // null result keeps the leaf
    std::function<std::string(const std::string&, bool)> fname;  // (name, rigid) -> name

    SymPtr expr(const SymPtr& e) const
    {
        switch (e->kind) {
        case SymExpr::Kind::Op: {
            bool changed = false;
            std::vector<SymPtr> args;
            for (const auto& a : e->args) {
                args.push_back(expr(a));
                changed |= args.back() != a;
            }
            return changed ? SymExpr::make_op(e->op, std::move(args)) : e;
        }
        case SymExpr::Kind::App: {
            auto f = fun(e->fun);
            auto i = expr(e->args[0]);
            return (f == e->fun && i == e->args[0]) ? e : SymExpr::app(f, i);
        }
        default: {
            auto r = leaf(e);
            return r ? r : e;
        }
        }
    }

    Pure pure(const Pure& p) const
    {
        Pure out;
        out.reserve(p.size());
        for (const auto& a : p)
            out.push_back(atom(a));
        return out;
    }

    Atom atom(const Atom& a) const
    {
        Atom out = a;
        if (a.kind == Atom::Kind::Def) {
            out.name = fname(a.name, a.rigid);
            out.fun = fun(a.fun);
        } else {
            out.lhs = expr(a.lhs);
            out.rhs = expr(a.rhs);
        }
        return out;
    }

    FunPtr fun(const FunPtr& f) const
    {
        switch (f->kind) {
        case FunctionExpr::Kind::Named: {
            auto n = fname(f->name, f->rigid);
            return n == f->name ? f : FunctionExpr::named(n, f->rigid);
        }
        case FunctionExpr::Kind::Lambda: {
            auto b = expr(f->body);
            return b == f->body ? f : FunctionExpr::lambda(f->var, b);
        }
        case FunctionExpr::Kind::Eta:
            return FunctionExpr::eta(f->var, pure(f->cond), fun(f->then_f), fun(f->else_f));
        case FunctionExpr::Kind::Collective: {
            std::vector<CollectiveMember> members;
            for (const auto& m : f->members) {
                CollectiveMember n;
                n.context = pure(m.context);
                for (const auto& w : m.writes)
                    n.writes.push_back(pure(w));
                n.chain = fun(m.chain);
                members.push_back(std::move(n));
            }
            return FunctionExpr::collective(f->var, f->writer, expr(f->count), std::move(members), fun(f->else_f));
        }
        }
        return f;
    }

    SymbolicHeap heap(const SymbolicHeap& h) const
    {
        SymbolicHeap out;
        out.pure = pure(h.pure);
        for (const auto& c : h.spatial) {
            Cell n = c;
            if (c.kind == Cell::Kind::PointsTo) {
                n.addr = expr(c.addr);
                n.value = expr(c.value);
            } else {
                n.lo = expr(c.lo);
                n.hi = expr(c.hi);
                n.contents = fun(c.contents);
            }
            out.spatial.push_back(std::move(n));
        }
        for (const auto& [name, v] : h.scalar_writes)
            out.scalar_writes[name] = expr(v);
        return out;
    }
};

bool tagged(const std::string& name) { return name.find('@') != std::string::npos; }

Mapper renamer(const SymPtr& i, const std::set<std::string>& per_thread)
{
    const std::string tag = "@" + thread_tag(*i);
    auto add = [tag](const std::string& n) { return tagged(n) ? n : n + tag; };
    Mapper m;
    m.leaf = [i, add, &per_thread](const SymPtr& e) -> SymPtr {
        switch (e->kind) {
        case SymExpr::Kind::Tid: return i;
        case SymExpr::Kind::Var:
            if (!e->flag || per_thread.count(e->name))
                return tagged(e->name) ? nullptr : SymExpr::var(add(e->name), e->flag);
            return nullptr;
        case SymExpr::Kind::Logic:
            if (!e->flag && !tagged(e->name))
                return SymExpr::logic(add(e->name), false);
            return nullptr;
        default: return nullptr;
        }
    };
    m.fname = [add](const std::string& n, bool rigid) { return rigid ? n : add(n); };
    return m;
}

Mapper retagger(std::string_view from, std::string_view to)
{
    const std::string f = "@" + std::string(from), t = "@" + std::string(to);
    auto swap = [f, t](const std::string& n) {
        if (n.size() >= f.size() && n.compare(n.size() - f.size(), f.size(), f) == 0)
            return n.substr(0, n.size() - f.size()) + t;
        return n;
    };
    Mapper m;
    m.leaf = [swap](const SymPtr& e) -> SymPtr {
        if (e->kind != SymExpr::Kind::Var && e->kind != SymExpr::Kind::Logic)
            return nullptr;
        auto n = swap(e->name);
        if (n == e->name)
            return nullptr;
        return e->kind == SymExpr::Kind::Var ? SymExpr::var(n, e->flag) : SymExpr::logic(n, e->flag);
    };
    m.fname = [swap](const std::string& n, bool) { return swap(n); };
    return m;
}

}  // namespace

std::string thread_tag(const SymExpr& i)
{
    switch (i.kind) {
    case SymExpr::Kind::Const: return std::to_string(i.value);
    case SymExpr::Kind::Logic:
    case SymExpr::Kind::Var:
    case SymExpr::Kind::Bound: return i.name;
    default: return to_string(i);
    }
}

SymbolicHeap rename(const SymPtr& i, const SymbolicHeap& h, const std::set<std::string>& per_thread)
{
    return renamer(i, per_thread).heap(h);
}

SymPtr rename(const SymPtr& i, const SymPtr& e, const std::set<std::string>& per_thread)
{
    return renamer(i, per_thread).expr(e);
}

Pure rename(const SymPtr& i, const Pure& p, const std::set<std::string>& per_thread)
{
    return renamer(i, per_thread).pure(p);
}

FunPtr rename(const SymPtr& i, const FunPtr& f, const std::set<std::string>& per_thread)
{
    return renamer(i, per_thread).fun(f);
}

SymPtr retag(const SymPtr& e, std::string_view from, std::string_view to) { return retagger(from, to).expr(e); }
Pure retag(const Pure& p, std::string_view from, std::string_view to) { return retagger(from, to).pure(p); }
FunPtr retag(const FunPtr& f, std::string_view from, std::string_view to) { return retagger(from, to).fun(f); }

}  // namespace klrace::sym
