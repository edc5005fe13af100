#include <algorithm>

#include "klrace/symheap.hpp"

namespace klrace::sym {

namespace {

std::optional<Value> fold(OpKind op, const std::vector<SymPtr>& args)
{
    Model empty;
    try {
        auto e = SymExpr::make_op(op, args);
        return eval(*e, empty);
    } catch (const EvalError&) {
        return std::nullopt;
    }
}

bool is_const(const SymPtr& e, Value v) { return e->kind == SymExpr::Kind::Const && e->value == v; }

// Decides an atom syntactically: nullopt when it depends on the model.
std::optional<bool> decide(const Atom& a)
{
    if (a.kind == Atom::Kind::Def)
        return std::nullopt;
    if (a.lhs->is_const() && a.rhs->is_const()) {
        switch (a.kind) {
        case Atom::Kind::Eq: return a.lhs->value == a.rhs->value;
        case Atom::Kind::Ne: return a.lhs->value != a.rhs->value;
        case Atom::Kind::Le: return a.lhs->value <= a.rhs->value;
        default: break;
        }
    }
    if (equal(*a.lhs, *a.rhs))
        return a.kind != Atom::Kind::Ne;
    return std::nullopt;
}

// Simplified condition; nullopt when some atom is false.
std::optional<Pure> simplify_cond(const Pure& p)
{
    Pure out;
    for (const auto& a : p) {
        Atom s = a;
        if (a.kind == Atom::Kind::Def) {
            s.fun = simplify(a.fun);
        } else {
            s.lhs = simplify(a.lhs);
            s.rhs = simplify(a.rhs);
        }
        auto d = decide(s);
        if (d && !*d)
            return std::nullopt;
        if (d)
            continue;
        if (std::none_of(out.begin(), out.end(), [&](const Atom& o) { return equal(o, s); }))
            out.push_back(std::move(s));
    }
    return out;
}

bool same_cond(const FunctionExpr& a, const FunctionExpr& b)
{
    if (a.cond.size() != b.cond.size())
        return false;
    Pure bc = b.cond;
    if (a.var != b.var)
        bc = subst(bc, *SymExpr::bound(b.var), SymExpr::bound(a.var));
    for (std::size_t i = 0; i < bc.size(); ++i)
        if (!equal(a.cond[i], bc[i]))
            return false;
    return true;
}

void referenced(const SymExpr& e, std::set<std::string>& out);

void referenced(const FunctionExpr& f, std::set<std::string>& out)
{
    FreeNames n;
    collect(f, n);
    out.insert(n.functions.begin(), n.functions.end());
}

void referenced(const SymExpr& e, std::set<std::string>& out)
{
    FreeNames n;
    collect(e, n);
    out.insert(n.functions.begin(), n.functions.end());
}

}  // namespace

SymPtr simplify(const SymPtr& e)
{
    switch (e->kind) {
    case SymExpr::Kind::Op: {
        std::vector<SymPtr> args;
        bool all_const = true;
        for (const auto& a : e->args) {
            args.push_back(simplify(a));
            all_const &= args.back()->is_const();
        }
        if (all_const)
            if (auto v = fold(e->op, args))
                return SymExpr::constant(*v);
        switch (e->op) {
        case OpKind::Add:
            if (is_const(args[0], 0))
                return args[1];
            if (is_const(args[1], 0))
                return args[0];
            break;
        case OpKind::Sub:
            if (is_const(args[1], 0))
                return args[0];
            break;
        case OpKind::Mul:
            if (is_const(args[0], 1))
                return args[1];
            if (is_const(args[1], 1))
                return args[0];
            if (is_const(args[0], 0) || is_const(args[1], 0))
                return SymExpr::constant(0);
            break;
        case OpKind::Neg:
            if (args[0]->kind == SymExpr::Kind::Op && args[0]->op == OpKind::Neg)
                return args[0]->args[0];
            break;
        default: break;
        }
        bool changed = false;
        for (std::size_t i = 0; i < args.size(); ++i)
            changed |= args[i] != e->args[i];
        return changed ? SymExpr::make_op(e->op, std::move(args)) : e;
    }
    case SymExpr::Kind::App: {
        auto f = simplify(e->fun);
        auto idx = simplify(e->args[0]);
        if (f->kind == FunctionExpr::Kind::Lambda)
            return simplify(subst(f->body, *SymExpr::bound(f->var), idx));
        if (f->kind == FunctionExpr::Kind::Eta) {
            auto cond = simplify_cond(subst(f->cond, *SymExpr::bound(f->var), idx));
            if (!cond)
                return simplify(SymExpr::app(f->else_f, idx));
            if (cond->empty())
                return simplify(SymExpr::app(f->then_f, idx));
        }
        return (f == e->fun && idx == e->args[0]) ? e : SymExpr::app(f, idx);
    }
    default: return e;
    }
}

FunPtr simplify(const FunPtr& f)
{
    switch (f->kind) {
    case FunctionExpr::Kind::Named: return f;
    case FunctionExpr::Kind::Lambda: {
        auto b = simplify(f->body);
        return b == f->body ? f : FunctionExpr::lambda(f->var, b);
    }
    case FunctionExpr::Kind::Eta: {
        auto else_f = simplify(f->else_f);
        auto cond = simplify_cond(f->cond);
        if (!cond)
            return else_f;
        auto then_f = simplify(f->then_f);
        if (cond->empty())
            return then_f;
        if (equal(*then_f, *else_f))
            return then_f;
        auto out = FunctionExpr::eta(f->var, std::move(*cond), then_f, else_f);
        // A layer directly under one with the same condition is never read.
        while (out->else_f->kind == FunctionExpr::Kind::Eta && same_cond(*out, *out->else_f))
            out = FunctionExpr::eta(out->var, out->cond, out->then_f, out->else_f->else_f);
        return out;
    }
    case FunctionExpr::Kind::Collective: {
        std::vector<CollectiveMember> members;
        for (const auto& m : f->members) {
            auto ctx = simplify_cond(m.context);
            if (!ctx)
                continue;  // this member never writes
            CollectiveMember n;
            n.context = std::move(*ctx);
            for (const auto& w : m.writes)
                if (auto c = simplify_cond(w))
                    n.writes.push_back(std::move(*c));
            if (n.writes.empty())
                continue;
            n.chain = simplify(m.chain);
            members.push_back(std::move(n));
        }
        auto base = simplify(f->else_f);
        if (members.empty())
            return base;
        return FunctionExpr::collective(f->var, f->writer, simplify(f->count), std::move(members), base);
    }
    }
    return f;
}

Pure simplify(const Pure& p)
{
    auto out = simplify_cond(p);
    if (!out)
        return {Atom::falsum()};
    return *out;
}

SymbolicHeap simplify(const SymbolicHeap& h)
{
    SymbolicHeap out;
    out.pure = simplify(h.pure);
    for (const auto& c : h.spatial) {
        Cell n = c;
        if (c.kind == Cell::Kind::PointsTo) {
            n.addr = simplify(c.addr);
            n.value = simplify(c.value);
        } else {
            n.lo = simplify(c.lo);
            n.hi = simplify(c.hi);
            n.contents = simplify(c.contents);
        }
        out.spatial.push_back(std::move(n));
    }
    for (const auto& [name, v] : h.scalar_writes)
        out.scalar_writes[name] = simplify(v);

    // Drop definitions nothing refers to.
    std::set<std::string> live;
    std::map<std::string, const Atom*> defs;
    for (const auto& a : out.pure) {
        if (a.kind == Atom::Kind::Def) {
            defs[a.name] = &a;
            continue;
        }
        referenced(*a.lhs, live);
        referenced(*a.rhs, live);
    }
    for (const auto& c : out.spatial) {
        if (c.kind == Cell::Kind::PointsTo) {
            referenced(*c.addr, live);
            referenced(*c.value, live);
        } else {
            referenced(*c.lo, live);
            referenced(*c.hi, live);
            referenced(*c.contents, live);
        }
    }
    for (const auto& [_, v] : out.scalar_writes)
        referenced(*v, live);
    std::vector<std::string> work(live.begin(), live.end());
    while (!work.empty()) {
        auto n = work.back();
        work.pop_back();
        auto it = defs.find(n);
        if (it == defs.end())
            continue;
        std::set<std::string> more;
        referenced(*it->second->fun, more);
        for (const auto& m : more)
            if (live.insert(m).second)
                work.push_back(m);
    }
    Pure kept;
    for (auto& a : out.pure)
        if (a.kind != Atom::Kind::Def || live.count(a.name))
            kept.push_back(std::move(a));
    out.pure = std::move(kept);
    return out;
}

}  // namespace klrace::sym
