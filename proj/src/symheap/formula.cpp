#include <algorithm>

#include "klrace/symheap.hpp"

namespace klrace::sym {

// ---- construction -------------------------------------------------------------

SymPtr SymExpr::constant(Value v)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Const;
    e->value = v;
    return e;
}

SymPtr SymExpr::var(std::string name, bool shared)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Var;
    e->name = std::move(name);
    e->flag = shared;
    return e;
}

SymPtr SymExpr::logic(std::string name, bool rigid)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Logic;
    e->name = std::move(name);
    e->flag = rigid;
    return e;
}

SymPtr SymExpr::size(std::string array)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Size;
    e->name = std::move(array);
    return e;
}

SymPtr SymExpr::tid()
{
    static const SymPtr t = [] {
        auto e = std::make_shared<SymExpr>();
        e->kind = Kind::Tid;
        return e;
    }();
    return t;
}

SymPtr SymExpr::bound(std::string name)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Bound;
    e->name = std::move(name);
    return e;
}

SymPtr SymExpr::make_op(OpKind op, std::vector<SymPtr> args)
{
    if (static_cast<int>(args.size()) != arity(op))
        throw std::invalid_argument("operator arity mismatch");
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::Op;
    e->op = op;
    e->args = std::move(args);
    return e;
}

SymPtr SymExpr::app(FunPtr f, SymPtr index)
{
    auto e = std::make_shared<SymExpr>();
    e->kind = Kind::App;
    e->fun = std::move(f);
    e->args = {std::move(index)};
    return e;
}

SymPtr operator+(const SymPtr& a, const SymPtr& b) { return SymExpr::make_op(OpKind::Add, {a, b}); }
SymPtr operator-(const SymPtr& a, const SymPtr& b) { return SymExpr::make_op(OpKind::Sub, {a, b}); }
SymPtr operator*(const SymPtr& a, const SymPtr& b) { return SymExpr::make_op(OpKind::Mul, {a, b}); }
SymPtr operator+(const SymPtr& a, Value b) { return a + SymExpr::constant(b); }
SymPtr operator-(const SymPtr& a, Value b) { return a - SymExpr::constant(b); }

Atom Atom::eq(SymPtr a, SymPtr b) { return Atom{Kind::Eq, std::move(a), std::move(b), {}, false, nullptr}; }
Atom Atom::ne(SymPtr a, SymPtr b) { return Atom{Kind::Ne, std::move(a), std::move(b), {}, false, nullptr}; }
Atom Atom::le(SymPtr a, SymPtr b) { return Atom{Kind::Le, std::move(a), std::move(b), {}, false, nullptr}; }
Atom Atom::lt(SymPtr a, SymPtr b) { return le(std::move(a) + 1, std::move(b)); }
Atom Atom::def(std::string name, FunPtr f, bool rigid)
{
    return Atom{Kind::Def, nullptr, nullptr, std::move(name), rigid, std::move(f)};
}
Atom Atom::falsum() { return le(SymExpr::constant(1), SymExpr::constant(0)); }

std::optional<Atom> Atom::negate() const
{
    switch (kind) {
    case Kind::Eq: return ne(lhs, rhs);
    case Kind::Ne: return eq(lhs, rhs);
    case Kind::Le: return le(rhs + 1, lhs);
    case Kind::Def: break;
    }
    return std::nullopt;
}

FunPtr FunctionExpr::lambda(std::string var, SymPtr body)
{
    auto f = std::make_shared<FunctionExpr>();
    f->kind = Kind::Lambda;
    f->var = std::move(var);
    f->body = std::move(body);
    return f;
}

FunPtr FunctionExpr::eta(std::string var, Pure cond, FunPtr then_f, FunPtr else_f)
{
    auto f = std::make_shared<FunctionExpr>();
    f->kind = Kind::Eta;
    f->var = std::move(var);
    f->cond = std::move(cond);
    f->then_f = std::move(then_f);
    f->else_f = std::move(else_f);
    return f;
}

FunPtr FunctionExpr::named(std::string name, bool rigid)
{
    auto f = std::make_shared<FunctionExpr>();
    f->kind = Kind::Named;
    f->name = std::move(name);
    f->rigid = rigid;
    return f;
}

FunPtr FunctionExpr::collective(std::string var, std::string writer, SymPtr count,
                                std::vector<CollectiveMember> members, FunPtr base)
{
    auto f = std::make_shared<FunctionExpr>();
    f->kind = Kind::Collective;
    f->var = std::move(var);
    f->writer = std::move(writer);
    f->count = std::move(count);
    f->members = std::move(members);
    f->else_f = std::move(base);
    return f;
}

Cell Cell::points_to(SymPtr addr, SymPtr value)
{
    Cell c;
    c.kind = Kind::PointsTo;
    c.addr = std::move(addr);
    c.value = std::move(value);
    return c;
}

Cell Cell::segment(std::string array, SymPtr lo, SymPtr hi, FunPtr contents)
{
    Cell c;
    c.kind = Kind::Segment;
    c.array = std::move(array);
    c.lo = std::move(lo);
    c.hi = std::move(hi);
    c.contents = std::move(contents);
    return c;
}

Cell Cell::whole(std::string array, FunPtr contents)
{
    auto hi = SymExpr::size(array) - 1;
    return segment(std::move(array), SymExpr::constant(0), std::move(hi), std::move(contents));
}

const Cell* SymbolicHeap::segment(std::string_view array) const
{
    for (const auto& c : spatial)
        if (c.kind == Cell::Kind::Segment && c.array == array)
            return &c;
    return nullptr;
}

// ---- equality -------------------------------------------------------------------

namespace {

bool equal_ptr(const SymPtr& a, const SymPtr& b)
{
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return equal(*a, *b);
}

bool equal_ptr(const FunPtr& a, const FunPtr& b)
{
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return equal(*a, *b);
}

bool equal_pure(const Pure& a, const Pure& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i]))
            return false;
    return true;
}

bool equal_cell(const Cell& a, const Cell& b)
{
    if (a.kind != b.kind)
        return false;
    if (a.kind == Cell::Kind::PointsTo)
        return equal_ptr(a.addr, b.addr) && equal_ptr(a.value, b.value);
    return a.array == b.array && equal_ptr(a.lo, b.lo) && equal_ptr(a.hi, b.hi) &&
           equal_ptr(a.contents, b.contents);
}

}  // namespace

bool equal(const SymExpr& a, const SymExpr& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case SymExpr::Kind::Const: return a.value == b.value;
    case SymExpr::Kind::Var:
    case SymExpr::Kind::Logic: return a.name == b.name && a.flag == b.flag;
    case SymExpr::Kind::Size:
    case SymExpr::Kind::Bound: return a.name == b.name;
    case SymExpr::Kind::Tid: return true;
    case SymExpr::Kind::Op:
        if (a.op != b.op || a.args.size() != b.args.size())
            return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!equal_ptr(a.args[i], b.args[i]))
                return false;
        return true;
    case SymExpr::Kind::App: return equal_ptr(a.fun, b.fun) && equal_ptr(a.args[0], b.args[0]);
    }
    return false;
}

bool equal(const FunctionExpr& a, const FunctionExpr& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case FunctionExpr::Kind::Lambda: return a.var == b.var && equal_ptr(a.body, b.body);
    case FunctionExpr::Kind::Eta:
        return a.var == b.var && equal_pure(a.cond, b.cond) && equal_ptr(a.then_f, b.then_f) &&
               equal_ptr(a.else_f, b.else_f);
    case FunctionExpr::Kind::Named: return a.name == b.name && a.rigid == b.rigid;
    case FunctionExpr::Kind::Collective:
        if (a.var != b.var || a.writer != b.writer || !equal_ptr(a.count, b.count) ||
            !equal_ptr(a.else_f, b.else_f) || a.members.size() != b.members.size())
            return false;
        for (std::size_t i = 0; i < a.members.size(); ++i) {
            const auto &x = a.members[i], &y = b.members[i];
            if (!equal_pure(x.context, y.context) || !equal_ptr(x.chain, y.chain) ||
                x.writes.size() != y.writes.size())
                return false;
            for (std::size_t w = 0; w < x.writes.size(); ++w)
                if (!equal_pure(x.writes[w], y.writes[w]))
                    return false;
        }
        return true;
    }
    return false;
}

bool equal(const Atom& a, const Atom& b)
{
    if (a.kind != b.kind)
        return false;
    if (a.kind == Atom::Kind::Def)
        return a.name == b.name && a.rigid == b.rigid && equal_ptr(a.fun, b.fun);
    return equal_ptr(a.lhs, b.lhs) && equal_ptr(a.rhs, b.rhs);
}

bool equal(const SymbolicHeap& a, const SymbolicHeap& b)
{
    if (!equal_pure(a.pure, b.pure) || a.spatial.size() != b.spatial.size() ||
        a.scalar_writes.size() != b.scalar_writes.size())
        return false;
    for (std::size_t i = 0; i < a.spatial.size(); ++i)
        if (!equal_cell(a.spatial[i], b.spatial[i]))
            return false;
    auto it = b.scalar_writes.begin();
    for (const auto& [n, v] : a.scalar_writes) {
        if (n != it->first || !equal_ptr(v, it->second))
            return false;
        ++it;
    }
    return true;
}

// ---- printing -------------------------------------------------------------------

std::string to_string(const SymExpr& e)
{
    switch (e.kind) {
    case SymExpr::Kind::Const: return e.value < 0 ? "(" + std::to_string(e.value) + ")" : std::to_string(e.value);
    case SymExpr::Kind::Var:
    case SymExpr::Kind::Logic:
    case SymExpr::Kind::Bound: return e.name;
    case SymExpr::Kind::Size: return "size(" + e.name + ")";
    case SymExpr::Kind::Tid: return "tid";
    case SymExpr::Kind::Op:
        switch (e.op) {
        case OpKind::Neg: return "(-" + to_string(*e.args[0]) + ")";
        case OpKind::Cos:
        case OpKind::Sqrt: return std::string(op_name(e.op)) + "(" + to_string(*e.args[0]) + ")";
        default:
            return "(" + to_string(*e.args[0]) + " " + std::string(op_name(e.op)) + " " + to_string(*e.args[1]) + ")";
        }
    case SymExpr::Kind::App:
        if (e.fun->kind == FunctionExpr::Kind::Named)
            return e.fun->name + "(" + to_string(*e.args[0]) + ")";
        return "[" + to_string(*e.fun) + "](" + to_string(*e.args[0]) + ")";
    }
    return "?";
}

std::string to_string(const FunctionExpr& f)
{
    switch (f.kind) {
    case FunctionExpr::Kind::Lambda: return "lambda " + f.var + ". " + to_string(*f.body);
    case FunctionExpr::Kind::Eta:
        return "eta(" + f.var + ". " + to_string(f.cond) + "; " + to_string(*f.then_f) + "; " + to_string(*f.else_f) +
               ")";
    case FunctionExpr::Kind::Named: return f.name;
    case FunctionExpr::Kind::Collective: {
        std::string s = "collective(" + f.var + ", " + f.writer + " < " + to_string(*f.count) + ". ";
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const auto& m = f.members[i];
            if (i)
                s += ", ";
            s += "{" + to_string(m.context) + "; ";
            for (std::size_t w = 0; w < m.writes.size(); ++w)
                s += (w ? " | " : "") + to_string(m.writes[w]);
            s += "; " + to_string(*m.chain) + "}";
        }
        return s + "; " + to_string(*f.else_f) + ")";
    }
    }
    return "?";
}

std::string to_string(const Atom& a)
{
    switch (a.kind) {
    case Atom::Kind::Eq: return to_string(*a.lhs) + " = " + to_string(*a.rhs);
    case Atom::Kind::Ne: return to_string(*a.lhs) + " != " + to_string(*a.rhs);
    case Atom::Kind::Le: return to_string(*a.lhs) + " <= " + to_string(*a.rhs);
    case Atom::Kind::Def: return "fun " + a.name + " = " + to_string(*a.fun);
    }
    return "?";
}

std::string to_string(const Pure& p)
{
    if (p.empty())
        return "true";
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += (i ? " & " : "") + to_string(p[i]);
    return s;
}

std::string to_string(const Cell& c)
{
    if (c.kind == Cell::Kind::PointsTo)
        return to_string(*c.addr) + " |-> " + to_string(*c.value);
    return c.array + " |-> A[" + to_string(*c.lo) + ", " + to_string(*c.hi) + " | " + to_string(*c.contents) + "]";
}

std::string to_string(const SymbolicHeap& h)
{
    std::string s = to_string(h.pure) + " :: ";
    if (h.spatial.empty())
        s += "emp";
    for (std::size_t i = 0; i < h.spatial.size(); ++i)
        s += (i ? " * " : "") + to_string(h.spatial[i]);
    if (!h.scalar_writes.empty()) {
        s += " [";
        bool first = true;
        for (const auto& [n, v] : h.scalar_writes) {
            s += (first ? "" : ", ") + n + " := " + to_string(*v);
            first = false;
        }
        s += "]";
    }
    return s;
}

// ---- free names -------------------------------------------------------------------

void collect(const SymExpr& e, FreeNames& out)
{
    switch (e.kind) {
    case SymExpr::Kind::Var: out.vars.insert(e.name); break;
    case SymExpr::Kind::Logic: out.logic.insert(e.name); break;
    case SymExpr::Kind::Bound: out.bound.insert(e.name); break;
    case SymExpr::Kind::Tid: out.tid = true; break;
    case SymExpr::Kind::App: collect(*e.fun, out); break;
    default: break;
    }
    for (const auto& a : e.args)
        collect(*a, out);
}

void collect(const FunctionExpr& f, FreeNames& out)
{
    // Binders are not removed from out.bound: callers only test for presence
    // of names that are free in the enclosing scope.
    switch (f.kind) {
    case FunctionExpr::Kind::Lambda: collect(*f.body, out); break;
    case FunctionExpr::Kind::Eta:
        for (const auto& a : f.cond)
            collect(a, out);
        collect(*f.then_f, out);
        collect(*f.else_f, out);
        break;
    case FunctionExpr::Kind::Named: out.functions.insert(f.name); break;
    case FunctionExpr::Kind::Collective:
        collect(*f.count, out);
        for (const auto& m : f.members) {
            for (const auto& a : m.context)
                collect(a, out);
            for (const auto& w : m.writes)
                for (const auto& a : w)
                    collect(a, out);
            collect(*m.chain, out);
        }
        collect(*f.else_f, out);
        break;
    }
}

void collect(const Atom& a, FreeNames& out)
{
    if (a.kind == Atom::Kind::Def) {
        out.functions.insert(a.name);
        collect(*a.fun, out);
        return;
    }
    collect(*a.lhs, out);
    collect(*a.rhs, out);
}

FreeNames free_names(const SymbolicHeap& h)
{
    FreeNames out;
    for (const auto& a : h.pure)
        collect(a, out);
    for (const auto& c : h.spatial) {
        if (c.kind == Cell::Kind::PointsTo) {
            collect(*c.addr, out);
            collect(*c.value, out);
        } else {
            out.vars.insert(c.array);
            collect(*c.lo, out);
            collect(*c.hi, out);
            collect(*c.contents, out);
        }
    }
    for (const auto& [n, v] : h.scalar_writes) {
        out.vars.insert(n);
        collect(*v, out);
    }
    return out;
}

namespace {

bool fun_thread_dependent(const FunctionExpr& f);

bool pure_thread_dependent(const Pure& p)
{
    for (const auto& a : p) {
        if (a.kind == Atom::Kind::Def) {
            if (!a.rigid || fun_thread_dependent(*a.fun))
                return true;
        } else if (thread_dependent(*a.lhs) || thread_dependent(*a.rhs)) {
            return true;
        }
    }
    return false;
}

bool fun_thread_dependent(const FunctionExpr& f)
{
    switch (f.kind) {
    case FunctionExpr::Kind::Lambda: return thread_dependent(*f.body);
    case FunctionExpr::Kind::Eta:
        return pure_thread_dependent(f.cond) || fun_thread_dependent(*f.then_f) || fun_thread_dependent(*f.else_f);
    case FunctionExpr::Kind::Named: return !f.rigid;
    case FunctionExpr::Kind::Collective: return false;  // closed over its writer binder
    }
    return true;
}

}  // namespace

bool thread_dependent(const SymExpr& e)
{
    switch (e.kind) {
    case SymExpr::Kind::Tid: return true;
    case SymExpr::Kind::Var:
        if (!e.flag)
            return true;
        break;
    case SymExpr::Kind::Logic:
        if (!e.flag)
            return true;
        break;
    case SymExpr::Kind::App:
        if (fun_thread_dependent(*e.fun))
            return true;
        break;
    default: break;
    }
    return std::any_of(e.args.begin(), e.args.end(), [](const SymPtr& a) { return thread_dependent(*a); });
}

// ---- substitution ------------------------------------------------------------------

namespace {

bool matches(const SymExpr& leaf, const SymExpr& target)
{
    if (leaf.kind != target.kind)
        return false;
    if (leaf.kind == SymExpr::Kind::Tid)
        return true;
    return leaf.name == target.name;
}

template <class F>
std::vector<SymPtr> map_args(const std::vector<SymPtr>& args, F&& f, bool& changed)
{
    std::vector<SymPtr> out;
    out.reserve(args.size());
    for (const auto& a : args) {
        out.push_back(f(a));
        changed |= out.back() != a;
    }
    return out;
}

}  // namespace

SymPtr subst(const SymPtr& e, const SymExpr& target, const SymPtr& by)
{
    if (matches(*e, target))
        return by;
    if (e->kind == SymExpr::Kind::Op) {
        bool changed = false;
        auto args = map_args(e->args, [&](const SymPtr& a) { return subst(a, target, by); }, changed);
        return changed ? SymExpr::make_op(e->op, std::move(args)) : e;
    }
    if (e->kind == SymExpr::Kind::App) {
        auto f = subst(e->fun, target, by);
        auto i = subst(e->args[0], target, by);
        return (f == e->fun && i == e->args[0]) ? e : SymExpr::app(f, i);
    }
    return e;
}

namespace {

Pure subst_pure(const Pure& p, const SymExpr& target, const SymPtr& by, bool& changed)
{
    Pure out;
    out.reserve(p.size());
    for (const auto& a : p) {
        out.push_back(subst(a, target, by));
        changed |= out.back().lhs != a.lhs || out.back().rhs != a.rhs || out.back().fun != a.fun;
    }
    return out;
}

bool shadows(const FunctionExpr& f, const SymExpr& target, bool writer_too)
{
    if (target.kind != SymExpr::Kind::Bound)
        return false;
    return f.var == target.name || (writer_too && f.writer == target.name);
}

}  // namespace

FunPtr subst(const FunPtr& f, const SymExpr& target, const SymPtr& by)
{
    switch (f->kind) {
    case FunctionExpr::Kind::Named: return f;
    case FunctionExpr::Kind::Lambda: {
        if (shadows(*f, target, false))
            return f;
        auto b = subst(f->body, target, by);
        return b == f->body ? f : FunctionExpr::lambda(f->var, b);
    }
    case FunctionExpr::Kind::Eta: {
        bool changed = false;
        Pure cond = shadows(*f, target, false) ? f->cond : subst_pure(f->cond, target, by, changed);
        auto t = subst(f->then_f, target, by);
        auto e = subst(f->else_f, target, by);
        if (!changed && t == f->then_f && e == f->else_f)
            return f;
        return FunctionExpr::eta(f->var, std::move(cond), t, e);
    }
    case FunctionExpr::Kind::Collective: {
        if (shadows(*f, target, true))
            return f;
        bool changed = false;
        std::vector<CollectiveMember> members;
        for (const auto& m : f->members) {
            CollectiveMember n;
            n.context = subst_pure(m.context, target, by, changed);
            for (const auto& w : m.writes)
                n.writes.push_back(subst_pure(w, target, by, changed));
            n.chain = subst(m.chain, target, by);
            changed |= n.chain != m.chain;
            members.push_back(std::move(n));
        }
        auto count = subst(f->count, target, by);
        auto base = subst(f->else_f, target, by);
        if (!changed && count == f->count && base == f->else_f)
            return f;
        return FunctionExpr::collective(f->var, f->writer, count, std::move(members), base);
    }
    }
    return f;
}

Atom subst(const Atom& a, const SymExpr& target, const SymPtr& by)
{
    Atom out = a;
    if (a.kind == Atom::Kind::Def) {
        out.fun = subst(a.fun, target, by);
    } else {
        out.lhs = subst(a.lhs, target, by);
        out.rhs = subst(a.rhs, target, by);
    }
    return out;
}

Pure subst(const Pure& p, const SymExpr& target, const SymPtr& by)
{
    bool changed = false;
    return subst_pure(p, target, by, changed);
}

SymbolicHeap subst(const SymbolicHeap& h, const SymExpr& target, const SymPtr& by)
{
    SymbolicHeap out;
    out.pure = subst(h.pure, target, by);
    for (const auto& c : h.spatial) {
        Cell n = c;
        if (c.kind == Cell::Kind::PointsTo) {
            n.addr = subst(c.addr, target, by);
            n.value = subst(c.value, target, by);
        } else {
            n.lo = subst(c.lo, target, by);
            n.hi = subst(c.hi, target, by);
            n.contents = subst(c.contents, target, by);
        }
        out.spatial.push_back(std::move(n));
    }
    for (const auto& [n, v] : h.scalar_writes)
        out.scalar_writes[n] = subst(v, target, by);
    return out;
}

SymPtr subst_fun(const SymPtr& e, std::string_view name, const FunPtr& by)
{
    if (e->kind == SymExpr::Kind::Op) {
        bool changed = false;
        auto args = map_args(e->args, [&](const SymPtr& a) { return subst_fun(a, name, by); }, changed);
        return changed ? SymExpr::make_op(e->op, std::move(args)) : e;
    }
    if (e->kind == SymExpr::Kind::App) {
        auto idx = subst_fun(e->args[0], name, by);
        if (e->fun->kind == FunctionExpr::Kind::Named && e->fun->name == name)
            return SymExpr::app(by, idx);
        return idx == e->args[0] ? e : SymExpr::app(e->fun, idx);
    }
    return e;
}

// ---- names ------------------------------------------------------------------------

std::string NameSupply::primed(std::string_view hint) { return std::string(hint) + "'" + std::to_string(++next_); }
std::string NameSupply::function(std::string_view hint)
{
    return std::string(hint) + "'" + std::to_string(++next_);
}
std::string NameSupply::bound(std::string_view hint) { return std::string(hint) + std::to_string(++next_); }

// ---- lowering ---------------------------------------------------------------------

SymPtr lower(const Expr& e, const Kernel& k)
{
    switch (e.kind) {
    case Expr::Kind::Const: return SymExpr::constant(e.value);
    case Expr::Kind::Var: return SymExpr::var(e.name, k.is_shared(e.name));
    case Expr::Kind::Tid: return SymExpr::tid();
    case Expr::Kind::Size: return SymExpr::size(e.name);
    case Expr::Kind::Op: break;
    }
    std::vector<SymPtr> args;
    for (const auto& a : e.args)
        args.push_back(lower(*a, k));
    return SymExpr::make_op(e.op, std::move(args));
}

}  // namespace klrace::sym
