#include <algorithm>
#include <limits>

#include "klrace/concrete.hpp"
#include "klrace/symheap.hpp"

namespace klrace::sym {

namespace {

Value wrap(std::uint64_t v) { return static_cast<Value>(v); }

Value apply(OpKind op, Value a, Value b)
{
    switch (op) {
    case OpKind::Add: return wrap(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
    case OpKind::Sub: return wrap(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
    case OpKind::Mul: return wrap(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
    case OpKind::Div:
        if (b == 0)
            throw EvalError("division by zero");
        if (a == std::numeric_limits<Value>::min() && b == -1)
            return a;
        return a / b;
    case OpKind::Mod:
        if (b == 0)
            throw EvalError("modulo by zero");
        return b == -1 ? 0 : a % b;
    case OpKind::Neg: return wrap(0 - static_cast<std::uint64_t>(a));
    case OpKind::Cos: return concrete::apply_cos(a);
    case OpKind::Sqrt: return concrete::apply_sqrt(a);
    }
    throw EvalError("bad operator");
}

struct Evaluator {
    const Model& m;
    std::map<std::string, Value> env;    // bound index / writer variables
    std::map<std::string, Value> extra;  // existential witnesses
    std::map<std::string, FunPtr> local_defs;
    int depth = 0;

    Value lookup(const std::string& name) const
    {
        if (auto it = extra.find(name); it != extra.end())
            return it->second;
        if (auto it = m.vars.find(name); it != m.vars.end())
            return it->second;
        throw EvalError("unbound name " + name);
    }

    Value expr(const SymExpr& e)
    {
        switch (e.kind) {
        case SymExpr::Kind::Const: return e.value;
        case SymExpr::Kind::Var:
        case SymExpr::Kind::Logic: return lookup(e.name);
        case SymExpr::Kind::Bound: {
            auto it = env.find(e.name);
            if (it == env.end())
                throw EvalError("unbound index " + e.name);
            return it->second;
        }
        case SymExpr::Kind::Tid:
            if (!m.tid)
                throw EvalError("tid is not bound");
            return *m.tid;
        case SymExpr::Kind::Size: {
            auto it = m.sizes.find(e.name);
            if (it == m.sizes.end())
                throw EvalError("unknown array " + e.name);
            return it->second;
        }
        case SymExpr::Kind::Op: {
            const Value a = expr(*e.args[0]);
            const Value b = e.args.size() > 1 ? expr(*e.args[1]) : 0;
            return apply(e.op, a, b);
        }
        case SymExpr::Kind::App: return fun(*e.fun, expr(*e.args[0]));
        }
        throw EvalError("bad expression");
    }

    bool atom(const Atom& a)
    {
        switch (a.kind) {
        case Atom::Kind::Eq: return expr(*a.lhs) == expr(*a.rhs);
        case Atom::Kind::Ne: return expr(*a.lhs) != expr(*a.rhs);
        case Atom::Kind::Le: return expr(*a.lhs) <= expr(*a.rhs);
        case Atom::Kind::Def: return true;  // definitions hold by construction
        }
        return false;
    }

    bool pure(const Pure& p)
    {
        return std::all_of(p.begin(), p.end(), [&](const Atom& a) { return atom(a); });
    }

    // Binds env[name] for the duration of f().
    template <class F>
    auto with(const std::string& name, Value v, F&& f)
    {
        auto old = env.find(name) != env.end() ? std::optional<Value>(env[name]) : std::nullopt;
        env[name] = v;
        struct Restore {
            Evaluator& ev;
            const std::string& n;
            std::optional<Value> o;
            ~Restore()
            {
                if (o)
                    ev.env[n] = *o;
                else
                    ev.env.erase(n);
            }
        } restore{*this, name, old};
        return f();
    }

    Value fun(const FunctionExpr& f, Value index)
    {
        if (++depth > 10'000)
            throw EvalError("function nesting too deep");
        struct Guard {
            int& d;
            ~Guard() { --d; }
        } guard{depth};
        switch (f.kind) {
        case FunctionExpr::Kind::Lambda: return with(f.var, index, [&] { return expr(*f.body); });
        case FunctionExpr::Kind::Eta: {
            const bool hit = with(f.var, index, [&] { return pure(f.cond); });
            return fun(hit ? *f.then_f : *f.else_f, index);
        }
        case FunctionExpr::Kind::Named: {
            if (auto it = local_defs.find(f.name); it != local_defs.end())
                return fun(*it->second, index);
            if (auto it = m.defs.find(f.name); it != m.defs.end())
                return fun(*it->second, index);
            auto it = m.funs.find(f.name);
            if (it == m.funs.end())
                throw EvalError("uninterpreted function " + f.name);
            auto v = it->second.find(index);
            return v == it->second.end() ? 0 : v->second;
        }
        case FunctionExpr::Kind::Collective: return collective(f, index);
        }
        throw EvalError("bad function");
    }

    Value collective(const FunctionExpr& f, Value index)
    {
        const Value n = expr(*f.count);
        for (Value w = 0; w < n; ++w) {
            auto found = with(f.writer, w, [&]() -> std::optional<Value> {
                for (const auto& mem : f.members) {
                    if (auto v = member(f, mem, index))
                        return v;
                }
                return std::nullopt;
            });
            if (found)
                return *found;
        }
        return fun(*f.else_f, index);
    }

    // Value written at `index` by the current writer through `mem`, searching
    // the writer's own existentials.
    std::optional<Value> member(const FunctionExpr& f, const CollectiveMember& mem, Value index)
    {
        auto saved_defs = local_defs;
        for (const auto& a : mem.context)
            if (a.kind == Atom::Kind::Def)
                local_defs[a.name] = a.fun;
        FreeNames names;
        for (const auto& a : mem.context)
            collect(a, names);
        for (const auto& w : mem.writes)
            for (const auto& a : w)
                collect(a, names);
        std::vector<std::string> unknown;
        for (const auto* set : {&names.vars, &names.logic})
            for (const auto& n : *set)
                if (!extra.count(n) && !m.vars.count(n))
                    unknown.push_back(n);

        std::optional<Value> result;
        search(unknown, 0, [&] {
            if (!pure(mem.context))
                return false;
            const bool writes = with(f.var, index, [&] {
                return std::any_of(mem.writes.begin(), mem.writes.end(), [&](const Pure& p) { return pure(p); });
            });
            if (!writes)
                return false;
            result = fun(*mem.chain, index);
            return true;
        });
        for (const auto& n : unknown)
            extra.erase(n);
        local_defs = std::move(saved_defs);
        return result;
    }

    // Enumerates witnesses for `names[i..]` over the model domain; stops when
    // `body` returns true. Evaluation faults reject the candidate.
    template <class F>
    bool search(const std::vector<std::string>& names, std::size_t i, F&& body)
    {
        if (i == 0) {
            double space = 1;
            for (std::size_t k = 0; k < names.size(); ++k)
                space *= static_cast<double>(m.domain_hi - m.domain_lo + 1);
            if (space > static_cast<double>(m.search_budget))
                throw DomainTooLarge("existential search over " + std::to_string(names.size()) +
                                     " names exceeds the budget");
        }
        if (i == names.size()) {
            try {
                return body();
            } catch (const EvalError&) {
                return false;
            }
        }
        for (Value v = m.domain_lo; v <= m.domain_hi; ++v) {
            extra[names[i]] = v;
            if (search(names, i + 1, body))
                return true;
        }
        extra.erase(names[i]);
        return false;
    }
};

// Follows else-branches through definitions down to an uninterpreted symbol.
std::optional<std::string> chain_root(const FunctionExpr& f, const std::map<std::string, FunPtr>& defs, int fuel = 64)
{
    const FunctionExpr* cur = &f;
    while (fuel-- > 0) {
        switch (cur->kind) {
        case FunctionExpr::Kind::Named: {
            auto it = defs.find(cur->name);
            if (it == defs.end())
                return cur->name;
            cur = it->second.get();
            break;
        }
        case FunctionExpr::Kind::Eta:
        case FunctionExpr::Kind::Collective: cur = cur->else_f.get(); break;
        case FunctionExpr::Kind::Lambda: return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

Value eval(const SymExpr& e, const Model& m)
{
    Evaluator ev{m, {}, {}, {}};
    return ev.expr(e);
}

bool eval(const Atom& a, const Model& m)
{
    Evaluator ev{m, {}, {}, {}};
    return ev.atom(a);
}

bool eval(const Pure& p, const Model& m)
{
    Evaluator ev{m, {}, {}, {}};
    return ev.pure(p);
}

Value eval_fun(const FunctionExpr& f, const Model& m, Value index)
{
    Evaluator ev{m, {}, {}, {}};
    return ev.fun(f, index);
}

Value eval_fexpr(const FunctionExpr& f, const Model& m, Value index) { return eval_fun(f, m, index); }

Model make_model(const ThreadView& v)
{
    Model m;
    m.tid = v.tid;
    m.sizes = v.sizes;
    m.heap = v.heap;
    for (const auto& [n, val] : v.shared_stack) {
        if (std::find(v.arrays.begin(), v.arrays.end(), n) != v.arrays.end())
            m.bases[n] = val;
        else
            m.vars[n] = val;
    }
    for (const auto& [n, val] : v.private_stack)
        m.vars[n] = val;
    return m;
}

bool satisfies(const Model& model, const SymbolicHeap& h)
{
    Model m = model;
    for (const auto& a : h.pure)
        if (a.kind == Atom::Kind::Def)
            m.defs[a.name] = a.fun;

    // Uninterpreted array contents default to what the heap holds.
    for (const auto& c : h.spatial) {
        if (c.kind != Cell::Kind::Segment)
            continue;
        auto root = chain_root(*c.contents, m.defs);
        if (!root || m.funs.count(*root))
            continue;
        auto base = m.bases.find(c.array);
        if (base == m.bases.end())
            return false;
        FunInterp interp;
        for (const auto& [loc, val] : m.heap)
            interp[loc - base->second] = val;
        m.funs[*root] = std::move(interp);
    }

    FreeNames names = free_names(h);
    std::vector<std::string> unknown;
    for (const auto& n : names.logic)
        if (!m.vars.count(n))
            unknown.push_back(n);
    for (const auto& n : names.vars)
        if (!m.vars.count(n) && !m.bases.count(n))
            throw EvalError("model does not bind program variable " + n);

    Evaluator ev{m, {}, {}, {}};

    // Existentials fixed by an equation in one unknown are solved by scanning
    // the domain once instead of joining the full product.
    for (bool progress = true; progress;) {
        progress = false;
        for (const auto& a : h.pure) {
            if (a.kind != Atom::Kind::Eq)
                continue;
            FreeNames an;
            collect(a, an);
            std::vector<std::string> open;
            for (const auto& n : an.logic)
                if (std::find(unknown.begin(), unknown.end(), n) != unknown.end() && !ev.extra.count(n))
                    open.push_back(n);
            if (open.size() != 1)
                continue;
            // `u = e` binds u outright, whatever the domain.
            const SymExpr* other = nullptr;
            if (a.lhs->kind == SymExpr::Kind::Logic && a.lhs->name == open[0])
                other = a.rhs.get();
            else if (a.rhs->kind == SymExpr::Kind::Logic && a.rhs->name == open[0])
                other = a.lhs.get();
            if (other) {
                FreeNames on;
                collect(*other, on);
                if (!on.logic.count(open[0])) {
                    try {
                        ev.extra[open[0]] = ev.expr(*other);
                        progress = true;
                        continue;
                    } catch (const EvalError&) {
                        ev.extra.erase(open[0]);
                        continue;
                    }
                }
            }
            // A fault means the atom reads another unknown through a
            // definition; it is left to the full search.
            std::vector<Value> hits;
            bool faulted = false;
            for (Value v = m.domain_lo; v <= m.domain_hi && hits.size() < 2 && !faulted; ++v) {
                ev.extra[open[0]] = v;
                try {
                    if (ev.atom(a))
                        hits.push_back(v);
                } catch (const EvalError&) {
                    faulted = true;
                }
            }
            ev.extra.erase(open[0]);
            if (faulted)
                continue;
            if (hits.size() == 1) {
                ev.extra[open[0]] = hits[0];
                progress = true;
            } else if (hits.empty()) {
                return false;
            }
        }
    }
    std::vector<std::string> rest;
    for (const auto& n : unknown)
        if (!ev.extra.count(n))
            rest.push_back(n);

    auto spatial_ok = [&]() {
        std::map<Value, Value> covered;
        for (const auto& c : h.spatial) {
            if (c.kind == Cell::Kind::PointsTo) {
                const Value loc = ev.expr(*c.addr);
                if (!covered.emplace(loc, ev.expr(*c.value)).second)
                    return false;
                continue;
            }
            const Value base = m.bases.at(c.array);
            const Value lo = ev.expr(*c.lo), hi = ev.expr(*c.hi);
            if (hi - lo > 1'000'000)
                throw DomainTooLarge("segment too large to enumerate");
            for (Value k = lo; k <= hi; ++k)
                if (!covered.emplace(base + k, ev.fun(*c.contents, k)).second)
                    return false;
        }
        return covered == m.heap;
    };

    return ev.search(rest, 0, [&] { return ev.pure(h.pure) && spatial_ok(); });
}

}  // namespace klrace::sym
