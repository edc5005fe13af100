#include "klrace/prover.hpp"

#include <algorithm>

#include "linear.hpp"

namespace klrace::prover {

using namespace sym;
using detail::Budget;
using detail::Constraint;
using detail::Lin;
using detail::Sat3;

std::string_view to_string(SatResult r)
{
    switch (r) {
    case SatResult::Sat: return "sat";
    case SatResult::Unsat: return "unsat";
    case SatResult::Unknown: return "unknown";
    }
    return "?";
}

namespace {

using DefMap = std::map<std::string, FunPtr>;

struct Problem {
    Pure atoms;
    std::vector<Pure> clauses;  // each a disjunction
};

bool contains_atom(const Pure& p, const Atom& a)
{
    return std::any_of(p.begin(), p.end(), [&](const Atom& b) { return equal(a, b); });
}

DefMap defs_of(const Pure& p)
{
    DefMap d;
    for (const auto& a : p)
        if (a.kind == Atom::Kind::Def)
            d.emplace(a.name, a.fun);
    return d;
}

FunPtr resolve(FunPtr f, const DefMap& defs)
{
    for (int fuel = 0; fuel < 256 && f->kind == FunctionExpr::Kind::Named; ++fuel) {
        auto it = defs.find(f->name);
        if (it == defs.end())
            break;
        f = it->second;
    }
    return f;
}

bool expandable(const FunctionExpr& f) { return f.kind != FunctionExpr::Kind::Named; }

// Innermost App whose function unfolds further.
const SymExpr* find_app(const SymExpr& e, const DefMap& defs)
{
    for (const auto& a : e.args)
        if (auto* hit = find_app(*a, defs))
            return hit;
    if (e.kind == SymExpr::Kind::App && expandable(*resolve(e.fun, defs)))
        return &e;
    return nullptr;
}

const SymExpr* find_app(const Pure& p, const DefMap& defs)
{
    for (const auto& a : p) {
        if (a.kind == Atom::Kind::Def)
            continue;
        if (auto* hit = find_app(*a.lhs, defs))
            return hit;
        if (auto* hit = find_app(*a.rhs, defs))
            return hit;
    }
    return nullptr;
}

SymPtr replace(const SymPtr& e, const SymExpr& target, const SymPtr& by)
{
    if (e->kind == SymExpr::Kind::App && equal(*e, target))
        return by;
    if (e->args.empty())
        return e;
    bool changed = false;
    std::vector<SymPtr> args;
    for (const auto& a : e->args) {
        args.push_back(replace(a, target, by));
        changed |= args.back() != a;
    }
    if (!changed)
        return e;
    return e->kind == SymExpr::Kind::Op ? SymExpr::make_op(e->op, std::move(args)) : SymExpr::app(e->fun, args[0]);
}

Pure replace(const Pure& p, const SymExpr& target, const SymPtr& by)
{
    Pure out;
    out.reserve(p.size());
    for (const auto& a : p) {
        Atom n = a;
        if (a.kind != Atom::Kind::Def) {
            n.lhs = replace(a.lhs, target, by);
            n.rhs = replace(a.rhs, target, by);
        }
        out.push_back(std::move(n));
    }
    return out;
}

bool mentions(const SymExpr& e, const SymExpr& leaf)
{
    if (equal(e, leaf))
        return true;
    if (e.kind == SymExpr::Kind::App) {
        FreeNames n;
        collect(*e.fun, n);
        if (leaf.kind == SymExpr::Kind::Bound && n.bound.count(leaf.name))
            return true;
    }
    return std::any_of(e.args.begin(), e.args.end(), [&](const SymPtr& a) { return mentions(*a, leaf); });
}

// Solves l = r for `w` when w occurs once under +, - and negation.
std::optional<SymPtr> isolate(const SymPtr& l, const SymPtr& r, const SymExpr& w)
{
    if (equal(*l, w))
        return r;
    if (l->kind != SymExpr::Kind::Op)
        return std::nullopt;
    const auto& a = l->args;
    switch (l->op) {
    case OpKind::Add:
        if (mentions(*a[0], w) && !mentions(*a[1], w))
            return isolate(a[0], r - a[1], w);
        if (mentions(*a[1], w) && !mentions(*a[0], w))
            return isolate(a[1], r - a[0], w);
        return std::nullopt;
    case OpKind::Sub:
        if (mentions(*a[0], w) && !mentions(*a[1], w))
            return isolate(a[0], r + a[1], w);
        if (mentions(*a[1], w) && !mentions(*a[0], w))
            return isolate(a[1], a[0] - r, w);
        return std::nullopt;
    case OpKind::Neg: return isolate(a[0], SymExpr::make_op(OpKind::Neg, {r}), w);
    default: return std::nullopt;
    }
}

bool has_suffix(const std::string& s, const std::string& suf)
{
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// ---- linearization ------------------------------------------------------------------

struct UfApp {
    std::string head;
    std::vector<Lin> args;
    int var;
};

struct Vocab {
    std::map<std::string, int> ids;
    std::vector<UfApp> apps;
    std::map<std::string, std::size_t> app_keys;
    std::vector<Constraint> side;

    int id(const std::string& key)
    {
        auto [it, fresh] = ids.emplace(key, static_cast<int>(ids.size()));
        return it->second;
    }

    Lin uf(const std::string& head, const std::vector<SymPtr>& args)
    {
        std::vector<std::string> keys;
        for (const auto& a : args)
            keys.push_back(sym::to_string(*a));
        std::string key = head + "(";
        for (std::size_t i = 0; i < keys.size(); ++i)
            key += (i ? "," : "") + keys[i];
        key += ")";
        const bool seen = app_keys.count(key) > 0;
        const int v = id("uf:" + key);
        if (!seen) {
            UfApp app{head, {}, v};
            for (const auto& a : args)
                app.args.push_back(lin(*a));
            app_keys[key] = apps.size();
            apps.push_back(std::move(app));
        }
        return detail::lin_var(v);
    }

    Lin lin(const SymExpr& e)
    {
        using detail::add;
        using detail::lin_const;
        using detail::lin_var;
        using detail::scale;
        using detail::sub;
        switch (e.kind) {
        case SymExpr::Kind::Const: return lin_const(e.value);
        case SymExpr::Kind::Var: return lin_var(id("v:" + e.name));
        case SymExpr::Kind::Logic: return lin_var(id("l:" + e.name));
        case SymExpr::Kind::Size: return lin_var(id("s:" + e.name));
        case SymExpr::Kind::Tid: return lin_var(id("tid"));
        case SymExpr::Kind::Bound: return lin_var(id("b:" + e.name));
        case SymExpr::Kind::App: {
            const std::string head =
                e.fun->kind == FunctionExpr::Kind::Named ? "fn:" + e.fun->name : "fx:" + sym::to_string(*e.fun);
            return uf(head, {e.args[0]});
        }
        case SymExpr::Kind::Op: break;
        }
        switch (e.op) {
        case OpKind::Add: return add(lin(*e.args[0]), lin(*e.args[1]));
        case OpKind::Sub: return sub(lin(*e.args[0]), lin(*e.args[1]));
        case OpKind::Neg: return scale(lin(*e.args[0]), -1);
        case OpKind::Mul: {
            Lin a = lin(*e.args[0]), b = lin(*e.args[1]);
            if (a.constant())
                return scale(b, a.k);
            if (b.constant())
                return scale(a, b.k);
            auto args = e.args;
            std::sort(args.begin(), args.end(),
                      [](const SymPtr& x, const SymPtr& y) { return sym::to_string(*x) < sym::to_string(*y); });
            return uf("*", args);
        }
        case OpKind::Div:
        case OpKind::Mod: {
            Lin a = lin(*e.args[0]), b = lin(*e.args[1]);
            if (b.constant() && (b.k == 1 || b.k == -1))
                return e.op == OpKind::Div ? scale(a, b.k) : lin_const(0);
            if (a.constant() && b.constant() && b.k != 0 && !(a.k == INT64_MIN && b.k == -1))
                return lin_const(e.op == OpKind::Div ? a.k / b.k : a.k % b.k);
            return uf(e.op == OpKind::Div ? "/" : "%", e.args);
        }
        case OpKind::Cos: {
            Lin v = uf("cos", e.args);
            side.push_back(detail::ge0(add(v, lin_const(1000))));
            side.push_back(detail::ge0(sub(lin_const(1000), v)));
            return v;
        }
        case OpKind::Sqrt: {
            Lin v = uf("sqrt", e.args);
            side.push_back(detail::ge0(v));
            return v;
        }
        }
        return lin_const(0);
    }
};

struct Clause {
    std::vector<Constraint> lits;
    std::vector<Constraint> guard;  // clause holds whenever the guard is infeasible
};

// ---- engine -------------------------------------------------------------------------

class Engine {
public:
    Engine(const Options& o) : opts_(o) { budget_.max = o.max_steps; }

    Sat3 check(const Problem& p)
    {
        if (budget_.exhausted() || ++cases_ > opts_.max_cases)
            return Sat3::Unknown;
        const DefMap defs = defs_of(p.atoms);
        const SymExpr* app = find_app(p.atoms, defs);
        for (std::size_t i = 0; !app && i < p.clauses.size(); ++i)
            app = find_app(p.clauses[i], defs);
        if (!app)
            return leaf(p);

        // Keep the App alive: `app` points into p.
        const SymPtr target = std::make_shared<SymExpr>(*app);
        auto cases = expand(*target, resolve(target->fun, defs), p);
        if (cases.size() > 1 && leaf(p) == Sat3::Unsat)
            return Sat3::Unsat;

        bool unknown = false;
        for (auto& c : cases) {
            Problem q;
            q.atoms = replace(p.atoms, *target, c.by);
            for (auto& a : c.atoms)
                if (!contains_atom(q.atoms, a))
                    q.atoms.push_back(replace(Pure{a}, *target, c.by)[0]);
            for (const auto& cl : p.clauses)
                q.clauses.push_back(replace(cl, *target, c.by));
            for (auto& cl : c.clauses)
                q.clauses.push_back(replace(cl, *target, c.by));
            switch (check(q)) {
            case Sat3::Sat: return Sat3::Sat;
            case Sat3::Unknown: unknown = true; break;
            case Sat3::Unsat: break;
            }
        }
        return unknown ? Sat3::Unknown : Sat3::Unsat;
    }

    Sat3 leaf(const Problem& p)
    {
        Vocab v;
        std::vector<Constraint> sys;
        std::vector<Clause> clauses;
        for (const auto& a : p.atoms)
            lower(a, v, sys, clauses);
        for (const auto& cl : p.clauses) {
            Clause c;
            bool valid = false;
            for (const auto& a : cl) {
                if (a.kind == Atom::Kind::Def) {
                    valid = true;  // definitions are always satisfiable
                    continue;
                }
                Lin d = detail::sub(v.lin(*a.lhs), v.lin(*a.rhs));
                switch (a.kind) {
                case Atom::Kind::Eq: c.lits.push_back(detail::eq0(d)); break;
                case Atom::Kind::Le: c.lits.push_back(detail::ge0(detail::scale(d, -1))); break;
                case Atom::Kind::Ne:
                    c.lits.push_back(detail::ge0(detail::sub(d, detail::lin_const(1))));
                    c.lits.push_back(detail::ge0(detail::sub(detail::scale(d, -1), detail::lin_const(1))));
                    break;
                default: break;
                }
            }
            if (!valid)
                clauses.push_back(std::move(c));
        }
        sys.insert(sys.end(), v.side.begin(), v.side.end());
        // Functional consistency of uninterpreted applications.
        for (std::size_t i = 0; i < v.apps.size(); ++i) {
            for (std::size_t j = i + 1; j < v.apps.size(); ++j) {
                const auto &a = v.apps[i], &b = v.apps[j];
                if (a.head != b.head || a.args.size() != b.args.size())
                    continue;
                Clause c;
                for (std::size_t k = 0; k < a.args.size(); ++k) {
                    Lin d = detail::sub(a.args[k], b.args[k]);
                    c.lits.push_back(detail::ge0(detail::sub(d, detail::lin_const(1))));
                    c.lits.push_back(detail::ge0(detail::sub(detail::scale(d, -1), detail::lin_const(1))));
                    c.guard.push_back(detail::eq0(d));
                }
                c.lits.push_back(detail::eq0(detail::sub(detail::lin_var(a.var), detail::lin_var(b.var))));
                clauses.push_back(std::move(c));
            }
        }
        return branch(sys, clauses, 0);
    }

    bool exhausted() const { return budget_.exhausted() || cases_ > opts_.max_cases; }

private:
    struct Case {
        SymPtr by;
        Pure atoms;
        std::vector<Pure> clauses;
    };

    const Options& opts_;
    Budget budget_;
    std::size_t cases_ = 0;
    int fresh_ = 0;

    void lower(const Atom& a, Vocab& v, std::vector<Constraint>& sys, std::vector<Clause>& clauses)
    {
        if (a.kind == Atom::Kind::Def)
            return;
        Lin d = detail::sub(v.lin(*a.lhs), v.lin(*a.rhs));
        switch (a.kind) {
        case Atom::Kind::Eq: sys.push_back(detail::eq0(d)); break;
        case Atom::Kind::Le: sys.push_back(detail::ge0(detail::scale(d, -1))); break;
        case Atom::Kind::Ne: {
            Clause c;
            c.lits.push_back(detail::ge0(detail::sub(d, detail::lin_const(1))));
            c.lits.push_back(detail::ge0(detail::sub(detail::scale(d, -1), detail::lin_const(1))));
            c.guard.push_back(detail::eq0(d));
            clauses.push_back(std::move(c));
            break;
        }
        default: break;
        }
    }

    Sat3 branch(std::vector<Constraint>& sys, const std::vector<Clause>& clauses, std::size_t i)
    {
        if (budget_.exhausted())
            return Sat3::Unknown;
        const Sat3 r = detail::solve(sys, budget_);
        if (r == Sat3::Unsat || i == clauses.size())
            return r;
        const Clause& c = clauses[i];
        if (!c.guard.empty()) {
            auto guarded = sys;
            guarded.insert(guarded.end(), c.guard.begin(), c.guard.end());
            if (detail::solve(guarded, budget_) == Sat3::Unsat)
                return branch(sys, clauses, i + 1);
        }
        bool unknown = r == Sat3::Unknown;
        for (const auto& lit : c.lits) {
            sys.push_back(lit);
            const Sat3 sub = branch(sys, clauses, i + 1);
            sys.pop_back();
            if (sub == Sat3::Sat)
                return Sat3::Sat;
            unknown |= sub == Sat3::Unknown;
        }
        return unknown ? Sat3::Unknown : Sat3::Unsat;
    }

    std::vector<Case> expand(const SymExpr& app, const FunPtr& f, const Problem& p)
    {
        const SymPtr& arg = app.args[0];
        std::vector<Case> out;
        switch (f->kind) {
        case FunctionExpr::Kind::Lambda:
            out.push_back({subst(f->body, *SymExpr::bound(f->var), arg), {}, {}});
            break;
        case FunctionExpr::Kind::Eta: {
            Pure cond;
            for (const auto& a : subst(f->cond, *SymExpr::bound(f->var), arg))
                if (a.kind != Atom::Kind::Def)
                    cond.push_back(a);
            bool then_possible = true;
            Pure then_atoms;
            for (const auto& a : cond) {
                if (auto n = a.negate(); n && contains_atom(p.atoms, *n))
                    then_possible = false;
                if (!contains_atom(p.atoms, a))
                    then_atoms.push_back(a);
            }
            if (then_possible)
                out.push_back({SymExpr::app(f->then_f, arg), then_atoms, {}});
            for (const auto& a : then_atoms)
                out.push_back({SymExpr::app(f->else_f, arg), {*a.negate()}, {}});
            break;
        }
        case FunctionExpr::Kind::Collective: expand_collective(*f, arg, p, out); break;
        case FunctionExpr::Kind::Named: break;
        }
        return out;
    }

    void expand_collective(const FunctionExpr& f, const SymPtr& arg, const Problem& p, std::vector<Case>& out)
    {
        const SymExpr writer = *SymExpr::bound(f.writer);
        const SymExpr index = *SymExpr::bound(f.var);
        for (const auto& m : f.members) {
            for (const auto& w : m.writes) {
                const std::string inst = f.writer + "#" + std::to_string(++fresh_);
                auto wl = SymExpr::logic(inst, true);
                auto instantiate = [&](const Pure& q) { return retag(subst(q, writer, wl), f.writer, inst); };
                Case c;
                c.atoms = instantiate(m.context);
                for (auto& a : subst(instantiate(w), index, arg))
                    c.atoms.push_back(std::move(a));
                c.atoms.push_back(Atom::le(SymExpr::constant(0), wl));
                c.atoms.push_back(Atom::lt(wl, f.count));
                c.by = SymExpr::app(retag(subst(m.chain, writer, wl), f.writer, inst), arg);
                out.push_back(std::move(c));
            }
        }

        // No thread wrote `arg`. The negated write condition is only
        // expressible when the writer is determined by an equation and no
        // other writer-local name remains.
        Case none;
        none.by = SymExpr::app(f.else_f, arg);
        const std::string local = "@" + f.writer;
        for (const auto& m : f.members) {
            for (const auto& w : m.writes) {
                Pure all;
                for (const auto& a : m.context)
                    if (a.kind != Atom::Kind::Def)
                        all.push_back(a);
                for (const auto& a : subst(w, index, arg))
                    all.push_back(a);
                std::optional<SymPtr> solved;
                for (const auto& a : all) {
                    if (a.kind != Atom::Kind::Eq)
                        continue;
                    if (!mentions(*a.lhs, writer) && !mentions(*a.rhs, writer))
                        continue;
                    solved = mentions(*a.lhs, writer) && !mentions(*a.rhs, writer) ? isolate(a.lhs, a.rhs, writer)
                             : !mentions(*a.lhs, writer)                         ? isolate(a.rhs, a.lhs, writer)
                                                                                 : std::nullopt;
                    if (solved)
                        break;
                }
                if (!solved)
                    continue;
                Pure inst = subst(all, writer, *solved);
                inst.push_back(Atom::le(SymExpr::constant(0), *solved));
                inst.push_back(Atom::lt(*solved, f.count));
                FreeNames names;
                for (const auto& a : inst)
                    collect(a, names);
                bool closed = !names.bound.count(f.writer);
                for (const auto* set : {&names.vars, &names.logic, &names.functions})
                    for (const auto& n : *set)
                        closed &= !has_suffix(n, local);
                if (!closed)
                    continue;
                Pure clause;
                bool satisfied = false;
                for (const auto& a : simplify(inst)) {
                    if (contains_atom(p.atoms, a))
                        continue;
                    if (auto n = a.negate()) {
                        if (contains_atom(p.atoms, *n)) {
                            satisfied = true;
                            break;
                        }
                        clause.push_back(*n);
                    }
                }
                if (satisfied)
                    continue;
                if (clause.empty())
                    return;  // some thread certainly wrote `arg`
                none.clauses.push_back(std::move(clause));
            }
        }
        out.push_back(std::move(none));
    }
};

// `A + off` over a known array base.
std::optional<std::pair<std::string, SymPtr>> split_address(const SymPtr& e, const std::set<std::string>& arrays)
{
    auto is_base = [&](const SymPtr& x) { return x->kind == SymExpr::Kind::Var && arrays.count(x->name) > 0; };
    if (is_base(e))
        return std::make_pair(e->name, SymExpr::constant(0));
    if (e->kind != SymExpr::Kind::Op)
        return std::nullopt;
    if (e->op == OpKind::Add) {
        if (is_base(e->args[0]))
            return std::make_pair(e->args[0]->name, e->args[1]);
        if (is_base(e->args[1]))
            return std::make_pair(e->args[1]->name, e->args[0]);
    }
    if (e->op == OpKind::Sub && is_base(e->args[0]))
        return std::make_pair(e->args[0]->name, SymExpr::make_op(OpKind::Neg, {e->args[1]}));
    return std::nullopt;
}

}  // namespace

Prover::Prover(Options opts) : opts_(std::move(opts)) {}

SatResult Prover::check(const Pure& atoms)
{
    ++stats_.queries;
    Engine engine(opts_);
    Problem p{atoms, {}};
    const Sat3 r = engine.check(p);
    if (r == Sat3::Unsat)
        return SatResult::Unsat;
    if (!opts_.solver.empty()) {
        ++stats_.solver_calls;
        if (auto answer = run_solver(opts_.solver, to_smtlib(atoms)); answer && *answer == "unsat") {
            ++stats_.solver_proofs;
            return SatResult::Unsat;
        }
    }
    if (r == Sat3::Unknown) {
        ++stats_.unknown;
        return SatResult::Unknown;
    }
    return SatResult::Sat;
}

SatResult Prover::sat(const Pure& ctx) { return check(ctx); }

ProofResult Prover::prove_pure(const Pure& ctx, const Atom& goal)
{
    if (goal.kind == Atom::Kind::Def) {
        for (const auto& a : ctx)
            if (equal(a, goal))
                return {true, {}};
        return {false, "definition goals are only proven syntactically"};
    }
    Pure q = ctx;
    q.push_back(*goal.negate());
    switch (check(q)) {
    case SatResult::Unsat: return {true, {}};
    case SatResult::Sat: return {false, "context does not entail " + sym::to_string(goal)};
    case SatResult::Unknown: return {false, "resource bound reached"};
    }
    return {false, {}};
}

bool Prover::prove_all(const Pure& ctx, const Pure& goals)
{
    return std::all_of(goals.begin(), goals.end(), [&](const Atom& g) { return prove_pure(ctx, g).proven; });
}

Relation Prover::relate(const Pure& ctx, const SymPtr& a0, const SymPtr& b0)
{
    // Fixed argument order keeps the answer symmetric under budgets.
    SymPtr a = a0, b = b0;
    if (sym::to_string(*b) < sym::to_string(*a))
        std::swap(a, b);
    auto sa = split_address(a, opts_.arrays), sb = split_address(b, opts_.arrays);
    if (sa && sb) {
        if (sa->first != sb->first)
            return Relation::Distinct;
        a = sa->second;
        b = sb->second;
    }
    if (check(ctx) != SatResult::Sat)
        return Relation::Unknown;
    Pure ne = ctx, eq = ctx;
    ne.push_back(Atom::ne(a, b));
    eq.push_back(Atom::eq(a, b));
    const bool equal_proven = check(ne) == SatResult::Unsat;
    const bool distinct_proven = check(eq) == SatResult::Unsat;
    if (equal_proven && !distinct_proven)
        return Relation::Equal;
    if (distinct_proven && !equal_proven)
        return Relation::Distinct;
    return Relation::Unknown;
}

bool Prover::compare(const Pure& ctx, const SymPtr& a, const SymPtr& b) { return relate(ctx, a, b) == Relation::Equal; }

bool Prover::disjoint(const Pure& ctx, const SymPtr& a, const SymPtr& b)
{
    return relate(ctx, a, b) == Relation::Distinct;
}

bool Prover::compare(const SymbolicHeap& h1, const SymPtr& e1, const SymbolicHeap& h2, const SymPtr& e2)
{
    Pure ctx = h1.pure;
    ctx.insert(ctx.end(), h2.pure.begin(), h2.pure.end());
    return compare(ctx, e1, e2);
}

bool Prover::disjoint(const SymbolicHeap& h1, const SymPtr& e1, const SymbolicHeap& h2, const SymPtr& e2)
{
    Pure ctx = h1.pure;
    ctx.insert(ctx.end(), h2.pure.begin(), h2.pure.end());
    return disjoint(ctx, e1, e2);
}

ProofResult Prover::prove_entailment(const SymbolicHeap& ante, const SymbolicHeap& cons)
{
    const FreeNames an = free_names(ante), cn = free_names(cons);
    for (const auto& n : cn.logic)
        if (!an.logic.count(n) && n.find('\'') != std::string::npos)
            return {false, "consequent introduces existential " + n};

    Pure ctx = ante.pure;
    // Consequent definitions of fresh symbols are definitional extensions.
    DefMap ante_defs = defs_of(ante.pure);
    Pure goals;
    for (const auto& a : cons.pure) {
        if (a.kind != Atom::Kind::Def) {
            goals.push_back(a);
            continue;
        }
        auto it = ante_defs.find(a.name);
        if (it == ante_defs.end()) {
            if (an.functions.count(a.name))
                return {false, "definition of " + a.name + " conflicts with the antecedent"};
            ctx.push_back(a);
        } else if (!equal(*it->second, *a.fun)) {
            return {false, "definition of " + a.name + " differs"};
        }
    }
    if (check(ctx) == SatResult::Unsat)
        return {true, "antecedent is inconsistent"};

    if (ante.spatial.size() != cons.spatial.size())
        return {false, "spatial parts differ in size"};
    if (ante.scalar_writes.size() != cons.scalar_writes.size())
        return {false, "epoch writes differ"};
    for (const auto& [n, v] : cons.scalar_writes) {
        auto it = ante.scalar_writes.find(n);
        if (it == ante.scalar_writes.end() || !(equal(*it->second, *v) || compare(ctx, it->second, v)))
            return {false, "epoch write to " + n + " differs"};
    }

    std::vector<bool> used(ante.spatial.size(), false);
    int probe = 0;
    for (const auto& c : cons.spatial) {
        bool matched = false;
        for (std::size_t i = 0; i < ante.spatial.size() && !matched; ++i) {
            if (used[i] || ante.spatial[i].kind != c.kind)
                continue;
            const Cell& a = ante.spatial[i];
            bool ok;
            if (c.kind == Cell::Kind::PointsTo) {
                ok = (equal(*a.addr, *c.addr) || compare(ctx, a.addr, c.addr)) &&
                     (equal(*a.value, *c.value) || compare(ctx, a.value, c.value));
            } else {
                ok = a.array == c.array && (equal(*a.lo, *c.lo) || compare(ctx, a.lo, c.lo)) &&
                     (equal(*a.hi, *c.hi) || compare(ctx, a.hi, c.hi));
                if (ok && !equal(*a.contents, *c.contents)) {
                    // Pointwise on an arbitrary index inside the segment.
                    auto k = SymExpr::logic("k#entail" + std::to_string(++probe), true);
                    Pure inner = ctx;
                    inner.push_back(Atom::le(a.lo, k));
                    inner.push_back(Atom::le(k, a.hi));
                    ok = compare(inner, SymExpr::app(a.contents, k), SymExpr::app(c.contents, k));
                }
            }
            if (ok) {
                used[i] = true;
                matched = true;
            }
        }
        if (!matched)
            return {false, "no antecedent cell matches " + sym::to_string(c)};
    }
    for (const auto& g : goals)
        if (!contains_atom(ctx, g) && !prove_pure(ctx, g).proven)
            return {false, "pure goal not proven: " + sym::to_string(g)};
    return {true, {}};
}

}  // namespace klrace::prover
