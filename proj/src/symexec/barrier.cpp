#include <algorithm>

#include "klrace/symexec.hpp"

namespace klrace::symexec {

using namespace sym;

namespace {

std::set<std::string> written_scalars(const SymbolicHeap& h)
{
    std::set<std::string> out;
    for (const auto& [n, _] : h.scalar_writes)
        out.insert(n);
    return out;
}

const Cell* segment_of(const SymbolicHeap& h, const std::string& a)
{
    for (const auto& c : h.spatial)
        if (c.kind == Cell::Kind::Segment && c.array == a)
            return &c;
    return nullptr;
}

// Atoms of q from position `from` on, without definitions.
Pure arithmetic_only(const Pure& q, std::size_t from)
{
    Pure out;
    for (std::size_t x = from; x < q.size(); ++x)
        if (q[x].kind != Atom::Kind::Def)
            out.push_back(q[x]);
    return out;
}

}  // namespace

EpochChain epoch_chain(const SymbolicHeap& h, const FunPtr& contents)
{
    std::map<std::string, FunPtr> defs;
    for (const auto& a : h.pure)
        if (a.kind == Atom::Kind::Def && !a.rigid)
            defs.emplace(a.name, a.fun);
    EpochChain out;
    FunPtr f = contents;
    for (int fuel = 0; fuel < 4096; ++fuel) {
        if (f->kind == FunctionExpr::Kind::Named && !f->rigid) {
            auto it = defs.find(f->name);
            if (it == defs.end())
                break;
            f = it->second;
            continue;
        }
        if (f->kind != FunctionExpr::Kind::Eta)
            break;
        Pure cond = f->var == "k" ? f->cond : subst(f->cond, *SymExpr::bound(f->var), SymExpr::bound("k"));
        out.layers.push_back({std::move(cond), f->then_f});
        f = f->else_f;
    }
    out.base = f;
    return out;
}

RaceCheck Executor::no_race(const std::vector<SymbolicHeap>& s)
{
    const auto i = SymExpr::logic("i", true), j = SymExpr::logic("j", true);
    const auto k = SymExpr::logic("k", true);
    const auto zero = SymExpr::constant(0);
    RaceCheck out;

    // Unordered pairs with the diagonal: swapping the heaps swaps i and j,
    // and the check is symmetric in the two instances.
    for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a; b < s.size(); ++b) {
            std::set<std::string> per = written_scalars(s[a]);
            for (const auto& n : written_scalars(s[b]))
                per.insert(n);
            const SymbolicHeap hi = rename(i, s[a], per), hj = rename(j, s[b], per);
            Pure ctx = hi.pure;
            ctx.insert(ctx.end(), hj.pure.begin(), hj.pure.end());
            ctx.push_back(Atom::le(zero, i));
            ctx.push_back(Atom::le(zero, j));
            ctx.push_back(Atom::ne(i, j));
            if (p_.sat(ctx) == prover::SatResult::Unsat)
                continue;

            auto fail = [&](std::string loc, std::string cond, const SymPtr& vi, const SymPtr& vj) {
                out.race_free = false;
                out.witness = RaceWitness{a, b, std::move(loc), std::move(cond), to_string(*simplify(vi)),
                                          to_string(*simplify(vj))};
                return out;
            };

            for (const auto& array : k_.arrays()) {
                const Cell *ci = segment_of(hi, array), *cj = segment_of(hj, array);
                if (!ci || !cj)
                    continue;
                const EpochChain li = epoch_chain(hi, ci->contents), lj = epoch_chain(hj, cj->contents);
                for (const auto& x : li.layers) {
                    for (const auto& y : lj.layers) {
                        // Overlap at k: both instances write k in this epoch.
                        Pure q = ctx;
                        for (const auto& at : subst(x.cond, *SymExpr::bound("k"), k))
                            q.push_back(at);
                        for (const auto& at : subst(y.cond, *SymExpr::bound("k"), k))
                            q.push_back(at);
                        if (p_.sat(q) == prover::SatResult::Unsat)
                            continue;
                        // Final values at k for each instance must agree.
                        auto vi = SymExpr::app(ci->contents, k), vj = SymExpr::app(cj->contents, k);
                        if (!p_.compare(q, vi, vj))
                            return fail(array + "[k]", to_string(arithmetic_only(q, ctx.size())), vi, vj);
                    }
                }
            }
            for (const auto& [n, vi] : hi.scalar_writes) {
                auto it = hj.scalar_writes.find(n);
                if (it != hj.scalar_writes.end() && !p_.compare(ctx, vi, it->second))
                    return fail(n, "both instances write " + n, vi, it->second);
            }
        }
    }
    return out;
}

std::vector<SymbolicHeap> Executor::commit(const std::vector<SymbolicHeap>& s)
{
    std::vector<SymbolicHeap> out = s;
    const auto w = SymExpr::bound("w");
    const auto n = SymExpr::logic(kThreads, true);

    for (const auto& array : k_.arrays()) {
        std::vector<EpochChain> chains;
        bool any = false;
        for (const auto& h : s) {
            const Cell* c = segment_of(h, array);
            chains.push_back(c ? epoch_chain(h, c->contents) : EpochChain{});
            any |= !chains.back().layers.empty();
        }
        if (!any)
            continue;
        FunPtr base = chains[0].base;
        bool same_base = base != nullptr;
        for (const auto& c : chains)
            same_base = same_base && c.base && equal(*c.base, *base);

        const std::string name = array + "#" + std::to_string(++snapshots_);
        std::optional<Atom> def;
        if (same_base) {
            std::vector<CollectiveMember> members;
            for (std::size_t x = 0; x < s.size(); ++x) {
                if (chains[x].layers.empty())
                    continue;
                const SymbolicHeap hw = rename(w, s[x], written_scalars(s[x]));
                CollectiveMember m;
                for (const auto& a : hw.pure)
                    if (!(a.kind == Atom::Kind::Def && a.rigid))
                        m.context.push_back(a);
                const Cell* c = segment_of(hw, array);
                for (const auto& layer : epoch_chain(hw, c->contents).layers)
                    m.writes.push_back(layer.cond);
                m.chain = c->contents;
                members.push_back(std::move(m));
            }
            def = Atom::def(name, FunctionExpr::collective("k", "w", n, std::move(members), base), true);
        } else {
            notes_.push_back("epochs of " + array + " start from different snapshots; " + name +
                             " is left unconstrained");
        }
        for (auto& h : out) {
            for (auto& c : h.spatial)
                if (c.kind == Cell::Kind::Segment && c.array == array)
                    c.contents = FunctionExpr::named(name, true);
            if (def)
                h.pure.push_back(*def);
        }
    }

    // Shared scalars written in the epoch: old per-thread facts are detached;
    // the value is known only when every heap wrote the same thread-invariant
    // value.
    std::set<std::string> written;
    for (const auto& h : s)
        for (const auto& [v, _] : h.scalar_writes)
            written.insert(v);
    for (const auto& v : written) {
        std::optional<SymPtr> uniform;
        bool ok = true;
        for (const auto& h : s) {
            auto it = h.scalar_writes.find(v);
            if (it == h.scalar_writes.end() || thread_dependent(*it->second) ||
                (uniform && !equal(**uniform, *it->second))) {
                ok = false;
                break;
            }
            uniform = it->second;
        }
        auto var = SymExpr::var(v, true);
        for (auto& h : out) {
            auto old = SymExpr::logic(names_.primed(v));
            auto value = uniform ? subst(*uniform, *var, old) : nullptr;
            h = subst(h, *var, old);
            if (ok && value)
                h.pure.push_back(Atom::eq(var, value));
        }
    }
    for (auto& h : out) {
        h.scalar_writes.clear();
        h = simplify(h);
    }
    return out;
}

BarrierOutcome Executor::exec_barrier(const std::vector<SymbolicHeap>& s)
{
    BarrierOutcome out;
    std::vector<SymbolicHeap> simple;
    for (const auto& h : s)
        simple.push_back(simplify(h));
    RaceCheck rc = no_race(simple);
    if (!rc.race_free) {
        out.race = true;
        out.witness = rc.witness;
        return out;
    }
    out.heaps = commit(simple);
    return out;
}

}  // namespace klrace::symexec
