#include <stdexcept>

#include "klrace/frontend.hpp"
#include "klrace/symexec.hpp"

namespace klrace::symexec {

using namespace sym;

namespace {

constexpr std::size_t kMaxDisjuncts = 64;

void divisors(const SymExpr& e, std::vector<SymPtr>& out)
{
    if (e.kind == SymExpr::Kind::Op && (e.op == OpKind::Div || e.op == OpKind::Mod))
        out.push_back(e.args[1]);
    for (const auto& a : e.args)
        divisors(*a, out);
}

Pure arithmetic(const Pure& p)
{
    Pure out;
    for (const auto& a : p)
        if (a.kind != Atom::Kind::Def)
            out.push_back(a);
    return out;
}

}  // namespace

FormulaContext formula_context(const Kernel& k)
{
    FormulaContext ctx;
    for (const auto& s : k.shared_scalars())
        ctx.shared.insert(s);
    for (const auto& a : k.arrays())
        ctx.shared.insert(a);
    ctx.rigid.insert(kThreads);
    return ctx;
}

Executor::Executor(const Kernel& k, prover::Prover& p, Config cfg) : k_(k), p_(p), cfg_(std::move(cfg)) {}

SymbolicHeap Executor::initial_heap() const
{
    SymbolicHeap h;
    auto n = SymExpr::logic(kThreads, true);
    h.pure.push_back(Atom::le(SymExpr::constant(0), SymExpr::tid()));
    h.pure.push_back(Atom::lt(SymExpr::tid(), n));
    h.pure.push_back(Atom::le(SymExpr::constant(2), n));
    for (const auto& a : k_.arrays()) {
        h.pure.push_back(Atom::le(SymExpr::constant(0), SymExpr::size(a)));
        if (cfg_.threads_fit_arrays)
            h.pure.push_back(Atom::le(n, SymExpr::size(a)));
        h.spatial.push_back(Cell::whole(a, FunctionExpr::named("f_" + a, true)));
    }
    h.pure.insert(h.pure.end(), cfg_.preconditions.begin(), cfg_.preconditions.end());
    return h;
}

std::optional<std::string> Executor::check_divisors(const Pure& ctx, const SymPtr& e)
{
    std::vector<SymPtr> ds;
    divisors(*e, ds);
    for (const auto& d : ds)
        if (!p_.prove_pure(ctx, Atom::ne(d, SymExpr::constant(0))).proven)
            return "divisor " + to_string(*d) + " may be zero";
    return std::nullopt;
}

std::optional<std::string> Executor::check_bounds(const Pure& ctx, const std::string& array, const SymPtr& e)
{
    if (!p_.prove_pure(ctx, Atom::le(SymExpr::constant(0), e)).proven ||
        !p_.prove_pure(ctx, Atom::lt(e, SymExpr::size(array))).proven)
        return "index " + to_string(*e) + " of " + array + " may be out of bounds";
    return std::nullopt;
}

SymbolicHeap Executor::assign(const SymbolicHeap& h, const std::string& v, const SymPtr& value)
{
    const bool shared = k_.is_shared(v);
    auto var = SymExpr::var(v, shared);
    auto old = SymExpr::logic(names_.primed(v));
    SymbolicHeap out = subst(h, *var, old);
    auto now = subst(value, *var, old);
    out.pure.push_back(Atom::eq(var, now));
    if (shared)
        out.scalar_writes[v] = now;
    return out;
}

std::vector<Pure> Executor::dnf(const BoolExpr& b, bool positive) const
{
    switch (b.kind) {
    case BoolExpr::Kind::Less: {
        auto l = lower(*b.lhs, k_), r = lower(*b.rhs, k_);
        return {{positive ? Atom::lt(l, r) : Atom::le(r, l)}};
    }
    case BoolExpr::Kind::Equal: {
        auto l = lower(*b.lhs, k_), r = lower(*b.rhs, k_);
        return {{positive ? Atom::eq(l, r) : Atom::ne(l, r)}};
    }
    case BoolExpr::Kind::Not: return dnf(*b.left, !positive);
    case BoolExpr::Kind::And: break;
    }
    auto l = dnf(*b.left, positive), r = dnf(*b.right, positive);
    if (!positive) {
        l.insert(l.end(), r.begin(), r.end());
        return l;
    }
    std::vector<Pure> out;
    for (const auto& x : l)
        for (const auto& y : r) {
            if (out.size() >= kMaxDisjuncts)
                throw std::length_error("condition too large");
            Pure p = x;
            p.insert(p.end(), y.begin(), y.end());
            out.push_back(std::move(p));
        }
    return out;
}

Outcome Executor::exec_command(const Command& c, const SymbolicHeap& h)
{
    auto bottom = [](std::string why) { return Outcome{Outcome::Kind::Bottom, {}, std::move(why)}; };
    auto one = [](SymbolicHeap x) { return Outcome{Outcome::Kind::Heaps, {std::move(x)}, {}}; };
    const Pure& ctx = h.pure;

    switch (c.kind) {
    case Command::Kind::Assign: {
        auto value = lower(*c.value, k_);
        if (auto e = check_divisors(ctx, value))
            return bottom(*e);
        return one(assign(h, c.target, value));
    }
    case Command::Kind::Load: {
        auto index = lower(*c.index, k_);
        if (auto e = check_divisors(ctx, index))
            return bottom(*e);
        if (auto e = check_bounds(ctx, c.array, index))
            return bottom(*e);
        const Cell* seg = h.segment(c.array);
        if (!seg)
            return bottom("no segment for " + c.array);
        return one(assign(h, c.target, SymExpr::app(seg->contents, index)));
    }
    case Command::Kind::Store: {
        auto index = lower(*c.index, k_);
        auto value = lower(*c.value, k_);
        if (auto e = check_divisors(ctx, index))
            return bottom(*e);
        if (auto e = check_divisors(ctx, value))
            return bottom(*e);
        if (auto e = check_bounds(ctx, c.array, index))
            return bottom(*e);
        SymbolicHeap out = h;
        Cell* seg = nullptr;
        for (auto& cell : out.spatial)
            if (cell.kind == Cell::Kind::Segment && cell.array == c.array)
                seg = &cell;
        if (!seg)
            return bottom("no segment for " + c.array);
        // g = eta(k. Pi & k = e; lambda k. e'; f): the written index carries e'.
        Pure cond = arithmetic(ctx);
        cond.push_back(Atom::eq(SymExpr::bound("k"), index));
        const std::string g = names_.function("g");
        out.pure.push_back(
            Atom::def(g, FunctionExpr::eta("k", std::move(cond), FunctionExpr::lambda("k", value), seg->contents)));
        seg->contents = FunctionExpr::named(g);
        return one(std::move(out));
    }
    case Command::Kind::Assume: {
        Outcome out;
        for (auto& d : dnf(*c.cond, true)) {
            for (const auto& a : d) {
                if (auto e = check_divisors(ctx, a.lhs))
                    return bottom(*e);
                if (auto e = check_divisors(ctx, a.rhs))
                    return bottom(*e);
            }
            Pure q = ctx;
            q.insert(q.end(), d.begin(), d.end());
            if (p_.sat(q) == prover::SatResult::Unsat)
                continue;
            SymbolicHeap x = h;
            x.pure = std::move(q);
            out.heaps.push_back(std::move(x));
        }
        if (out.heaps.empty())
            out.kind = Outcome::Kind::Top;
        return out;
    }
    case Command::Kind::Assert: {
        for (const auto& d : dnf(*c.cond, false)) {
            for (const auto& a : d) {
                if (auto e = check_divisors(ctx, a.lhs))
                    return bottom(*e);
                if (auto e = check_divisors(ctx, a.rhs))
                    return bottom(*e);
            }
            Pure q = ctx;
            q.insert(q.end(), d.begin(), d.end());
            if (p_.sat(q) != prover::SatResult::Unsat)
                return bottom("assertion " + print_bool(*c.cond) + " may fail");
        }
        return one(h);
    }
    case Command::Kind::Barrier: break;
    }
    throw std::invalid_argument("exec_command: barrier is a set-level step");
}

SetOutcome Executor::exec_set(const Command& c, const std::vector<SymbolicHeap>& s)
{
    SetOutcome out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        Outcome o = exec_command(c, s[i]);
        switch (o.kind) {
        case Outcome::Kind::Bottom:
            out.bottom = true;
            out.witness = i;
            out.reason = std::move(o.reason);
            out.heaps.clear();
            return out;
        case Outcome::Kind::Top: ++out.pruned; break;
        case Outcome::Kind::Heaps:
            for (auto& h : o.heaps)
                out.heaps.push_back(std::move(h));
            break;
        }
    }
    return out;
}

}  // namespace klrace::symexec
