#pragma once

// Property harnesses shared by the unit tests and the acceptance suite:
// local soundness of the non-barrier rules against concrete steps, and
// pointwise agreement of the barrier commit with the unfolded chains.

#include <sstream>

#include "generators.hpp"
#include "klrace/concrete.hpp"
#include "klrace/frontend.hpp"
#include "klrace/symexec.hpp"

namespace klrace::testing {

// ---- random commands ------------------------------------------------------------------

class CommandGen {
public:
    explicit CommandGen(Rng& r) : r_(r) {}

    ExprPtr leaf()
    {
        switch (r_.pick(8)) {
        case 0:
        case 1: return Expr::constant(r_.range(-2, 4));
        case 2: return Expr::var("x");
        case 3: return Expr::var("y");
        case 4: return Expr::var("g");
        case 5: return Expr::var("n");
        case 6: return Expr::tid();
        default: return Expr::size("A");
        }
    }

    ExprPtr term(int depth = 1)
    {
        if (depth == 0 || r_.pick(3) == 0)
            return leaf();
        static const OpKind ops[] = {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div, OpKind::Mod};
        return Expr::make_op(ops[r_.pick(5)], {term(depth - 1), term(depth - 1)});
    }

    // Mostly in range for an array of four cells.
    ExprPtr index()
    {
        switch (r_.pick(5)) {
        case 0: return Expr::tid();
        case 1: return Expr::constant(r_.range(0, 3));
        case 2: return Expr::make_op(OpKind::Sub, {Expr::size("A"), Expr::constant(r_.range(1, 2))});
        default: return term(1);
        }
    }

    BoolPtr cond(int depth = 1)
    {
        switch (depth == 0 ? r_.pick(2) : r_.pick(4)) {
        case 0: return BoolExpr::less(term(), term());
        case 1: return BoolExpr::equal(term(), term());
        case 2: return BoolExpr::negate(cond(depth - 1));
        default: return BoolExpr::conj(cond(depth - 1), cond(depth - 1));
        }
    }

    std::string scalar() { return r_.pick(5) == 0 ? "g" : (r_.coin() ? "x" : "y"); }

    Command command()
    {
        switch (r_.pick(20)) {
        case 0: case 1: case 2: case 3: case 4: case 5: return Command::assign(scalar(), term(2));
        case 6: case 7: case 8: case 9: return Command::load(r_.coin() ? "x" : "y", "A", index());
        case 10: case 11: case 12: case 13: return Command::store("A", index(), term(1));
        case 14: case 15: case 16: return Command::assume(cond());
        default: return Command::assert_(cond());
        }
    }

private:
    Rng& r_;
};

inline const char* fuzz_kernel_source() { return "shared int g;\nkernel(int A[], int n) { int x; int y; }"; }

// ---- local soundness ------------------------------------------------------------------

struct LocalFuzzStats {
    std::size_t triples = 0;     // (command, heap, state) checks performed
    std::size_t bottoms = 0;     // symbolic steps to bottom
    std::size_t landed = 0;      // concrete successors found in the output set
    std::size_t skipped = 0;     // model search exceeded its budget
    std::size_t violations = 0;
    std::vector<std::string> examples;
};

inline sym::Model thread_model(const concrete::ThreadState& t, const concrete::SharedState& s, Value threads,
                               const sym::FunInterp& initial)
{
    sym::ThreadView v;
    v.private_stack = t.stack;
    v.tid = t.tid;
    v.shared_stack = s.stack;
    v.sizes = s.sizes;
    v.heap = s.heap;
    v.arrays = {"A"};
    sym::Model m = sym::make_model(v);
    m.vars[symexec::kThreads] = threads;
    m.funs["f_A"] = initial;
    m.domain_lo = -40;
    m.domain_hi = 40;
    m.search_budget = 200'000;
    return m;
}

inline std::string describe(const concrete::ThreadState& t, const concrete::SharedState& s)
{
    std::ostringstream os;
    os << "tid " << t.tid;
    for (const auto& [n, v] : t.stack)
        os << ", " << n << " = " << v;
    for (const auto& [n, v] : s.stack)
        os << ", " << n << " = " << v;
    os << ", heap";
    for (const auto& [a, v] : s.heap)
        os << " " << a << ":" << v;
    return os.str();
}

/// Runs random straight-line command sequences symbolically and concretely
/// side by side until at least `want` triples were checked.
inline LocalFuzzStats local_soundness_fuzz(std::uint64_t seed, std::size_t want)
{
    LocalFuzzStats st;
    Rng r(seed);
    CommandGen gen(r);
    const Kernel k = *parse_kernel(fuzz_kernel_source()).kernel;
    constexpr int kThreadsLaunched = 4;

    auto violation = [&](const std::string& what) {
        ++st.violations;
        if (st.examples.size() < 5)
            st.examples.push_back(what);
    };

    while (st.triples < want) {
        concrete::Inputs in;
        std::vector<Value> cells;
        sym::FunInterp initial;
        for (Value i = 0; i < 4; ++i) {
            cells.push_back(r.range(-4, 4));
            initial[i] = cells.back();
        }
        in.arrays["A"] = cells;
        in.scalars["n"] = r.range(-4, 4);
        in.scalars["g"] = r.range(-4, 4);
        const concrete::GlobalState g0 = concrete::initial_state(k, kThreadsLaunched, in);
        concrete::ThreadState t = g0.threads[static_cast<std::size_t>(r.pick(kThreadsLaunched))].state;
        concrete::SharedState s = g0.shared;

        prover::Options po;
        po.arrays = {"A"};
        prover::Prover p(po);
        symexec::Executor ex(k, p);
        std::vector<sym::SymbolicHeap> heaps{ex.initial_heap()};

        for (int step = 0; step < 4 && st.triples < want; ++step) {
            const Command c = gen.command();
            try {
                const sym::Model m = thread_model(t, s, kThreadsLaunched, initial);
                std::vector<sym::SymbolicHeap> holding;
                for (const auto& h : heaps)
                    if (sym::satisfies(m, h))
                        holding.push_back(h);
                if (holding.empty()) {
                    violation("state lost before " + print_command(c));
                    break;
                }
                ++st.triples;

                const concrete::StepOutcome conc = concrete::step_thread(k, c, t, s);
                std::vector<sym::SymbolicHeap> next;
                bool bottom = false;
                for (const auto& h : holding) {
                    symexec::Outcome o = ex.exec_command(c, h);
                    if (o.kind == symexec::Outcome::Kind::Bottom)
                        bottom = true;
                    for (auto& x : o.heaps)
                        next.push_back(std::move(x));
                }
                if (bottom) {
                    ++st.bottoms;
                    break;
                }
                if (conc.kind == concrete::StepOutcome::Kind::Top)
                    break;
                if (conc.kind == concrete::StepOutcome::Kind::Bottom) {
                    violation("concrete fault '" + conc.fault + "' missed at " + print_command(c) + " from " +
                              sym::to_string(holding[0]));
                    break;
                }
                const sym::Model after = thread_model(conc.thread, conc.shared, kThreadsLaunched, initial);
                bool landed = false;
                for (const auto& h : next)
                    if (sym::satisfies(after, h)) {
                        landed = true;
                        break;
                    }
                if (!landed) {
                    std::ostringstream os;
                    os << print_command(c) << " from " << sym::to_string(holding[0]) << " lands nowhere in "
                       << describe(conc.thread, conc.shared);
                    violation(os.str());
                    break;
                }
                ++st.landed;
                heaps = std::move(next);
                t = conc.thread;
                s = conc.shared;
            } catch (const sym::DomainTooLarge&) {
                ++st.skipped;
                break;
            }
        }
    }
    return st;
}

// ---- barrier commit ------------------------------------------------------------------

struct CommitStats {
    std::size_t chains = 0;
    std::size_t points = 0;
    std::size_t mismatches = 0;
    std::vector<std::string> examples;
};

/// For random eta chains written by 1..3 thread instances, the committed
/// snapshot at k equals the chain of the first writer of k (in thread
/// order), or the base when no instance wrote k.
inline CommitStats commit_equivalence(std::uint64_t seed, std::size_t chains)
{
    CommitStats st;
    Rng r(seed);
    ChainGen gen(r);
    const Kernel k = *parse_kernel("kernel(int A[]) { int x; }").kernel;
    const auto k_bound = SymExpr::bound("k");

    for (std::size_t c = 0; c < chains; ++c) {
        const FunPtr chain = gen.chain(4);
        const Value xv = r.range(-4, 4);
        const Value writers = r.range(1, 3);

        sym::SymbolicHeap h;
        auto n = SymExpr::logic(symexec::kThreads, true);
        h.pure = {Atom::le(SymExpr::constant(0), SymExpr::tid()), Atom::lt(SymExpr::tid(), n),
                  Atom::eq(SymExpr::var("x"), SymExpr::constant(xv))};
        h.spatial.push_back(sym::Cell::whole("A", chain));

        prover::Prover p;
        symexec::Executor ex(k, p);
        const auto out = ex.commit({h});
        const symexec::EpochChain unfolded = symexec::epoch_chain(h, chain);

        sym::Model m = chain_model(r);
        m.tid = 0;
        m.vars["x"] = xv;
        m.vars[symexec::kThreads] = writers;
        FunPtr snapshot = out[0].segment("A")->contents;
        for (const auto& a : out[0].pure)
            if (a.kind == Atom::Kind::Def)
                m.defs[a.name] = a.fun;
        ++st.chains;

        for (Value i = 0; i < 8; ++i) {
            std::optional<Value> expected;
            for (Value w = 0; w < writers && !expected; ++w) {
                sym::Model mw = m;
                mw.tid = w;
                bool wrote = false;
                for (const auto& layer : unfolded.layers) {
                    auto probe = FunctionExpr::eta("k", layer.cond, FunctionExpr::lambda("k", SymExpr::constant(1)),
                                                   FunctionExpr::lambda("k", SymExpr::constant(0)));
                    wrote = wrote || sym::eval_fexpr(*probe, mw, i) == 1;
                }
                if (wrote)
                    expected = sym::eval_fexpr(*chain, mw, i);
            }
            if (!expected)
                expected = sym::eval_fexpr(*unfolded.base, m, i);
            const Value got = sym::eval_fexpr(*snapshot, m, i);
            ++st.points;
            if (got != *expected) {
                ++st.mismatches;
                if (st.examples.size() < 5) {
                    std::ostringstream os;
                    os << sym::to_string(*chain) << " with " << writers << " writers, x = " << xv << ", k = " << i
                       << ": snapshot " << got << ", expected " << *expected;
                    st.examples.push_back(os.str());
                }
            }
        }
        (void)k_bound;
    }
    return st;
}

}  // namespace klrace::testing
