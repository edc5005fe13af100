#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "prover_fuzz.hpp"
#include "klrace/prover.hpp"

using namespace klrace;
using namespace klrace::sym;
using klrace::prover::Prover;
using klrace::prover::Relation;
using klrace::prover::SatResult;
using klrace::testing::ChainGen;
using klrace::testing::Rng;
using klrace::testing::Space;
using klrace::testing::TermGen;

namespace {

Pure pure(std::string_view s, const FormulaContext& ctx = {}) { return parse_pure(s, ctx); }
Atom atom(std::string_view s, const FormulaContext& ctx = {}) { return parse_pure(s, ctx).at(0); }
SymPtr term(std::string_view s, const FormulaContext& ctx = {}) { return parse_sym(s, ctx); }

Prover with_arrays(std::set<std::string> arrays)
{
    prover::Options o;
    o.arrays = std::move(arrays);
    return Prover(o);
}

}  // namespace

TEST_CASE("prove_pure examples")
{
    Prover p;
    CHECK(p.prove_pure(pure("0 <= tid & tid < size(A) & size(A) = 8"), atom("tid <= 7")).proven);
    CHECK_FALSE(p.prove_pure({}, atom("tid <= 7")).proven);
    CHECK(p.prove_pure(pure("x = cos(y) & z = cos(y)"), atom("x = z")).proven);
}

TEST_CASE("sat examples")
{
    Prover p;
    CHECK(p.sat(pure("tid = 0 & tid = 1")) == SatResult::Unsat);
    CHECK(p.sat(pure("tid < 4 & 2 <= tid")) == SatResult::Sat);
    CHECK(p.sat(pure("x * x = -1")) == SatResult::Sat);
}

TEST_CASE("integer reasoning goes beyond the rational relaxation")
{
    Prover p;
    CHECK(p.sat(pure("2 * x = 1")) == SatResult::Unsat);
    CHECK(p.sat(pure("1 <= 3 * x & 3 * x <= 2")) == SatResult::Unsat);
    CHECK(p.sat(pure("x != y & x <= y & y <= x")) == SatResult::Unsat);
    CHECK(p.sat(pure("x != 0 & x != 1 & 0 <= x & x <= 1")) == SatResult::Unsat);
}

TEST_CASE("uninterpreted applications are congruent")
{
    Prover p;
    CHECK(p.sat(pure("x = y & f(x) != f(y)")) == SatResult::Unsat);
    CHECK(p.sat(pure("f(x) != f(y)")) == SatResult::Sat);
    CHECK(p.sat(pure("a = x * y & b = y * x & a != b")) == SatResult::Unsat);
    CHECK(p.sat(pure("s = sqrt(x) & s < 0")) == SatResult::Unsat);
    CHECK(p.sat(pure("c = cos(x) & 1001 <= c")) == SatResult::Unsat);
}

TEST_CASE("compare examples")
{
    Prover p;
    CHECK(p.compare({}, term("5"), term("5")));
    CHECK(p.compare({}, term("f(k)"), term("f(k)")));
    CHECK_FALSE(p.compare({}, term("v@i"), term("v@j")));

    auto h1 = parse_heap("x@i = 3 :: emp"), h2 = parse_heap("y@j = 3 :: emp");
    CHECK(p.compare(h1, term("x@i"), h2, term("y@j")));
}

TEST_CASE("disjoint examples")
{
    Prover p = with_arrays({"A", "B"});
    CHECK(p.disjoint(pure("i != j"), term("A + i"), term("A + j")));
    CHECK(p.disjoint({}, term("A + i"), term("B + k")));
    CHECK_FALSE(p.disjoint({}, term("A + i"), term("A + j")));
    CHECK_FALSE(p.compare({}, term("A + i"), term("B + i")));
}

TEST_CASE("array contents unfold by case analysis")
{
    Prover p;
    // Store of tid at A[0] over f0: reads at 0 see tid, others see f0.
    const FormulaContext rigid{{}, {"f0"}};
    auto g = parse_fun("eta(k. k = 0; lambda k. tid; f0)", rigid);
    auto at = [&](SymPtr i) { return SymExpr::app(g, i); };
    CHECK(p.compare({}, at(term("0")), term("tid")));
    CHECK(p.compare({}, at(term("1")), term("f0(1)", rigid)));
    CHECK(p.compare(pure("x = 0"), at(term("x")), term("tid")));
    CHECK_FALSE(p.compare({}, at(term("x")), term("tid")));

    // Definitions in the context are expanded.
    Pure ctx = pure("fun g1 = eta(k. k = tid; lambda k. 7; f0)", rigid);
    CHECK(p.prove_pure(ctx, Atom::eq(term("g1(tid)"), term("7"))).proven);
    CHECK_FALSE(p.prove_pure(ctx, Atom::eq(term("g1(x)"), term("7"))).proven);
}

TEST_CASE("collective snapshot of per-thread stores")
{
    // Every writer w < N stored w at index w; read back at a valid index.
    const FormulaContext ctx{{}, {"f0", "N", "t"}};
    auto snap = parse_fun("collective(k, w < N. {0 <= w & w < N; k = w; lambda k. w}; f0)", ctx);
    Prover p;
    auto read = SymExpr::app(snap, term("t", ctx));
    CHECK(p.prove_pure(pure("0 <= t & t < N", ctx), Atom::eq(read, term("t", ctx))).proven);
    // Outside the written range the base shows through.
    CHECK(p.prove_pure(pure("N <= t", ctx), Atom::eq(read, term("f0(t)", ctx))).proven);
    CHECK_FALSE(p.prove_pure(pure("0 <= N", ctx), Atom::eq(read, term("t", ctx))).proven);
}

TEST_CASE("entailment examples")
{
    Prover p;
    CHECK(p.prove_entailment(parse_heap("x = 3 :: x |-> 7"), parse_heap("true :: x |-> 7")).proven);
    CHECK(p.prove_entailment(parse_heap("true :: x |-> 7 * y |-> 8"), parse_heap("true :: y |-> 8 * x |-> 7")).proven);
    CHECK_FALSE(p.prove_entailment(parse_heap("true :: x |-> 7"), parse_heap("true :: x |-> 8")).proven);
    CHECK_FALSE(p.prove_entailment(parse_heap("true :: x |-> 7"), parse_heap("true :: emp")).proven);
    CHECK(p.prove_entailment(parse_heap("x = 3 :: emp"), parse_heap("1 <= x :: emp")).proven);
    CHECK_FALSE(p.prove_entailment(parse_heap("true :: emp"), parse_heap("x = v' :: emp")).proven);
}

TEST_CASE("segment entailment compares contents pointwise")
{
    const FormulaContext rigid{{}, {"f0"}};
    Prover p;
    auto a = parse_heap("true :: A |-> A[0, 3 | eta(k. k = 0; lambda k. 5; f0)]", rigid);
    auto b = parse_heap("true :: A |-> A[0, 3 | eta(k. k != 0; f0; lambda k. 5)]", rigid);
    auto c = parse_heap("true :: A |-> A[0, 3 | eta(k. k = 1; lambda k. 5; f0)]", rigid);
    CHECK(p.prove_entailment(a, b).proven);
    CHECK_FALSE(p.prove_entailment(a, c).proven);
}

TEST_CASE("resource bounds fail toward not proven")
{
    prover::Options o;
    o.max_steps = 0;
    Prover p(o);
    CHECK(p.sat(pure("0 <= x & x <= 1 & 0 <= y & y <= 1 & x + y = 3")) != SatResult::Sat);
    CHECK_FALSE(p.prove_pure(pure("0 <= x & x <= 3 & 2 <= y & y <= x & 3 <= y"), atom("x = 3")).proven);
}

TEST_CASE("smtlib export")
{
    const std::string s = prover::to_smtlib(pure("x + 1 <= y & x != -2 & fun g = lambda k. k * 2 & g(x) = y"));
    CHECK(s == "(set-logic QF_UFNIA)\n"
               "(declare-fun |v_x| () Int)\n"
               "(declare-fun |v_y| () Int)\n"
               "(assert (<= (+ |v_x| 1) |v_y|))\n"
               "(assert (not (= |v_x| (- (- 1) 1))))\n"
               "(assert (= (let ((|b_k| |v_x|)) (* |b_k| 2)) |v_y|))\n"
               "(check-sat)\n(exit)\n");
    const std::string e = prover::to_smtlib(pure("f(x / 2) = cos(x)"));
    CHECK(e.find("(declare-fun |c_div| (Int Int) Int)") != std::string::npos);
    CHECK(e.find("(declare-fun |f_f| (Int) Int)") != std::string::npos);
}

TEST_CASE("external solver answers are trusted only toward proofs")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "klrace-solver-test";
    fs::create_directories(dir);
    auto script = [&](const std::string& name, const std::string& answer) {
        const fs::path p = dir / name;
        std::ofstream(p) << "#!/bin/sh\necho " << answer << "\n";
        fs::permissions(p, fs::perms::owner_all);
        return p.string();
    };
    // Nonlinear: x * x = 2 has no integer solution but the abstraction is sat.
    const Pure q = pure("x * x = 2");
    prover::Options o;
    o.solver = script("unsat.sh", "unsat");
    Prover yes(o);
    CHECK(yes.sat(q) == SatResult::Unsat);
    CHECK(yes.stats().solver_proofs == 1);

    o.solver = script("sat.sh", "sat");
    Prover no(o);
    CHECK(no.sat(pure("x = 1 & x = 2")) == SatResult::Unsat);  // internal proof stands
    CHECK(no.sat(q) == SatResult::Sat);

    o.solver = (dir / "missing-solver").string();
    Prover missing(o);
    CHECK(missing.sat(q) == SatResult::Sat);
    fs::remove_all(dir);
}

TEST_CASE("soundness: unsat, proven, compare and disjoint have no finite countermodel")
{
    Rng r(7);
    Space space(r);
    TermGen gen(r);
    int unsat = 0, proven = 0, related = 0;
    for (int round = 0; round < 1500; ++round) {
        Prover p;
        const Pure ctx = gen.pure();
        if (p.sat(ctx) == SatResult::Unsat) {
            ++unsat;
            INFO("unsat: " << to_string(ctx));
            CHECK_FALSE(space.any([&](const Model& m) { return eval(ctx, m); }));
        }
        const Atom goal = gen.atom();
        if (p.prove_pure(ctx, goal).proven) {
            ++proven;
            INFO("proven: " << to_string(ctx) << " |- " << to_string(goal));
            CHECK_FALSE(space.any([&](const Model& m) { return eval(ctx, m) && !eval(goal, m); }));
        }
        const SymPtr a = gen.term(), b = gen.term();
        const bool eq = p.compare(ctx, a, b), ne = p.disjoint(ctx, a, b);
        CHECK_FALSE((eq && ne));
        if (eq || ne) {
            ++related;
            INFO((eq ? "compare: " : "disjoint: ") << to_string(ctx) << " ; " << to_string(*a) << " ; "
                                                   << to_string(*b));
            CHECK_FALSE(space.any([&](const Model& m) { return eval(ctx, m) && ((eval(*a, m) == eval(*b, m)) != eq); }));
        }
        // Symmetry.
        CHECK(p.compare(ctx, b, a) == eq);
        CHECK(p.disjoint(ctx, b, a) == ne);
    }
    MESSAGE("unsat " << unsat << ", proven " << proven << ", related " << related);
    CHECK(unsat > 40);
    CHECK(proven > 40);
    CHECK(related > 40);
}

TEST_CASE("monotonicity: consistent strengthening keeps proofs")
{
    Rng r(11);
    TermGen gen(r);
    int checked = 0;
    for (int round = 0; round < 1500; ++round) {
        Prover p;
        Pure ctx = gen.pure();
        const Atom goal = gen.atom();
        if (!p.prove_pure(ctx, goal).proven)
            continue;
        Pure more = ctx;
        more.push_back(gen.atom());
        if (p.sat(more) != SatResult::Sat)
            continue;
        ++checked;
        INFO(to_string(more) << " |- " << to_string(goal));
        CHECK(p.prove_pure(more, goal).proven);
    }
    CHECK(checked > 20);
}
