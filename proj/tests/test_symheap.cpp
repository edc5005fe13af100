#include <doctest.h>

#include <set>

#include "generators.hpp"
#include "klrace/symheap.hpp"

using namespace klrace;
using namespace klrace::sym;
using klrace::testing::ChainGen;
using klrace::testing::Rng;

namespace {

SymbolicHeap heap(std::string_view text, const FormulaContext& ctx = {}) { return parse_heap(text, ctx); }

std::string show(const SymbolicHeap& h) { return to_string(h); }

}  // namespace

TEST_CASE("subst rewrites free occurrences")
{
    auto h = heap("x = 3 :: emp");
    auto out = subst(h, *SymExpr::var("x"), SymExpr::logic("x'"));
    CHECK(show(out) == "x' = 3 :: emp");

    auto f = parse_fun("eta(i. i = tid; g; h)");
    auto g = subst(f, *SymExpr::tid(), SymExpr::logic("t", true));
    CHECK(to_string(*g) == "eta(i. i = t; g; h)");

    auto same = subst(h, *SymExpr::var("zz"), SymExpr::constant(1));
    CHECK(equal(same, h));
}

TEST_CASE("subst does not touch bound indices of the same spelling")
{
    auto f = parse_fun("lambda k. k + x");
    auto g = subst(f, *SymExpr::var("k"), SymExpr::constant(9));
    CHECK(equal(*f, *g));
    auto h = subst(f, *SymExpr::var("x"), SymExpr::constant(9));
    CHECK(to_string(*h) == "lambda k. (k + 9)");
}

TEST_CASE("substitutions on distinct variables commute")
{
    Rng r(7);
    const std::vector<std::string> names{"x", "y", "z"};
    for (int trial = 0; trial < 300; ++trial) {
        ChainGen gen(r);
        SymbolicHeap h;
        h.pure.push_back(Atom::eq(SymExpr::var("y"), gen.term(false)));
        h.pure.push_back(Atom::le(SymExpr::var("z") + SymExpr::var("x"), gen.term(false)));
        h.spatial.push_back(Cell::whole("A", gen.chain(3)));
        const auto v = names[static_cast<std::size_t>(r.pick(3))];
        auto w = names[static_cast<std::size_t>(r.pick(3))];
        if (w == v)
            w = v == "x" ? "y" : "x";
        // e avoids w and d avoids v.
        auto e = SymExpr::constant(r.range(-3, 3)) + SymExpr::tid();
        auto d = SymExpr::logic("d'");
        auto a = subst(subst(h, *SymExpr::var(v), e), *SymExpr::var(w), d);
        auto b = subst(subst(h, *SymExpr::var(w), d), *SymExpr::var(v), e);
        CHECK(equal(a, b));
    }
}

TEST_CASE("fresh names are distinct and carry the hint")
{
    NameSupply names;
    auto a = names.primed("v");
    auto b = names.primed("v");
    CHECK(a != b);
    CHECK(a == "v'1");
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i)
        seen.insert(names.primed("v"));
    CHECK(seen.size() == 1000);
}

TEST_CASE("rename instantiates tid and tags private names")
{
    const FormulaContext ctx{{"A"}, {"i", "j"}};
    auto i = SymExpr::logic("i", true);
    CHECK(show(rename(i, heap("tid = 3 :: emp"))) == "i = 3 :: emp");

    auto h = heap("v = tid :: A |-> lambda k. k", ctx);
    CHECK(show(rename(i, h)) == "v@i = i :: A |-> A[0, (size(A) - 1) | lambda k. k]");

    auto big = heap("v = tid & x'1 = v + 1 & fun g'2 = eta(k. k = tid; lambda k. x'1; f0) :: A |-> A[0, 3 | g'2]",
                    {{"A"}, {"f0"}});
    auto hi = rename(i, big);
    auto hj = rename(SymExpr::logic("j", true), big);
    auto fi = free_names(hi), fj = free_names(hj);
    for (const auto& n : fi.vars)
        if (n != "A")
            CHECK(fj.vars.count(n) == 0);
    for (const auto& n : fi.logic)
        if (n != "i")
            CHECK(fj.logic.count(n) == 0);
    CHECK(fi.functions.count("f0") == 1);
    CHECK(fi.functions.count("g'2@i") == 1);
    CHECK(equal(rename(i, hi), hi));
}

TEST_CASE("rename tags shared scalars written in the epoch")
{
    auto h = heap("g = 1 :: emp", {{"g"}, {}});
    CHECK(show(rename(SymExpr::logic("i", true), h)) == "g = 1 :: emp");
    CHECK(show(rename(SymExpr::logic("i", true), h, {"g"})) == "g@i = 1 :: emp");
}

TEST_CASE("eval_fexpr follows the eta definition")
{
    Model m;
    m.tid = 3;
    CHECK(eval_fexpr(*parse_fun("lambda k. 0"), m, 5) == 0);
    auto f = parse_fun("eta(k. k = tid; lambda k. 1; lambda k. 0)");
    for (Value i = 0; i < 8; ++i)
        CHECK(eval_fexpr(*f, m, i) == (i == 3 ? 1 : 0));
}

TEST_CASE("nested eta chain is last-writer-wins")
{
    // Writes in program order: A[k] = 10 for k <= 4, then A[k] = 20 for k >= 3.
    auto f = parse_fun("eta(k. 3 <= k; lambda k. 20; eta(k. k <= 4; lambda k. 10; lambda k. 0))");
    std::vector<Value> array(8, 0);
    for (Value k = 0; k <= 4; ++k)
        array[static_cast<std::size_t>(k)] = 10;
    for (Value k = 3; k < 8; ++k)
        array[static_cast<std::size_t>(k)] = 20;
    Model m;
    for (Value k = 0; k < 8; ++k)
        CHECK(eval_fexpr(*f, m, k) == array[static_cast<std::size_t>(k)]);
}

TEST_CASE("satisfies: points-to, emp and segments")
{
    Model m;
    m.vars["x"] = 100;
    m.heap = {{100, 7}};
    CHECK(satisfies(m, heap("true :: x |-> 7")));
    CHECK_FALSE(satisfies(m, heap("true :: x |-> 8")));
    CHECK_FALSE(satisfies(m, heap("true :: emp")));

    Model empty;
    empty.vars["x"] = 100;
    CHECK(satisfies(empty, heap("true :: emp")));
    CHECK_FALSE(satisfies(empty, heap("true :: x |-> 7")));

    Model arr;
    arr.bases["A"] = 40;
    arr.sizes["A"] = 4;
    for (Value k = 0; k < 4; ++k)
        arr.heap[40 + k] = k * k;
    CHECK(satisfies(arr, heap("true :: A |-> A[0, 3 | lambda k. k * k]")));
    CHECK_FALSE(satisfies(arr, heap("true :: A |-> A[0, 2 | lambda k. k * k]")));
    CHECK(satisfies(arr, heap("true :: A |-> lambda k. k * k")));
    arr.heap[43] = 0;
    CHECK_FALSE(satisfies(arr, heap("true :: A |-> A[0, 3 | lambda k. k * k]")));
}

TEST_CASE("satisfies requires a disjoint split")
{
    Model m;
    m.vars["x"] = 1;
    m.vars["y"] = 1;
    m.heap = {{1, 5}};
    CHECK_FALSE(satisfies(m, heap("true :: x |-> 5 * y |-> 5")));
    m.vars["y"] = 2;
    m.heap[2] = 5;
    CHECK(satisfies(m, heap("true :: x |-> 5 * y |-> 5")));
}

TEST_CASE("satisfies searches existential witnesses")
{
    Model m;
    m.vars["v"] = 4;
    CHECK(satisfies(m, heap("v = v'1 + 1 & v'1 <= 3 :: emp")));
    CHECK_FALSE(satisfies(m, heap("v = v'1 + 1 & v'1 <= 2 :: emp")));
    // Witness found by search rather than by a defining equation.
    CHECK(satisfies(m, heap("v'1 <= v & v <= v'1 * 2 & v'1 != 2 :: emp")));

    Model tiny;
    tiny.search_budget = 100;
    CHECK_THROWS_AS(satisfies(tiny, heap("a' + b' + c' = 0 :: emp")), DomainTooLarge);
}

TEST_CASE("satisfies respects substitution of witnesses")
{
    Rng r(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Value c = r.range(-4, 4);
        const Value v = r.range(-4, 4);
        Model m;
        m.vars["v"] = v;
        auto h = heap("v = v'1 + 2 & v'1 <= 3 :: emp");
        auto inst = subst(h, *SymExpr::logic("v'1"), SymExpr::constant(c));
        if (satisfies(m, inst))
            CHECK(satisfies(m, h));
    }
}

TEST_CASE("simplify drops trivial eta layers")
{
    auto g = parse_fun("g");
    CHECK(equal(*simplify(parse_fun("eta(k. 1 = 0; f; g)")), *g));
    CHECK(to_string(*simplify(parse_fun("eta(k. 0 = 0; f; g)"))) == "f");
    CHECK(to_string(*simplify(parse_fun("eta(k. k = 1; lambda k. 2; eta(k. k = 1; lambda k. 3; g))"))) ==
          "eta(k. k = 1; lambda k. 2; g)");
    auto h = simplify(heap("x = 1 & x = 1 & 0 <= 2 :: emp"));
    CHECK(show(h) == "x = 1 :: emp");
}

TEST_CASE("simplify preserves chain semantics")
{
    Rng r(1234);
    for (int trial = 0; trial < 500; ++trial) {
        ChainGen gen(r);
        auto f = gen.chain(4);
        auto s = simplify(f);
        auto m = klrace::testing::chain_model(r);
        for (Value k = 0; k < 8; ++k)
            REQUIRE_MESSAGE(eval_fexpr(*f, m, k) == eval_fexpr(*s, m, k), to_string(*f) << " vs " << to_string(*s));
    }
}

TEST_CASE("simplify removes definitions nothing references")
{
    auto h = simplify(heap("fun g'1 = lambda k. 0 & fun g'2 = eta(k. k = 0; lambda k. 1; g'1) :: A |-> A[0, 3 | g'2]"));
    CHECK(h.pure.size() == 2);
    auto dead = simplify(heap("fun g'1 = lambda k. 0 :: A |-> A[0, 3 | f]"));
    CHECK(dead.pure.empty());
}

TEST_CASE("printer and parser round trip")
{
    const FormulaContext ctx{{"A", "g"}, {"N'", "f_A", "i"}};
    const char* samples[] = {
        "0 <= tid & (tid + 1) <= N' :: A |-> A[0, (size(A) - 1) | f_A]",
        "fun g'3 = eta(k. 0 <= tid & k = tid; lambda k. 5; f_A) & x = g'3((tid - 1)) :: A |-> A[0, 3 | g'3]",
        "x'1 != (-3) & cos(x) = sqrt(y) :: x |-> 7 * y |-> (x % 2) [g := (tid * 2)]",
        "fun s'1 = collective(k, w < N'. {0 <= w & v@w = w; k = w; lambda k. v@w}, {true; k = 0 | k = 1; lambda k. 1}; f_A) :: emp",
        "a = [lambda k. (k + 1)](3) :: emp",
    };
    for (const char* s : samples) {
        auto h = parse_heap(s, ctx);
        auto printed = to_string(h);
        auto again = parse_heap(printed, ctx);
        CHECK_MESSAGE(equal(h, again), s << " -> " << printed);
        CHECK(to_string(again) == printed);
    }
    CHECK_THROWS_AS(parse_heap("x = :: emp"), FormulaError);
    CHECK_THROWS_AS(parse_heap("x = 1 :: emp ]"), FormulaError);
}

TEST_CASE("collective evaluates the writer's value or falls back to the base")
{
    // Each thread w < N' wrote A[w] = w + 10; other cells keep the base.
    auto f = parse_fun("collective(k, w < N'. {0 <= w; k = w; lambda k. w + 10}; lambda k. 0)", {{}, {"N'"}});
    Model m;
    m.vars["N'"] = 3;
    for (Value k = 0; k < 6; ++k)
        CHECK(eval_fexpr(*f, m, k) == (k < 3 ? k + 10 : 0));
}
