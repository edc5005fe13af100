#include <doctest.h>

#include <random>

#include "test_util.hpp"

using namespace klrace;
using klrace::testing::parse_ok;

namespace {

int count_kind(const Kernel& k, Command::Kind kind)
{
    int n = 0;
    for (const auto& node : k.nodes)
        if (node.kind == CfgNode::Kind::Command && node.command.kind == kind)
            ++n;
    return n;
}

std::string first_error(const std::string& src)
{
    auto r = parse_kernel(src);
    REQUIRE_FALSE(r.ok());
    for (const auto& d : r.diagnostics)
        if (d.severity == Diagnostic::Severity::Error)
            return d.str();
    return {};
}

// Random surface programs for the print/parse round trip.
class ProgramGen {
public:
    explicit ProgramGen(unsigned seed) : rng_(seed) {}

    std::string program()
    {
        std::string s = "shared int g;\nkernel k(int A[], int B[], int n) {\n  int x;\n  int y;\n";
        s += block(0);
        s += "}\n";
        return s;
    }

private:
    std::mt19937 rng_;

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string expr(int depth)
    {
        switch (depth > 2 ? pick(4) : pick(8)) {
        case 0: return std::to_string(pick(5));
        case 1: return "tid";
        case 2: return std::vector<std::string>{"x", "y", "n", "g"}[static_cast<std::size_t>(pick(4))];
        case 3: return "size(" + std::string(pick(2) ? "A" : "B") + ")";
        case 4: return "(" + expr(depth + 1) + " + " + expr(depth + 1) + ")";
        case 5: return expr(depth + 1) + " * " + expr(depth + 1);
        case 6: return std::string(pick(2) ? "A" : "B") + "[" + expr(depth + 1) + "]";
        default: return "-" + expr(depth + 1);
        }
    }

    std::string cond(int depth)
    {
        switch (depth > 1 ? pick(3) : pick(6)) {
        case 0: return expr(1) + " < " + expr(1);
        case 1: return expr(1) + " == " + expr(1);
        case 2: return expr(1) + " >= " + expr(1);
        case 3: return "(" + cond(depth + 1) + ") && (" + cond(depth + 1) + ")";
        case 4: return "!(" + cond(depth + 1) + ")";
        default: return "(" + cond(depth + 1) + ") || (" + cond(depth + 1) + ")";
        }
    }

    std::string stmt(int depth)
    {
        switch (depth > 1 ? pick(6) : pick(8)) {
        case 0: return "x = " + expr(0) + ";\n";
        case 1: return "y = A[" + expr(1) + "];\n";
        case 2: return std::string(pick(2) ? "A" : "B") + "[" + expr(1) + "] = " + expr(0) + ";\n";
        case 3: return "barrier;\n";
        case 4: return "assume(" + cond(0) + ");\n";
        case 5: return "g = " + expr(0) + ";\n";
        case 6: return "if (" + cond(0) + ") {\n" + block(depth + 1) + "} else {\n" + block(depth + 1) + "}\n";
        default: return "while (" + cond(0) + ") {\n" + block(depth + 1) + "}\n";
        }
    }

    std::string block(int depth)
    {
        std::string s;
        const int n = pick(4);
        for (int i = 0; i < n; ++i)
            s += stmt(depth);
        return s;
    }
};

}  // namespace

TEST_CASE("fig1 kernel parses with hoisted loads")
{
    Kernel k = klrace::testing::corpus_kernel("fig1.kl");
    CHECK(k.arrays() == std::vector<std::string>{"A", "B", "R"});
    // Two stores, each preceded by its hoisted loads, and one barrier.
    CHECK(count_kind(k, Command::Kind::Store) == 2);
    CHECK(count_kind(k, Command::Kind::Load) == 3);
    CHECK(count_kind(k, Command::Kind::Barrier) == 1);
    CHECK(k.command_count() == 6);
    CHECK(print_node(k, 2) == "__t1 = A[(tid - 1)]");
    CHECK(print_node(k, 4) == "R[tid] = (__t1 + __t2)");
    CHECK(validate_cfg(k).empty());
}

TEST_CASE("fig2 kernel parses")
{
    Kernel k = klrace::testing::corpus_kernel("fig2.kl");
    CHECK(k.shared_scalars() == std::vector<std::string>{"g"});
    CHECK(count_kind(k, Command::Kind::Assume) == 2);
    CHECK(count_kind(k, Command::Kind::Barrier) == 2);
}

TEST_CASE("empty kernel is start -> exit")
{
    Kernel k = parse_ok("kernel(int A[]) { }");
    REQUIRE(k.nodes.size() == 2);
    CHECK(k.succ[Kernel::kStart] == std::vector<int>{Kernel::kExit});
    CHECK(k.succ[Kernel::kExit].empty());
}

TEST_CASE("diagnostics carry locations")
{
    CHECK(first_error("kernel(int A[]) {\n  int v;\n  v = w;\n}") == "3:7: error: undeclared variable w");
    CHECK(first_error("kernel(int n) { int x; x = size(n); }").find("size() applied to scalar n") !=
          std::string::npos);
    CHECK(first_error("kernel(int A[]) { A[0] = 1 $ }").find("unexpected character '$'") != std::string::npos);
    CHECK(first_error("kernel(int A[]) { A[0] = ; }").find("expected expression") != std::string::npos);
    CHECK(first_error("kernel(private int A[]) { }").find("private arrays") != std::string::npos);
    CHECK(first_error("kernel(int A[]) { tid = 1; }").find("cannot assign to tid") != std::string::npos);
}

TEST_CASE("straight-line kernel is a chain")
{
    Kernel k = parse_ok("kernel(int A[]) { int x; x = 1; x = 2; x = 3; }");
    REQUIRE(k.command_count() == 3);
    CHECK(k.succ[0] == std::vector<int>{2});
    CHECK(k.succ[2] == std::vector<int>{3});
    CHECK(k.succ[3] == std::vector<int>{4});
    CHECK(k.succ[4] == std::vector<int>{Kernel::kExit});
}

TEST_CASE("if-then-else forms a diamond of assume guards")
{
    Kernel k = parse_ok("kernel(int A[]) { int x; if (tid < 2) { x = 1; } else { x = 2; } A[0] = x; }");
    // start -> assume(b) / assume(!b) -> arms -> store -> exit
    REQUIRE(k.succ[0].size() == 2);
    const auto& yes = k.nodes[static_cast<std::size_t>(k.succ[0][0])].command;
    const auto& no = k.nodes[static_cast<std::size_t>(k.succ[0][1])].command;
    CHECK(yes.kind == Command::Kind::Assume);
    CHECK(no.kind == Command::Kind::Assume);
    CHECK(print_bool(*no.cond) == "!(" + print_bool(*yes.cond) + ")");
    const auto pred = k.predecessors();
    int store = -1;
    for (std::size_t n = 0; n < k.nodes.size(); ++n)
        if (k.nodes[n].kind == CfgNode::Kind::Command && k.nodes[n].command.kind == Command::Kind::Store)
            store = static_cast<int>(n);
    REQUIRE(store > 0);
    CHECK(pred[static_cast<std::size_t>(store)].size() == 2);
}

TEST_CASE("while loop has a back-edge to its guard")
{
    Kernel k = parse_ok("kernel(int A[]) { int i; i = 0; while (i < 3) { i = i + 1; } }");
    // nodes: 2 i=0, 3 assume(i<3), 4 assume(!(i<3)), 5 i=i+1
    CHECK(k.succ[2] == std::vector<int>{3, 4});
    CHECK(k.succ[5] == std::vector<int>{3, 4});
    CHECK(k.succ[4] == std::vector<int>{Kernel::kExit});
}

TEST_CASE("while guard with an array read reloads each iteration")
{
    Kernel k = parse_ok("kernel(int A[]) { int i; while (A[i] < 3) { i = i + 1; } }");
    // 2: __t1 = A[i], 3/4: guards, 5: body
    CHECK(k.nodes[2].command.kind == Command::Kind::Load);
    CHECK(k.succ[5] == std::vector<int>{2});
}

TEST_CASE("surface variants: then/do keywords, :=, newlines")
{
    Kernel a = parse_ok("kernel(int A[]) { int x\n x := 1\n if x = 1 then A[0] := 2 else A[0] := 3\n while x < 2 do x = x + 1 }");
    Kernel b = parse_ok("kernel(int A[]) { int x; x = 1; if (x == 1) { A[0] = 2; } else { A[0] = 3; } while (x < 2) { x = x + 1; } }");
    CHECK(structurally_equal(a, b));
}

TEST_CASE("round trip: print then parse is structurally identical")
{
    for (unsigned seed = 0; seed < 300; ++seed) {
        ProgramGen gen(seed);
        const std::string src = gen.program();
        auto r1 = parse_kernel(src);
        REQUIRE_MESSAGE(r1.ok(), src);
        const std::string printed = print_kernel(*r1.kernel);
        auto r2 = parse_kernel(printed);
        REQUIRE_MESSAGE(r2.ok(), printed);
        CHECK_MESSAGE(structurally_equal(*r1.kernel, *r2.kernel), src << "\n----\n" << printed);
    }
}

TEST_CASE("every generated CFG is well formed")
{
    for (unsigned seed = 1000; seed < 1200; ++seed) {
        ProgramGen gen(seed);
        Kernel k = parse_ok(gen.program());
        for (const auto& d : validate_cfg(k))
            CHECK_MESSAGE(d.severity != Diagnostic::Severity::Error, d.str());
        for (std::size_t n = 0; n < k.nodes.size(); ++n)
            if (static_cast<int>(n) != Kernel::kExit)
                CHECK_FALSE(k.succ[n].empty());
    }
}
