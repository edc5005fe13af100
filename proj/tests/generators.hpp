#pragma once

// Hand-rolled random generators shared by the property tests and the
// acceptance suite.

#include <random>

#include "klrace/symheap.hpp"

namespace klrace::testing {

using sym::Atom;
using sym::FunctionExpr;
using sym::FunPtr;
using sym::Pure;
using sym::SymExpr;
using sym::SymPtr;
using sym::Value;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(g_); }
    Value range(Value lo, Value hi) { return std::uniform_int_distribution<Value>(lo, hi)(g_); }
    bool coin() { return pick(2) == 1; }
    std::mt19937_64& engine() { return g_; }

private:
    std::mt19937_64 g_;
};

/// Random eta chains over index binder `k`, reading tid, a private variable
/// `x` and constants, on top of a rigid base symbol `f0` or a constant lambda.
class ChainGen {
public:
    explicit ChainGen(Rng& r) : r_(r) {}

    SymPtr leaf(bool with_index)
    {
        switch (r_.pick(with_index ? 4 : 3)) {
        case 0: return SymExpr::constant(r_.range(-3, 7));
        case 1: return SymExpr::tid();
        case 2: return SymExpr::var("x");
        default: return SymExpr::bound("k");
        }
    }

    SymPtr term(bool with_index)
    {
        auto a = leaf(with_index);
        switch (r_.pick(4)) {
        case 0: return a + leaf(with_index);
        case 1: return a - SymExpr::constant(r_.range(0, 2));
        default: return a;
        }
    }

    Atom cond_atom()
    {
        auto k = SymExpr::bound("k");
        switch (r_.pick(6)) {
        case 0: return Atom::eq(k, term(false));
        case 1: return Atom::le(k, term(false));
        case 2: return Atom::ne(k, term(false));
        case 3: return Atom::le(term(false), k);
        case 4: return Atom::eq(SymExpr::constant(r_.range(0, 1)), SymExpr::constant(r_.range(0, 1)));
        default: return Atom::le(term(false), term(false));
        }
    }

    FunPtr base()
    {
        if (r_.coin())
            return FunctionExpr::named("f0", true);
        return FunctionExpr::lambda("k", term(true));
    }

    FunPtr layer(FunPtr below)
    {
        Pure cond;
        const int n = 1 + r_.pick(3);
        for (int i = 0; i < n; ++i)
            cond.push_back(cond_atom());
        FunPtr then_f = r_.pick(5) == 0 ? below : FunctionExpr::lambda("k", term(true));
        return FunctionExpr::eta("k", std::move(cond), then_f, std::move(below));
    }

    FunPtr chain(int max_depth)
    {
        FunPtr f = base();
        const int depth = r_.pick(max_depth + 1);
        for (int i = 0; i < depth; ++i)
            f = layer(f);
        return f;
    }

private:
    Rng& r_;
};

/// A model binding tid, x, size(A) and an interpretation of f0 on 0..7.
inline sym::Model chain_model(Rng& r)
{
    sym::Model m;
    m.tid = r.range(0, 3);
    m.vars["x"] = r.range(-4, 4);
    m.sizes["A"] = 8;
    for (Value i = 0; i < 8; ++i)
        m.funs["f0"][i] = r.range(-5, 5);
    return m;
}

}  // namespace klrace::testing
