#pragma once

// Oracle exactness: schedule counts for two independent threads and replay of
// race witnesses.

#include <algorithm>
#include <optional>
#include <sstream>

#include "generators.hpp"
#include "klrace/concrete.hpp"
#include "klrace/frontend.hpp"

namespace klrace::testing {

inline std::string random_statement(Rng& r)
{
    static const char* values[] = {"0", "1", "tid", "x", "g", "x + 1", "tid + g"};
    const std::string v = values[r.pick(7)], i = std::to_string(r.pick(2));
    switch (r.pick(4)) {
    case 0: return "A[" + i + "] = " + v + ";";
    case 1: return "x = " + v + ";";
    case 2: return "g = " + v + ";";
    default: return "x = A[" + i + "];";
    }
}

/// Thread 0 runs `a` statements, every other thread `b`, optionally followed
/// by a barrier and one more statement each.
inline std::string two_branch_kernel(Rng& r, int a, int b, bool barrier)
{
    std::ostringstream os;
    os << "shared int g;\nkernel(int A[]) {\n  int x;\n  if (tid == 0) {";
    for (int i = 0; i < a; ++i)
        os << " " << random_statement(r);
    os << " } else {";
    for (int i = 0; i < b; ++i)
        os << " " << random_statement(r);
    os << " }\n";
    if (barrier)
        os << "  barrier;\n  " << random_statement(r) << "\n";
    os << "}\n";
    return os.str();
}

/// Steps of thread `t` when it runs alone to completion.
inline std::size_t solo_steps(const Kernel& k, const concrete::Inputs& in, int t)
{
    auto g = concrete::initial_state(k, 2, in);
    std::size_t n = 0;
    for (;;) {
        const auto ready = concrete::runnable(g);
        if (std::find(ready.begin(), ready.end(), t) == ready.end())
            return n;
        auto s = concrete::step_global(k, g, t, concrete::Semantics::Epoch);
        ++n;
        if (s.kind != concrete::GlobalStep::Kind::Next)
            return n;
        g = std::move(s.state);
    }
}

inline std::size_t choose(std::size_t n, std::size_t k)
{
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

struct OracleExactStats {
    std::size_t kernels = 0;
    std::size_t count_mismatches = 0;
    std::size_t witnesses = 0;
    std::size_t replay_failures = 0;
    std::vector<std::string> examples;
};

inline OracleExactStats oracle_exactness(std::uint64_t seed, int rounds)
{
    OracleExactStats st;
    Rng r(seed);
    auto fail = [&](std::string what) {
        if (st.examples.size() < 5)
            st.examples.push_back(std::move(what));
    };
    concrete::Inputs in;
    in.arrays["A"] = {0, 0};
    for (int round = 0; round < rounds; ++round) {
        const int a = r.pick(5), b = r.pick(5);
        const bool barrier = round % 3 == 2;
        const std::string src = two_branch_kernel(r, a, b, barrier);
        const Kernel k = *parse_kernel(src).kernel;
        ++st.kernels;

        if (!barrier) {
            const std::size_t sa = solo_steps(k, in, 0), sb = solo_steps(k, in, 1);
            concrete::OracleOptions o;
            o.count_schedules = true;
            const auto v = concrete::run_oracle(k, 2, in, o);
            if (v.maximal_schedules != choose(sa + sb, sa) || v.pruned_schedules != 0) {
                ++st.count_mismatches;
                fail(src + ": " + std::to_string(v.maximal_schedules) + " schedules, expected C(" +
                     std::to_string(sa + sb) + ", " + std::to_string(sa) + ")");
            }
        }

        const auto v = concrete::run_oracle(k, 2, in);
        if (v.kind != concrete::OracleVerdict::Kind::Race)
            continue;
        ++st.witnesses;
        auto ids = [](const concrete::Schedule& s) {
            std::vector<int> out;
            for (const auto& x : s)
                out.push_back(x.thread);
            return out;
        };
        auto at_point = [&](const concrete::ReplayResult& rr) -> std::optional<std::string> {
            for (const auto& rel : rr.releases)
                if ((rel.final && v.witness_point == "final") ||
                    (!rel.final && v.witness_point == "epoch " + std::to_string(rel.epoch)))
                    return concrete::digest(rel.shared);
            return std::nullopt;
        };
        const auto r1 = concrete::replay(k, 2, in, ids(v.witness));
        const auto r2 = concrete::replay(k, 2, in, ids(v.witness_alt));
        const auto d1 = at_point(r1), d2 = at_point(r2);
        if (!d1 || !d2 || *d1 == *d2) {
            ++st.replay_failures;
            fail(src + ": witness at " + v.witness_point + " does not replay to divergent states");
        }
    }
    return st;
}

}  // namespace klrace::testing
