#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace klrace::prover::detail {

using Coeff = std::int64_t;

struct Overflow {};

/// sum(c[i] * x_i) + k
struct Lin {
    std::map<int, Coeff> c;
    Coeff k = 0;

    bool constant() const { return c.empty(); }
};

Lin lin_const(Coeff k);
Lin lin_var(int id);
Lin add(const Lin& a, const Lin& b);
Lin sub(const Lin& a, const Lin& b);
Lin scale(const Lin& a, Coeff s);

/// `e = 0` or `e >= 0`.
struct Constraint {
    enum class Kind { Eq, Ge };
    Kind kind = Kind::Ge;
    Lin e;
};

Constraint eq0(Lin e);
Constraint ge0(Lin e);

enum class Sat3 { Sat, Unsat, Unknown };

struct Budget {
    std::size_t steps = 0;
    std::size_t max = 10'000;
    bool exhausted() const { return steps > max; }
};

/// Satisfiability of a conjunction over the integers. Unsat is exact (every
/// derived constraint is an integer consequence); Sat means the tightened
/// rational relaxation is feasible. Budget or overflow gives Unknown.
Sat3 solve(std::vector<Constraint> cs, Budget& budget);

std::string to_string(const Lin& e);

}  // namespace klrace::prover::detail
