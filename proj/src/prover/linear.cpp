#include "linear.hpp"

#include <algorithm>
#include <numeric>

namespace klrace::prover::detail {

namespace {

Coeff checked(__int128 v)
{
    if (v > INT64_MAX || v < INT64_MIN)
        throw Overflow{};
    return static_cast<Coeff>(v);
}

Coeff floor_div(Coeff a, Coeff b)
{
    Coeff q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

Coeff gcd_of(const Lin& e)
{
    Coeff g = 0;
    for (const auto& [_, a] : e.c)
        g = std::gcd(g, a < 0 ? -a : a);
    return g;
}

enum class Norm { Ok, Trivial, Contradiction };

// Divides through by the coefficient gcd; Ge constants are floored, which is
// the integer tightening step.
Norm normalize(Constraint& c)
{
    for (auto it = c.e.c.begin(); it != c.e.c.end();)
        it = it->second == 0 ? c.e.c.erase(it) : std::next(it);
    if (c.e.c.empty()) {
        if (c.kind == Constraint::Kind::Eq)
            return c.e.k == 0 ? Norm::Trivial : Norm::Contradiction;
        return c.e.k >= 0 ? Norm::Trivial : Norm::Contradiction;
    }
    const Coeff g = gcd_of(c.e);
    if (g > 1) {
        if (c.kind == Constraint::Kind::Eq) {
            if (c.e.k % g != 0)
                return Norm::Contradiction;
            c.e.k /= g;
        } else {
            c.e.k = floor_div(c.e.k, g);
        }
        for (auto& [_, a] : c.e.c)
            a /= g;
    }
    return Norm::Ok;
}

// Replaces x by `by` in e.
Lin substitute(const Lin& e, int x, const Lin& by)
{
    auto it = e.c.find(x);
    if (it == e.c.end())
        return e;
    Lin rest = e;
    const Coeff a = it->second;
    rest.c.erase(x);
    return add(rest, scale(by, a));
}

}  // namespace

Lin lin_const(Coeff k)
{
    Lin l;
    l.k = k;
    return l;
}

Lin lin_var(int id)
{
    Lin l;
    l.c[id] = 1;
    return l;
}

Lin add(const Lin& a, const Lin& b)
{
    Lin out = a;
    out.k = checked(static_cast<__int128>(a.k) + b.k);
    for (const auto& [x, v] : b.c) {
        const Coeff s = checked(static_cast<__int128>(out.c[x]) + v);
        if (s == 0)
            out.c.erase(x);
        else
            out.c[x] = s;
    }
    return out;
}

Lin scale(const Lin& a, Coeff s)
{
    Lin out;
    if (s == 0)
        return out;
    out.k = checked(static_cast<__int128>(a.k) * s);
    for (const auto& [x, v] : a.c)
        out.c[x] = checked(static_cast<__int128>(v) * s);
    return out;
}

Lin sub(const Lin& a, const Lin& b) { return add(a, scale(b, -1)); }

Constraint eq0(Lin e) { return Constraint{Constraint::Kind::Eq, std::move(e)}; }
Constraint ge0(Lin e) { return Constraint{Constraint::Kind::Ge, std::move(e)}; }

Sat3 solve(std::vector<Constraint> cs, Budget& budget)
{
    try {
        // Equalities: eliminate through unit coefficients, otherwise split
        // into two inequalities.
        std::vector<Constraint> ge;
        for (bool again = true; again;) {
            again = false;
            std::vector<Constraint> next;
            for (auto& c : cs) {
                switch (normalize(c)) {
                case Norm::Contradiction: return Sat3::Unsat;
                case Norm::Trivial: continue;
                case Norm::Ok: next.push_back(std::move(c));
                }
            }
            cs = std::move(next);
            for (std::size_t i = 0; i < cs.size(); ++i) {
                if (cs[i].kind != Constraint::Kind::Eq)
                    continue;
                auto unit = std::find_if(cs[i].e.c.begin(), cs[i].e.c.end(),
                                         [](const auto& kv) { return kv.second == 1 || kv.second == -1; });
                if (unit == cs[i].e.c.end())
                    continue;
                const int x = unit->first;
                const Coeff a = unit->second;
                Lin by = cs[i].e;
                by.c.erase(x);
                by = scale(by, -a);  // x = -(rest)/a, and 1/a == a for a = +-1
                std::vector<Constraint> rest;
                for (std::size_t j = 0; j < cs.size(); ++j)
                    if (j != i)
                        rest.push_back({cs[j].kind, substitute(cs[j].e, x, by)});
                cs = std::move(rest);
                ++budget.steps;
                again = true;
                break;
            }
        }
        for (auto& c : cs) {
            if (c.kind == Constraint::Kind::Eq) {
                ge.push_back(ge0(c.e));
                ge.push_back(ge0(scale(c.e, -1)));
            } else {
                ge.push_back(std::move(c));
            }
        }

        for (;;) {
            if (budget.exhausted())
                return Sat3::Unknown;
            // Normalize and keep the tightest constant per coefficient vector.
            std::map<std::map<int, Coeff>, Coeff> tight;
            for (auto& c : ge) {
                switch (normalize(c)) {
                case Norm::Contradiction: return Sat3::Unsat;
                case Norm::Trivial: continue;
                case Norm::Ok: break;
                }
                auto [it, fresh] = tight.emplace(c.e.c, c.e.k);
                if (!fresh)
                    it->second = std::min(it->second, c.e.k);
            }
            // Opposite pairs: e + k1 >= 0 and -e + k2 >= 0 need k1 + k2 >= 0.
            for (const auto& [coeffs, k] : tight) {
                std::map<int, Coeff> neg;
                for (const auto& [x, a] : coeffs)
                    neg[x] = -a;
                auto it = tight.find(neg);
                if (it != tight.end() && static_cast<__int128>(k) + it->second < 0)
                    return Sat3::Unsat;
            }
            if (tight.empty())
                return Sat3::Sat;

            std::map<int, std::pair<std::size_t, std::size_t>> occ;  // var -> (pos, neg)
            for (const auto& [coeffs, _] : tight)
                for (const auto& [x, a] : coeffs)
                    (a > 0 ? occ[x].first : occ[x].second)++;
            int best = -1;
            long best_cost = 0;
            for (const auto& [x, pn] : occ) {
                const long cost = static_cast<long>(pn.first * pn.second) - static_cast<long>(pn.first + pn.second);
                if (best < 0 || cost < best_cost) {
                    best = x;
                    best_cost = cost;
                }
            }

            std::vector<Lin> pos, negs, keep;
            for (const auto& [coeffs, k] : tight) {
                Lin l;
                l.c = coeffs;
                l.k = k;
                auto it = coeffs.find(best);
                if (it == coeffs.end())
                    keep.push_back(std::move(l));
                else if (it->second > 0)
                    pos.push_back(std::move(l));
                else
                    negs.push_back(std::move(l));
            }
            budget.steps += pos.size() * negs.size() + 1;
            if (budget.exhausted())
                return Sat3::Unknown;
            ge.clear();
            for (auto& l : keep)
                ge.push_back(ge0(std::move(l)));
            for (const auto& p : pos) {
                const Coeff a = p.c.at(best);
                for (const auto& n : negs) {
                    const Coeff b = -n.c.at(best);
                    const Coeff g = std::gcd(a, b);
                    ge.push_back(ge0(add(scale(p, b / g), scale(n, a / g))));
                }
            }
        }
    } catch (const Overflow&) {
        return Sat3::Unknown;
    }
}

std::string to_string(const Lin& e)
{
    std::string s;
    for (const auto& [x, a] : e.c)
        s += (s.empty() ? "" : " + ") + std::to_string(a) + "*x" + std::to_string(x);
    return s + " + " + std::to_string(e.k);
}

}  // namespace klrace::prover::detail
