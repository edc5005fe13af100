#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>

#include "klrace/symheap.hpp"

namespace klrace::prover {

enum class SatResult { Sat, Unsat, Unknown };

std::string_view to_string(SatResult r);

struct ProofResult {
    bool proven = false;
    std::string note;  // why a proof failed ("budget", "countermodel", ...)
};

/// How two terms relate under a context.
enum class Relation { Equal, Distinct, Unknown };

struct Options {
    std::size_t max_steps = 10'000;  // elimination steps per query
    std::size_t max_cases = 4'096;   // case splits per query
    std::set<std::string> arrays;    // array base names, pairwise disjoint
    std::string solver;              // optional SMT-LIB2 solver executable
};

struct Stats {
    std::size_t queries = 0;
    std::size_t unknown = 0;
    std::size_t solver_calls = 0;
    std::size_t solver_proofs = 0;
};

/// Incomplete prover over linear integer arithmetic with uninterpreted
/// symbols. Every positive answer (proven / unsat / Equal / Distinct) is
/// sound; resource exhaustion fails toward the negative answer.
///
/// Array contents are unfolded by case analysis: lambda bodies are
/// instantiated, eta layers split on their condition, definitions `fun g = F`
/// found in the context are expanded, and undefined function symbols become
/// uninterpreted terms with functional consistency.
class Prover {
public:
    explicit Prover(Options opts = {});

    SatResult sat(const sym::Pure& ctx);
    ProofResult prove_pure(const sym::Pure& ctx, const sym::Atom& goal);
    bool prove_all(const sym::Pure& ctx, const sym::Pure& goals);

    Relation relate(const sym::Pure& ctx, const sym::SymPtr& a, const sym::SymPtr& b);
    /// ctx entails a = b, and ctx is not refutable.
    bool compare(const sym::Pure& ctx, const sym::SymPtr& a, const sym::SymPtr& b);
    /// ctx entails a != b, and ctx is not refutable. Addresses of the form
    /// `A + off` over distinct array bases are disjoint by axiom.
    bool disjoint(const sym::Pure& ctx, const sym::SymPtr& a, const sym::SymPtr& b);

    /// Both heaps' pure parts as the context (they must be renamed apart).
    bool compare(const sym::SymbolicHeap& h1, const sym::SymPtr& e1, const sym::SymbolicHeap& h2,
                 const sym::SymPtr& e2);
    bool disjoint(const sym::SymbolicHeap& h1, const sym::SymPtr& e1, const sym::SymbolicHeap& h2,
                  const sym::SymPtr& e2);

    /// ante |- cons. Spatial conjuncts must match one-to-one (addresses,
    /// bounds and contents proven equal); the consequent's pure atoms must
    /// then follow from the antecedent. Non-rigid logic names of the
    /// consequent that the antecedent does not mention are not instantiated,
    /// so such entailments are not proven.
    ProofResult prove_entailment(const sym::SymbolicHeap& ante, const sym::SymbolicHeap& cons);

    const Stats& stats() const { return stats_; }
    const Options& options() const { return opts_; }

private:
    Options opts_;
    Stats stats_;

    SatResult check(const sym::Pure& atoms);
};

/// SMT-LIB2 script asserting `atoms` (QF_UFLIA plus nonlinear multiplication).
/// Array contents are encoded with ite; collective snapshots are left
/// uninterpreted.
std::string to_smtlib(const sym::Pure& atoms);

/// Runs `solver` on the script and returns its first answer line
/// ("sat", "unsat", "unknown"), or nullopt when it could not be run.
std::optional<std::string> run_solver(const std::string& solver, const std::string& script);

}  // namespace klrace::prover
