#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "klrace/ast.hpp"
#include "klrace/prover.hpp"
#include "klrace/symheap.hpp"

namespace klrace::symexec {

/// Rigid symbol for the number of launched threads.
inline constexpr const char* kThreads = "nthreads";

/// Formula context for launch preconditions of `k`: shared variables are
/// the kernel's shared scalars and arrays, `nthreads` is rigid.
sym::FormulaContext formula_context(const Kernel& k);

struct Config {
    int loop_bound = 3;             // back-edge traversals per heap
    std::size_t max_heaps = 64;     // heaps per CFG node
    sym::Pure preconditions;        // extra launch preconditions
    bool threads_fit_arrays = true; // nthreads <= size(a) for every array
    prover::Options prover;         // `arrays` is filled from the kernel
};

/// Result of one command step on one heap.
struct Outcome {
    enum class Kind { Heaps, Bottom, Top };
    Kind kind = Kind::Heaps;
    std::vector<sym::SymbolicHeap> heaps;
    std::string reason;  // Bottom
};

struct SetOutcome {
    bool bottom = false;
    std::vector<sym::SymbolicHeap> heaps;
    std::size_t witness = 0;  // index of the heap that stepped to bottom
    std::string reason;
    std::size_t pruned = 0;   // heaps dropped as infeasible
};

/// Two thread instances whose footprints may overlap with values that could
/// not be proven equal.
struct RaceWitness {
    std::size_t heap_i = 0, heap_j = 0;  // indices into the checked set
    std::string location;                // "A[k]" or a scalar name
    std::string condition;               // when the cells overlap
    std::string value_i, value_j;
};

struct RaceCheck {
    bool race_free = true;
    std::optional<RaceWitness> witness;
};

struct BarrierOutcome {
    bool race = false;
    std::optional<RaceWitness> witness;
    std::vector<sym::SymbolicHeap> heaps;
};

/// One epoch's writes to an array, newest first, over the index binder `k`.
struct EpochLayer {
    sym::Pure cond;
    sym::FunPtr value;
};

struct EpochChain {
    std::vector<EpochLayer> layers;
    sym::FunPtr base;  // contents at the start of the epoch
};

/// Follows `contents` through definitions in `h` down to the first rigid or
/// undefined symbol.
EpochChain epoch_chain(const sym::SymbolicHeap& h, const sym::FunPtr& contents);

/// Symbolic execution of one kernel. Owns the fresh-name supply, so results
/// depend only on the order of calls.
class Executor {
public:
    Executor(const Kernel& k, prover::Prover& p, Config cfg = {});

    sym::SymbolicHeap initial_heap() const;

    Outcome exec_command(const Command& c, const sym::SymbolicHeap& h);
    SetOutcome exec_set(const Command& c, const std::vector<sym::SymbolicHeap>& s);

    RaceCheck no_race(const std::vector<sym::SymbolicHeap>& s);

    /// NoRace, then the epoch commit.
    BarrierOutcome exec_barrier(const std::vector<sym::SymbolicHeap>& s);

    /// Folds the epoch writes of every heap into fresh rigid snapshots.
    std::vector<sym::SymbolicHeap> commit(const std::vector<sym::SymbolicHeap>& s);

    const Kernel& kernel() const { return k_; }
    prover::Prover& prover() { return p_; }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    const Kernel& k_;
    prover::Prover& p_;
    Config cfg_;
    sym::NameSupply names_;
    int snapshots_ = 0;
    std::vector<std::string> notes_;

    std::optional<std::string> check_divisors(const sym::Pure& ctx, const sym::SymPtr& e);
    std::optional<std::string> check_bounds(const sym::Pure& ctx, const std::string& array, const sym::SymPtr& e);
    std::vector<sym::Pure> dnf(const BoolExpr& b, bool positive) const;
    sym::SymbolicHeap assign(const sym::SymbolicHeap& h, const std::string& v, const sym::SymPtr& value);
};

enum class Verdict { RaceFree, PotentialRace, DefiniteError, Inconclusive };

std::string_view to_string(Verdict v);

struct Finding {
    enum class Kind { Race, Error };
    Kind kind = Kind::Error;
    int node = -1;
    SourceLoc loc;
    std::string message;
    std::string heap, other_heap;  // offending heap(s)
    std::optional<RaceWitness> race;
};

struct AnalysisReport {
    Verdict verdict = Verdict::RaceFree;
    std::vector<Finding> findings;
    std::vector<std::string> notes;  // bounds that fired, pruning, divergence
    std::map<int, std::vector<sym::SymbolicHeap>> states;  // heaps after each node
    std::size_t heaps_explored = 0;
    std::size_t barriers_checked = 0;
    prover::Stats prover;
};

AnalysisReport analyze(const Kernel& k, const Config& cfg = {});

}  // namespace klrace::symexec
