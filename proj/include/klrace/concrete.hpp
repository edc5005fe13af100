#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "klrace/ast.hpp"

namespace klrace::concrete {

using Value = std::int64_t;

/// Shared part of the store: shared scalars, array base locations and the
/// shared heap. Array extents are kept alongside so `size(a)` is answerable.
struct SharedState {
    std::map<std::string, Value> stack;
    std::map<std::string, Value> sizes;
    std::map<Value, Value> heap;

    bool operator==(const SharedState&) const = default;
};

struct ThreadState {
    std::map<std::string, Value> stack;
    std::map<Value, Value> heap;  // always empty: the language has no private allocation
    int tid = 0;

    bool operator==(const ThreadState&) const = default;
};

/// Raised by expression evaluation for runtime faults (division by zero,
/// unbound variable). step_thread turns it into a bottom outcome.
struct RuntimeFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Value eval_expr(const Expr& e, const ThreadState& t, const SharedState& s);
bool eval_bool(const BoolExpr& b, const ThreadState& t, const SharedState& s);

/// Deterministic interpretations of the uninterpreted operators.
Value apply_cos(Value x);
Value apply_sqrt(Value x);

struct StepOutcome {
    enum class Kind { Next, Bottom, Top, Suspended };
    Kind kind = Kind::Next;
    ThreadState thread;
    SharedState shared;
    std::string fault;  // Bottom only
};

StepOutcome step_thread(const Kernel& k, const Command& c, const ThreadState& t, const SharedState& s);

struct ThreadSlot {
    enum class Status { Running, Suspended, Done };
    ThreadState state;
    int pc = Kernel::kStart;  // last executed node
    Status status = Status::Running;
    std::optional<SharedState> snapshot;  // shared state observed on suspension / exit

    bool operator==(const ThreadSlot&) const = default;
};

struct GlobalState {
    std::vector<ThreadSlot> threads;
    SharedState shared;
    int epoch = 0;  // barriers released so far

    bool operator==(const GlobalState&) const = default;
};

enum class Semantics { Strict, Epoch };

std::string_view to_string(Semantics s);
std::optional<Semantics> parse_semantics(std::string_view s);

/// A synchronization point reached by a step: a barrier release or the final
/// implicit barrier once every thread has exited.
struct Release {
    int epoch = 0;
    bool final = false;
    SharedState shared;
};

struct GlobalStep {
    enum class Kind { Next, Bottom, Pruned };
    Kind kind = Kind::Next;
    GlobalState state;
    int node = -1;               // command node executed by the thread
    bool race = false;           // Bottom caused by the strict race rule
    std::string fault;           // Bottom reason
    std::vector<Release> releases;
};

struct Inputs {
    std::map<std::string, std::vector<Value>> arrays;
    std::map<std::string, Value> scalars;
};

/// Builds the initial global state. Every array parameter must be bound;
/// unbound scalars start at 0.
GlobalState initial_state(const Kernel& k, int threads, const Inputs& inputs);

/// Threads that can take a step in `g`.
std::vector<int> runnable(const GlobalState& g);

GlobalStep step_global(const Kernel& k, const GlobalState& g, int thread, Semantics mode);

struct ScheduleStep {
    int thread = 0;
    int node = 0;
    bool operator==(const ScheduleStep&) const = default;
};
using Schedule = std::vector<ScheduleStep>;

struct OracleOptions {
    Semantics semantics = Semantics::Epoch;
    std::size_t max_states = 2'000'000;
    bool count_schedules = false;  // disables state hashing and counts maximal schedules
};

struct OracleVerdict {
    enum class Kind { RaceFree, Race, RuntimeError, Inconclusive };
    Kind kind = Kind::RaceFree;

    // Race / RuntimeError witness. For epoch-mode races `witness` and
    // `witness_alt` reach the same synchronization point with different shared
    // states.
    Schedule witness;
    Schedule witness_alt;
    std::string witness_point;  // "epoch 0", "final", ...
    std::string fault;

    // Distinct shared-state digests observed per synchronization point.
    std::map<std::string, std::vector<std::string>> epoch_digests;

    std::size_t states_explored = 0;
    std::size_t maximal_schedules = 0;   // only with count_schedules
    std::size_t pruned_schedules = 0;
    bool strict_race_seen = false;
    bool epoch_divergence_seen = false;
    std::string note;
};

std::string_view to_string(OracleVerdict::Kind k);

OracleVerdict run_oracle(const Kernel& k, int threads, const Inputs& inputs, const OracleOptions& opts = {});

struct InvalidSchedule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ReplayResult {
    enum class Kind { Completed, Bottom, Pruned, Incomplete };
    Kind kind = Kind::Completed;
    GlobalState state;
    std::string fault;
    std::vector<Release> releases;
};

/// Re-executes `schedule` (a sequence of thread ids). Throws InvalidSchedule
/// when a step selects a thread that cannot run.
ReplayResult replay(const Kernel& k, int threads, const Inputs& inputs, const std::vector<int>& schedule,
                    Semantics mode = Semantics::Epoch);

std::string digest(const SharedState& s);
std::string describe(const SharedState& s, const Kernel& k);

}  // namespace klrace::concrete
