#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "klrace/ast.hpp"

namespace klrace::sym {

using Value = std::int64_t;

struct SymExpr;
struct FunctionExpr;
using SymPtr = std::shared_ptr<const SymExpr>;
using FunPtr = std::shared_ptr<const FunctionExpr>;

/// Logical terms. `Logic` names are existential (primed) unless rigid; rigid
/// symbols (thread count, fresh thread ids, barrier snapshots) are shared by
/// every thread instance and survive rename unchanged. `Bound` only occurs
/// under a lambda, eta or collective binder.
struct SymExpr {
    enum class Kind { Const, Var, Logic, Size, Tid, Op, Bound, App };
    Kind kind = Kind::Const;
    Value value = 0;
    std::string name;
    bool flag = false;  // Var: shared; Logic: rigid
    OpKind op = OpKind::Add;
    std::vector<SymPtr> args;  // Op operands, or the App index
    FunPtr fun;                // App

    static SymPtr constant(Value v);
    static SymPtr var(std::string name, bool shared = false);
    static SymPtr logic(std::string name, bool rigid = false);
    static SymPtr size(std::string array);
    static SymPtr tid();
    static SymPtr bound(std::string name);
    static SymPtr make_op(OpKind op, std::vector<SymPtr> args);
    static SymPtr app(FunPtr f, SymPtr index);

    bool is_const() const { return kind == Kind::Const; }
};

SymPtr operator+(const SymPtr& a, const SymPtr& b);
SymPtr operator-(const SymPtr& a, const SymPtr& b);
SymPtr operator*(const SymPtr& a, const SymPtr& b);
SymPtr operator+(const SymPtr& a, Value b);
SymPtr operator-(const SymPtr& a, Value b);

/// Pure atom. `Def` binds a function symbol: `fun g = F`.
struct Atom {
    enum class Kind { Eq, Ne, Le, Def };
    Kind kind = Kind::Eq;
    SymPtr lhs, rhs;
    std::string name;  // Def
    bool rigid = false;  // Def: the defined symbol is rigid
    FunPtr fun;          // Def

    static Atom eq(SymPtr a, SymPtr b);
    static Atom ne(SymPtr a, SymPtr b);
    static Atom le(SymPtr a, SymPtr b);
    static Atom lt(SymPtr a, SymPtr b);  // a + 1 <= b
    static Atom def(std::string name, FunPtr f, bool rigid = false);
    static Atom falsum();  // 1 <= 0

    /// The complement as a disjunction-free atom when one exists (Def has none).
    std::optional<Atom> negate() const;
};

using Pure = std::vector<Atom>;

struct CollectiveMember {
    Pure context;              // writer-instance facts, tid replaced by the writer binder
    std::vector<Pure> writes;  // one condition per write layer, over the index binder
    FunPtr chain;              // writer's array function at the end of the epoch
};

/// Array contents. Eta is `eta(k. cond; then; else)`: `then(k)` where cond
/// holds, `else(k)` otherwise. Collective is the post-barrier merge of every
/// writer's layers over `base`: the value written at k by some thread
/// `writer` in [0, count), or base(k) when no thread wrote k.
struct FunctionExpr {
    enum class Kind { Lambda, Eta, Named, Collective };
    Kind kind = Kind::Named;
    std::string var;     // Lambda, Eta, Collective: index binder
    SymPtr body;         // Lambda
    Pure cond;           // Eta
    FunPtr then_f;       // Eta
    FunPtr else_f;       // Eta; Collective: base
    std::string name;    // Named
    bool rigid = false;  // Named
    std::string writer;  // Collective binder for the writing thread
    SymPtr count;        // Collective thread count
    std::vector<CollectiveMember> members;

    static FunPtr lambda(std::string var, SymPtr body);
    static FunPtr eta(std::string var, Pure cond, FunPtr then_f, FunPtr else_f);
    static FunPtr named(std::string name, bool rigid = false);
    static FunPtr collective(std::string var, std::string writer, SymPtr count, std::vector<CollectiveMember> members,
                             FunPtr base);
};

/// `addr |-> value` or `array |-> A[lo, hi | contents]` (base is the array variable).
struct Cell {
    enum class Kind { PointsTo, Segment };
    Kind kind = Kind::PointsTo;
    SymPtr addr, value;    // PointsTo
    std::string array;     // Segment
    SymPtr lo, hi;         // Segment
    FunPtr contents;       // Segment

    static Cell points_to(SymPtr addr, SymPtr value);
    static Cell segment(std::string array, SymPtr lo, SymPtr hi, FunPtr contents);
    /// The `a |-> F` shorthand: indices 0 .. size(a)-1.
    static Cell whole(std::string array, FunPtr contents);
};

struct SymbolicHeap {
    Pure pure;
    std::vector<Cell> spatial;
    /// Shared scalars written in the current epoch, mapped to the written value.
    std::map<std::string, SymPtr> scalar_writes;

    const Cell* segment(std::string_view array) const;
};

// ---- structural helpers -------------------------------------------------

bool equal(const SymExpr& a, const SymExpr& b);
bool equal(const FunctionExpr& a, const FunctionExpr& b);
bool equal(const Atom& a, const Atom& b);
bool equal(const SymbolicHeap& a, const SymbolicHeap& b);

std::string to_string(const SymExpr& e);
std::string to_string(const FunctionExpr& f);
std::string to_string(const Atom& a);
std::string to_string(const Pure& p);
std::string to_string(const Cell& c);
std::string to_string(const SymbolicHeap& h);

/// Free names by kind, for renaming and model search.
struct FreeNames {
    std::set<std::string> vars, logic, functions, bound;
    bool tid = false;
};
void collect(const SymExpr& e, FreeNames& out);
void collect(const FunctionExpr& f, FreeNames& out);
void collect(const Atom& a, FreeNames& out);
FreeNames free_names(const SymbolicHeap& h);

/// True when `e` mentions tid, a private variable, a non-rigid logic name or
/// a non-rigid function symbol: such a term can differ between threads.
bool thread_dependent(const SymExpr& e);

// ---- substitution and renaming -----------------------------------------

/// Replaces free occurrences of `target` (a Var, Logic, Tid or Bound leaf,
/// matched by kind and name). Binders shadow Bound targets.
SymPtr subst(const SymPtr& e, const SymExpr& target, const SymPtr& by);
FunPtr subst(const FunPtr& f, const SymExpr& target, const SymPtr& by);
Atom subst(const Atom& a, const SymExpr& target, const SymPtr& by);
Pure subst(const Pure& p, const SymExpr& target, const SymPtr& by);
SymbolicHeap subst(const SymbolicHeap& h, const SymExpr& target, const SymPtr& by);

/// Replaces App(Named name, .) heads by `by`.
SymPtr subst_fun(const SymPtr& e, std::string_view name, const FunPtr& by);

/// Fresh-name supply. Names embed the hint: `v'1`, `g'2`. Not thread-safe;
/// each analysis owns one.
class NameSupply {
public:
    std::string primed(std::string_view hint);
    std::string function(std::string_view hint);
    std::string bound(std::string_view hint);
    int counter() const { return next_; }

private:
    int next_ = 0;
};

/// rename(i, H): tid becomes `i`; private variables, non-rigid logic names and
/// non-rigid function symbols get the suffix `@tag` where tag is i's name (or
/// value). Names already carrying a tag are left alone, so rename is
/// idempotent. Shared scalars listed in `per_thread` are tagged too (they
/// were written in the epoch and each thread has its own view of them).
SymbolicHeap rename(const SymPtr& i, const SymbolicHeap& h, const std::set<std::string>& per_thread = {});
SymPtr rename(const SymPtr& i, const SymPtr& e, const std::set<std::string>& per_thread = {});
Pure rename(const SymPtr& i, const Pure& p, const std::set<std::string>& per_thread = {});
FunPtr rename(const SymPtr& i, const FunPtr& f, const std::set<std::string>& per_thread = {});
std::string thread_tag(const SymExpr& i);

/// Re-tags every name ending in `@from` to end in `@to`.
SymPtr retag(const SymPtr& e, std::string_view from, std::string_view to);
Pure retag(const Pure& p, std::string_view from, std::string_view to);
FunPtr retag(const FunPtr& f, std::string_view from, std::string_view to);

// ---- models ---------------------------------------------------------------

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an existential search would exceed its budget.
struct DomainTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using FunInterp = std::map<Value, Value>;  // unlisted indices read as 0

/// A concrete valuation: program and logic variables, tid, array extents and
/// bases, function-symbol interpretations and the designated heap.
struct Model {
    std::map<std::string, Value> vars;
    std::optional<Value> tid;
    std::map<std::string, Value> sizes;
    std::map<std::string, Value> bases;
    std::map<std::string, FunInterp> funs;
    std::map<Value, Value> heap;
    std::map<std::string, FunPtr> defs;  // Def atoms in scope

    Value domain_lo = -8, domain_hi = 8;
    std::size_t search_budget = 2'000'000;
};

Value eval(const SymExpr& e, const Model& m);
bool eval(const Atom& a, const Model& m);
bool eval(const Pure& p, const Model& m);
Value eval_fun(const FunctionExpr& f, const Model& m, Value index);

/// Builds a model from concrete thread and shared states: private and shared
/// stacks, tid, array extents and bases, and the shared heap.
struct ThreadView {
    std::map<std::string, Value> private_stack;
    Value tid = 0;
    std::map<std::string, Value> shared_stack;  // scalars and array bases
    std::map<std::string, Value> sizes;
    std::map<Value, Value> heap;
    std::vector<std::string> arrays;
};
Model make_model(const ThreadView& v);

/// Evaluates f at `index` in the given thread state.
Value eval_fexpr(const FunctionExpr& f, const Model& m, Value index);

/// s,h,i |= H. Unbound logic names are existentials searched over the
/// model's domain; unbound rigid function symbols that are the contents of a
/// segment are read off the heap. Throws DomainTooLarge when the search
/// would exceed the budget.
bool satisfies(const Model& m, const SymbolicHeap& h);

// ---- simplification ---------------------------------------------------------

SymPtr simplify(const SymPtr& e);
FunPtr simplify(const FunPtr& f);
Pure simplify(const Pure& p);
/// Constant folding, trivial eta layers, shadowed layers, duplicate atoms and
/// definitions no longer referenced.
SymbolicHeap simplify(const SymbolicHeap& h);

// ---- parsing ----------------------------------------------------------------

struct FormulaContext {
    std::set<std::string> shared;  // shared program variables
    std::set<std::string> rigid;   // rigid logic names and function symbols
};

struct FormulaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SymPtr parse_sym(std::string_view text, const FormulaContext& ctx = {});
FunPtr parse_fun(std::string_view text, const FormulaContext& ctx = {});
Pure parse_pure(std::string_view text, const FormulaContext& ctx = {});
SymbolicHeap parse_heap(std::string_view text, const FormulaContext& ctx = {});

/// Lowering of program expressions: private/shared variables per kernel.
SymPtr lower(const Expr& e, const Kernel& k);

}  // namespace klrace::sym
