#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace klrace {

struct SourceLoc {
    int line = 0;
    int column = 0;
};

struct Diagnostic {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    SourceLoc loc;
    std::string message;

    std::string str() const;
};

enum class OpKind { Add, Sub, Mul, Div, Mod, Neg, Cos, Sqrt };

int arity(OpKind op);
std::string_view op_name(OpKind op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Kernel-level integer expression. Array reads never appear here: the parser
// hoists them into explicit load commands.
struct Expr {
    enum class Kind { Const, Var, Tid, Size, Op };

    Kind kind = Kind::Const;
    std::int64_t value = 0;
    std::string name;  // Var: variable, Size: array
    OpKind op = OpKind::Add;
    std::vector<ExprPtr> args;

    static ExprPtr constant(std::int64_t v);
    static ExprPtr var(std::string name);
    static ExprPtr tid();
    static ExprPtr size(std::string array);
    static ExprPtr make_op(OpKind op, std::vector<ExprPtr> args);
};

bool operator==(const Expr& a, const Expr& b);

struct BoolExpr;
using BoolPtr = std::shared_ptr<const BoolExpr>;

struct BoolExpr {
    enum class Kind { Less, Equal, And, Not };

    Kind kind = Kind::Equal;
    ExprPtr lhs, rhs;     // Less, Equal
    BoolPtr left, right;  // And (left, right), Not (left)

    static BoolPtr less(ExprPtr a, ExprPtr b);
    static BoolPtr equal(ExprPtr a, ExprPtr b);
    static BoolPtr conj(BoolPtr a, BoolPtr b);
    static BoolPtr negate(BoolPtr a);
};

bool operator==(const BoolExpr& a, const BoolExpr& b);

struct Command {
    enum class Kind { Assign, Store, Load, Barrier, Assume, Assert };

    Kind kind = Kind::Barrier;
    std::string target;  // Assign, Load: destination variable
    std::string array;   // Store, Load
    ExprPtr index;       // Store, Load
    ExprPtr value;       // Assign, Store
    BoolPtr cond;        // Assume, Assert
    SourceLoc loc;

    static Command assign(std::string v, ExprPtr e, SourceLoc loc = {});
    static Command store(std::string a, ExprPtr idx, ExprPtr e, SourceLoc loc = {});
    static Command load(std::string v, std::string a, ExprPtr idx, SourceLoc loc = {});
    static Command barrier(SourceLoc loc = {});
    static Command assume(BoolPtr b, SourceLoc loc = {});
    static Command assert_(BoolPtr b, SourceLoc loc = {});
};

// Location-insensitive structural equality.
bool operator==(const Command& a, const Command& b);

struct Stmt;
using StmtList = std::vector<Stmt>;

struct Stmt {
    enum class Kind { Basic, If, While };

    Kind kind = Kind::Basic;
    Command command;    // Basic
    BoolPtr cond;       // If, While
    StmtList loads;     // While: loads re-executed before each guard evaluation
    StmtList then_body; // If then-arm, While body
    StmtList else_body;
    SourceLoc loc;
};

struct Param {
    std::string name;
    bool is_array = false;
    bool shared = false;
};

struct CfgNode {
    enum class Kind { Start, Exit, Command };
    Kind kind = Kind::Command;
    Command command;
};

enum class VarKind { PrivateScalar, SharedScalar, SharedArray };

struct Kernel {
    std::string name = "kernel";
    std::vector<std::string> globals;  // file-level shared scalars
    std::vector<Param> params;
    std::vector<std::string> locals;  // user locals first, then load temporaries
    std::vector<std::string> temps;   // parser-introduced load temporaries
    StmtList body;

    // Control-flow graph. Node 0 is start, node 1 is exit.
    std::vector<CfgNode> nodes;
    std::vector<std::vector<int>> succ;
    static constexpr int kStart = 0;
    static constexpr int kExit = 1;

    std::optional<VarKind> kind_of(std::string_view name) const;
    bool is_shared(std::string_view name) const;
    bool is_array(std::string_view name) const;
    std::vector<std::string> arrays() const;
    std::vector<std::string> shared_scalars() const;
    std::vector<std::string> private_scalars() const;
    std::vector<std::vector<int>> predecessors() const;
    int command_count() const { return static_cast<int>(nodes.size()) - 2; }
};

}  // namespace klrace
