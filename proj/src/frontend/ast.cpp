#include "klrace/ast.hpp"

#include <algorithm>
#include <sstream>

namespace klrace {

std::string Diagnostic::str() const
{
    std::ostringstream os;
    os << loc.line << ':' << loc.column << ": "
       << (severity == Severity::Error ? "error: " : "warning: ") << message;
    return os.str();
}

int arity(OpKind op)
{
    switch (op) {
    case OpKind::Neg:
    case OpKind::Cos:
    case OpKind::Sqrt:
        return 1;
    default:
        return 2;
    }
}

std::string_view op_name(OpKind op)
{
    switch (op) {
    case OpKind::Add: return "+";
    case OpKind::Sub: return "-";
    case OpKind::Mul: return "*";
    case OpKind::Div: return "/";
    case OpKind::Mod: return "%";
    case OpKind::Neg: return "-";
    case OpKind::Cos: return "cos";
    case OpKind::Sqrt: return "sqrt";
    }
    return "?";
}

ExprPtr Expr::constant(std::int64_t v)
{
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->value = v;
    return e;
}

ExprPtr Expr::var(std::string name)
{
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::tid()
{
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Tid;
    return e;
}

ExprPtr Expr::size(std::string array)
{
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Size;
    e->name = std::move(array);
    return e;
}

ExprPtr Expr::make_op(OpKind op, std::vector<ExprPtr> args)
{
    if (static_cast<int>(args.size()) != arity(op))
        throw std::invalid_argument("operand count does not match arity of " + std::string(op_name(op)));
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Op;
    e->op = op;
    e->args = std::move(args);
    return e;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Expr::Kind::Const: return a.value == b.value;
    case Expr::Kind::Var:
    case Expr::Kind::Size: return a.name == b.name;
    case Expr::Kind::Tid: return true;
    case Expr::Kind::Op:
        if (a.op != b.op || a.args.size() != b.args.size())
            return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!(*a.args[i] == *b.args[i]))
                return false;
        return true;
    }
    return false;
}

BoolPtr BoolExpr::less(ExprPtr a, ExprPtr b)
{
    auto r = std::make_shared<BoolExpr>();
    r->kind = Kind::Less;
    r->lhs = std::move(a);
    r->rhs = std::move(b);
    return r;
}

BoolPtr BoolExpr::equal(ExprPtr a, ExprPtr b)
{
    auto r = std::make_shared<BoolExpr>();
    r->kind = Kind::Equal;
    r->lhs = std::move(a);
    r->rhs = std::move(b);
    return r;
}

BoolPtr BoolExpr::conj(BoolPtr a, BoolPtr b)
{
    auto r = std::make_shared<BoolExpr>();
    r->kind = Kind::And;
    r->left = std::move(a);
    r->right = std::move(b);
    return r;
}

BoolPtr BoolExpr::negate(BoolPtr a)
{
    auto r = std::make_shared<BoolExpr>();
    r->kind = Kind::Not;
    r->left = std::move(a);
    return r;
}

bool operator==(const BoolExpr& a, const BoolExpr& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case BoolExpr::Kind::Less:
    case BoolExpr::Kind::Equal: return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
    case BoolExpr::Kind::And: return *a.left == *b.left && *a.right == *b.right;
    case BoolExpr::Kind::Not: return *a.left == *b.left;
    }
    return false;
}

Command Command::assign(std::string v, ExprPtr e, SourceLoc loc)
{
    Command c;
    c.kind = Kind::Assign;
    c.target = std::move(v);
    c.value = std::move(e);
    c.loc = loc;
    return c;
}

Command Command::store(std::string a, ExprPtr idx, ExprPtr e, SourceLoc loc)
{
    Command c;
    c.kind = Kind::Store;
    c.array = std::move(a);
    c.index = std::move(idx);
    c.value = std::move(e);
    c.loc = loc;
    return c;
}

Command Command::load(std::string v, std::string a, ExprPtr idx, SourceLoc loc)
{
    Command c;
    c.kind = Kind::Load;
    c.target = std::move(v);
    c.array = std::move(a);
    c.index = std::move(idx);
    c.loc = loc;
    return c;
}

Command Command::barrier(SourceLoc loc)
{
    Command c;
    c.kind = Kind::Barrier;
    c.loc = loc;
    return c;
}

Command Command::assume(BoolPtr b, SourceLoc loc)
{
    Command c;
    c.kind = Kind::Assume;
    c.cond = std::move(b);
    c.loc = loc;
    return c;
}

Command Command::assert_(BoolPtr b, SourceLoc loc)
{
    Command c;
    c.kind = Kind::Assert;
    c.cond = std::move(b);
    c.loc = loc;
    return c;
}

bool operator==(const Command& a, const Command& b)
{
    if (a.kind != b.kind)
        return false;
    auto eq_expr = [](const ExprPtr& x, const ExprPtr& y) {
        if (!x || !y)
            return !x && !y;
        return *x == *y;
    };
    switch (a.kind) {
    case Command::Kind::Assign: return a.target == b.target && eq_expr(a.value, b.value);
    case Command::Kind::Store:
        return a.array == b.array && eq_expr(a.index, b.index) && eq_expr(a.value, b.value);
    case Command::Kind::Load:
        return a.target == b.target && a.array == b.array && eq_expr(a.index, b.index);
    case Command::Kind::Barrier: return true;
    case Command::Kind::Assume:
    case Command::Kind::Assert: return *a.cond == *b.cond;
    }
    return false;
}

std::optional<VarKind> Kernel::kind_of(std::string_view name) const
{
    for (const auto& g : globals)
        if (g == name)
            return VarKind::SharedScalar;
    for (const auto& p : params) {
        if (p.name != name)
            continue;
        if (p.is_array)
            return VarKind::SharedArray;
        return p.shared ? VarKind::SharedScalar : VarKind::PrivateScalar;
    }
    for (const auto& l : locals)
        if (l == name)
            return VarKind::PrivateScalar;
    return std::nullopt;
}

bool Kernel::is_shared(std::string_view name) const
{
    auto k = kind_of(name);
    return k && *k != VarKind::PrivateScalar;
}

bool Kernel::is_array(std::string_view name) const
{
    auto k = kind_of(name);
    return k && *k == VarKind::SharedArray;
}

std::vector<std::string> Kernel::arrays() const
{
    std::vector<std::string> out;
    for (const auto& p : params)
        if (p.is_array)
            out.push_back(p.name);
    return out;
}

std::vector<std::string> Kernel::shared_scalars() const
{
    std::vector<std::string> out = globals;
    for (const auto& p : params)
        if (!p.is_array && p.shared)
            out.push_back(p.name);
    return out;
}

std::vector<std::string> Kernel::private_scalars() const
{
    std::vector<std::string> out;
    for (const auto& p : params)
        if (!p.is_array && !p.shared)
            out.push_back(p.name);
    out.insert(out.end(), locals.begin(), locals.end());
    return out;
}

std::vector<std::vector<int>> Kernel::predecessors() const
{
    std::vector<std::vector<int>> pred(nodes.size());
    for (std::size_t n = 0; n < succ.size(); ++n)
        for (int s : succ[n])
            pred[static_cast<std::size_t>(s)].push_back(static_cast<int>(n));
    return pred;
}

}  // namespace klrace
