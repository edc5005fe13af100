#include <cmath>
#include <limits>

#include "klrace/concrete.hpp"
#include "klrace/frontend.hpp"

namespace klrace::concrete {

namespace {

// Two's complement wrap-around for the bounded integer domain.
Value wrap_add(Value a, Value b)
{
    return static_cast<Value>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
Value wrap_sub(Value a, Value b)
{
    return static_cast<Value>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
Value wrap_mul(Value a, Value b)
{
    return static_cast<Value>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

Value lookup(const std::string& name, const ThreadState& t, const SharedState& s)
{
    if (auto it = t.stack.find(name); it != t.stack.end())
        return it->second;
    if (auto it = s.stack.find(name); it != s.stack.end())
        return it->second;
    throw RuntimeFault("unbound variable " + name);
}

// Resolves a[idx] to a heap location, or throws for out-of-bounds.
Value locate(const std::string& array, Value idx, const SharedState& s)
{
    auto base = s.stack.find(array);
    auto size = s.sizes.find(array);
    if (base == s.stack.end() || size == s.sizes.end())
        throw RuntimeFault("unknown array " + array);
    if (idx < 0 || idx >= size->second)
        throw RuntimeFault("index " + std::to_string(idx) + " out of bounds for " + array + "[" +
                           std::to_string(size->second) + "]");
    return base->second + idx;
}

}  // namespace

Value apply_cos(Value x)
{
    return static_cast<Value>(std::llround(std::cos(static_cast<double>(x)) * 1000.0));
}

Value apply_sqrt(Value x)
{
    if (x <= 0)
        return 0;
    auto r = static_cast<Value>(std::sqrt(static_cast<double>(x)));
    while (r > 0 && r > x / r)
        --r;
    while ((r + 1) <= x / (r + 1))
        ++r;
    return r;
}

Value eval_expr(const Expr& e, const ThreadState& t, const SharedState& s)
{
    switch (e.kind) {
    case Expr::Kind::Const: return e.value;
    case Expr::Kind::Var: return lookup(e.name, t, s);
    case Expr::Kind::Tid: return t.tid;
    case Expr::Kind::Size: {
        auto it = s.sizes.find(e.name);
        if (it == s.sizes.end())
            throw RuntimeFault("unknown array " + e.name);
        return it->second;
    }
    case Expr::Kind::Op: break;
    }
    const Value a = eval_expr(*e.args[0], t, s);
    switch (e.op) {
    case OpKind::Neg: return wrap_sub(0, a);
    case OpKind::Cos: return apply_cos(a);
    case OpKind::Sqrt: return apply_sqrt(a);
    default: break;
    }
    const Value b = eval_expr(*e.args[1], t, s);
    switch (e.op) {
    case OpKind::Add: return wrap_add(a, b);
    case OpKind::Sub: return wrap_sub(a, b);
    case OpKind::Mul: return wrap_mul(a, b);
    case OpKind::Div:
        if (b == 0)
            throw RuntimeFault("division by zero");
        if (a == std::numeric_limits<Value>::min() && b == -1)
            return a;
        return a / b;
    case OpKind::Mod:
        if (b == 0)
            throw RuntimeFault("modulo by zero");
        if (b == -1)
            return 0;
        return a % b;
    default: break;
    }
    throw RuntimeFault("bad operator");
}

bool eval_bool(const BoolExpr& b, const ThreadState& t, const SharedState& s)
{
    switch (b.kind) {
    case BoolExpr::Kind::Less: return eval_expr(*b.lhs, t, s) < eval_expr(*b.rhs, t, s);
    case BoolExpr::Kind::Equal: return eval_expr(*b.lhs, t, s) == eval_expr(*b.rhs, t, s);
    case BoolExpr::Kind::And: return eval_bool(*b.left, t, s) && eval_bool(*b.right, t, s);
    case BoolExpr::Kind::Not: return !eval_bool(*b.left, t, s);
    }
    return false;
}

StepOutcome step_thread(const Kernel& k, const Command& c, const ThreadState& t, const SharedState& s)
{
    StepOutcome out;
    out.thread = t;
    out.shared = s;
    try {
        switch (c.kind) {
        case Command::Kind::Assign: {
            const Value n = eval_expr(*c.value, t, s);
            if (k.is_shared(c.target))
                out.shared.stack[c.target] = n;
            else
                out.thread.stack[c.target] = n;
            break;
        }
        case Command::Kind::Store: {
            const Value n = eval_expr(*c.value, t, s);
            const Value m = eval_expr(*c.index, t, s);
            out.shared.heap[locate(c.array, m, s)] = n;
            break;
        }
        case Command::Kind::Load: {
            const Value m = eval_expr(*c.index, t, s);
            const Value loc = locate(c.array, m, s);
            auto it = s.heap.find(loc);
            if (it == s.heap.end())
                throw RuntimeFault("dangling location " + std::to_string(loc));
            // Destination is the variable itself (the printed rule indexes the
            // stack by the variable's current value, which is not well typed).
            if (k.is_shared(c.target))
                out.shared.stack[c.target] = it->second;
            else
                out.thread.stack[c.target] = it->second;
            break;
        }
        case Command::Kind::Assert:
            if (!eval_bool(*c.cond, t, s)) {
                out.kind = StepOutcome::Kind::Bottom;
                out.fault = "assertion failed: " + print_bool(*c.cond);
            }
            break;
        case Command::Kind::Assume:
            if (!eval_bool(*c.cond, t, s))
                out.kind = StepOutcome::Kind::Top;
            break;
        case Command::Kind::Barrier: out.kind = StepOutcome::Kind::Suspended; break;
        }
    } catch (const RuntimeFault& f) {
        out.kind = StepOutcome::Kind::Bottom;
        out.fault = f.what();
    }
    return out;
}

}  // namespace klrace::concrete
