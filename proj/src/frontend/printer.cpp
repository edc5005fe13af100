#include <algorithm>
#include <map>
#include <sstream>

#include "klrace/frontend.hpp"

namespace klrace {

namespace {

using InlineMap = std::map<std::string, std::string, std::less<>>;

std::string render(const Expr& e, const InlineMap* reads)
{
    switch (e.kind) {
    case Expr::Kind::Const:
        return e.value < 0 ? "(" + std::to_string(e.value) + ")" : std::to_string(e.value);
    case Expr::Kind::Var:
        if (reads) {
            auto it = reads->find(e.name);
            if (it != reads->end())
                return it->second;
        }
        return e.name;
    case Expr::Kind::Tid: return "tid";
    case Expr::Kind::Size: return "size(" + e.name + ")";
    case Expr::Kind::Op:
        switch (e.op) {
        case OpKind::Neg: return "(-" + render(*e.args[0], reads) + ")";
        case OpKind::Cos:
        case OpKind::Sqrt: return std::string(op_name(e.op)) + "(" + render(*e.args[0], reads) + ")";
        default:
            return "(" + render(*e.args[0], reads) + " " + std::string(op_name(e.op)) + " " +
                   render(*e.args[1], reads) + ")";
        }
    }
    return "?";
}

std::string render(const BoolExpr& b, const InlineMap* reads)
{
    switch (b.kind) {
    case BoolExpr::Kind::Less: return render(*b.lhs, reads) + " < " + render(*b.rhs, reads);
    case BoolExpr::Kind::Equal: return render(*b.lhs, reads) + " == " + render(*b.rhs, reads);
    case BoolExpr::Kind::And: return "(" + render(*b.left, reads) + ") && (" + render(*b.right, reads) + ")";
    case BoolExpr::Kind::Not: return "!(" + render(*b.left, reads) + ")";
    }
    return "?";
}

std::string render(const Command& c, const InlineMap* reads)
{
    switch (c.kind) {
    case Command::Kind::Assign: return c.target + " = " + render(*c.value, reads);
    case Command::Kind::Store:
        return c.array + "[" + render(*c.index, reads) + "] = " + render(*c.value, reads);
    case Command::Kind::Load: return c.target + " = " + c.array + "[" + render(*c.index, reads) + "]";
    case Command::Kind::Barrier: return "barrier";
    case Command::Kind::Assume: return "assume(" + render(*c.cond, reads) + ")";
    case Command::Kind::Assert: return "assert(" + render(*c.cond, reads) + ")";
    }
    return "?";
}

class KernelPrinter {
public:
    explicit KernelPrinter(const Kernel& k) : k_(k) {}

    std::string run()
    {
        for (const auto& g : k_.globals)
            os_ << "shared int " << g << ";\n";
        os_ << "kernel " << k_.name << "(";
        for (std::size_t i = 0; i < k_.params.size(); ++i) {
            const auto& p = k_.params[i];
            if (i)
                os_ << ", ";
            if (!p.is_array && p.shared)
                os_ << "shared ";
            os_ << "int " << p.name << (p.is_array ? "[]" : "");
        }
        os_ << ") {\n";
        for (const auto& l : k_.locals)
            if (!is_temp(l))
                os_ << "  int " << l << ";\n";
        print(k_.body, 1);
        os_ << "}\n";
        return os_.str();
    }

private:
    const Kernel& k_;
    std::ostringstream os_;
    InlineMap reads_;

    bool is_temp(const std::string& n) const
    {
        return std::find(k_.temps.begin(), k_.temps.end(), n) != k_.temps.end();
    }

    void indent(int depth) { os_ << std::string(static_cast<std::size_t>(depth) * 2, ' '); }

    // Loads into parser temporaries are folded back into the expression that
    // consumes them, so re-parsing hoists them again in the same order.
    bool absorb(const Stmt& s)
    {
        if (s.kind != Stmt::Kind::Basic || s.command.kind != Command::Kind::Load || !is_temp(s.command.target))
            return false;
        reads_[s.command.target] = s.command.array + "[" + render(*s.command.index, &reads_) + "]";
        return true;
    }

    void print(const StmtList& body, int depth)
    {
        for (const Stmt& s : body) {
            if (absorb(s))
                continue;
            indent(depth);
            switch (s.kind) {
            case Stmt::Kind::Basic:
                os_ << render(s.command, &reads_) << ";\n";
                break;
            case Stmt::Kind::If:
                os_ << "if (" << render(*s.cond, &reads_) << ") {\n";
                print(s.then_body, depth + 1);
                indent(depth);
                if (s.else_body.empty()) {
                    os_ << "}\n";
                } else {
                    os_ << "} else {\n";
                    print(s.else_body, depth + 1);
                    indent(depth);
                    os_ << "}\n";
                }
                break;
            case Stmt::Kind::While:
                for (const Stmt& ld : s.loads)
                    absorb(ld);
                os_ << "while (" << render(*s.cond, &reads_) << ") {\n";
                print(s.then_body, depth + 1);
                indent(depth);
                os_ << "}\n";
                break;
            }
        }
    }
};

}  // namespace

std::string print_expr(const Expr& e) { return render(e, nullptr); }
std::string print_bool(const BoolExpr& b) { return render(b, nullptr); }
std::string print_command(const Command& c) { return render(c, nullptr); }

std::string print_node(const Kernel& k, int node)
{
    const auto& n = k.nodes.at(static_cast<std::size_t>(node));
    switch (n.kind) {
    case CfgNode::Kind::Start: return "start";
    case CfgNode::Kind::Exit: return "exit";
    case CfgNode::Kind::Command: return print_command(n.command);
    }
    return "?";
}

std::string print_kernel(const Kernel& k) { return KernelPrinter(k).run(); }

}  // namespace klrace
