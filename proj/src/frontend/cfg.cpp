#include <algorithm>
#include <deque>

#include "klrace/frontend.hpp"

namespace klrace {

namespace {

class CfgBuilder {
public:
    explicit CfgBuilder(Kernel& k) : k_(k)
    {
        k_.nodes.clear();
        k_.succ.clear();
        k_.nodes.push_back({CfgNode::Kind::Start, {}});
        k_.nodes.push_back({CfgNode::Kind::Exit, {}});
        k_.succ.resize(2);
    }

    void build()
    {
        std::vector<int> ends = compile(k_.body, {Kernel::kStart});
        link(ends, Kernel::kExit);
    }

private:
    Kernel& k_;

    int add(const Command& c)
    {
        k_.nodes.push_back({CfgNode::Kind::Command, c});
        k_.succ.emplace_back();
        return static_cast<int>(k_.nodes.size()) - 1;
    }

    void link(const std::vector<int>& from, int to)
    {
        for (int f : from) {
            auto& s = k_.succ[static_cast<std::size_t>(f)];
            if (std::find(s.begin(), s.end(), to) == s.end())
                s.push_back(to);
        }
    }

    // Returns the dangling nodes whose successor is whatever follows `stmts`.
    std::vector<int> compile(const StmtList& stmts, std::vector<int> preds)
    {
        for (const Stmt& s : stmts)
            preds = compile(s, std::move(preds));
        return preds;
    }

    std::vector<int> compile(const Stmt& s, std::vector<int> preds)
    {
        switch (s.kind) {
        case Stmt::Kind::Basic: {
            const int n = add(s.command);
            link(preds, n);
            return {n};
        }
        case Stmt::Kind::If: {
            const int yes = add(Command::assume(s.cond, s.loc));
            const int no = add(Command::assume(BoolExpr::negate(s.cond), s.loc));
            link(preds, yes);
            link(preds, no);
            std::vector<int> ends = compile(s.then_body, {yes});
            std::vector<int> else_ends = compile(s.else_body, {no});
            ends.insert(ends.end(), else_ends.begin(), else_ends.end());
            return ends;
        }
        case Stmt::Kind::While: {
            // Guard loads, then the assume pair. The body loops back to the
            // first guard node.
            std::vector<int> guard_preds = preds;
            int head = -1;
            for (const Stmt& ld : s.loads) {
                const int n = add(ld.command);
                if (head < 0)
                    head = n;
                link(guard_preds, n);
                guard_preds = {n};
            }
            const int yes = add(Command::assume(s.cond, s.loc));
            const int no = add(Command::assume(BoolExpr::negate(s.cond), s.loc));
            link(guard_preds, yes);
            link(guard_preds, no);
            std::vector<int> body_ends = compile(s.then_body, {yes});
            if (head >= 0) {
                link(body_ends, head);
            } else {
                link(body_ends, yes);
                link(body_ends, no);
            }
            return {no};
        }
        }
        return preds;
    }
};

bool is_negation_of(const BoolExpr& a, const BoolExpr& b)
{
    return a.kind == BoolExpr::Kind::Not && *a.left == b;
}

}  // namespace

std::vector<Diagnostic> validate_cfg(const Kernel& k)
{
    std::vector<Diagnostic> diags;
    auto err = [&](SourceLoc loc, std::string m) {
        diags.push_back({Diagnostic::Severity::Error, loc, std::move(m)});
    };
    if (k.nodes.size() < 2 || k.nodes[Kernel::kStart].kind != CfgNode::Kind::Start ||
        k.nodes[Kernel::kExit].kind != CfgNode::Kind::Exit) {
        err({}, "control-flow graph lacks start/exit nodes");
        return diags;
    }
    if (k.succ.size() != k.nodes.size()) {
        err({}, "edge relation does not cover every node");
        return diags;
    }
    for (std::size_t n = 2; n < k.nodes.size(); ++n)
        if (k.nodes[n].kind != CfgNode::Kind::Command)
            err({}, "duplicate start or exit node");
    const auto pred = k.predecessors();
    if (!pred[Kernel::kStart].empty())
        err({}, "start node has predecessors");
    if (!k.succ[Kernel::kExit].empty())
        err({}, "exit node has successors");

    for (std::size_t n = 0; n < k.nodes.size(); ++n) {
        if (static_cast<int>(n) == Kernel::kExit)
            continue;
        const auto& s = k.succ[n];
        const SourceLoc loc = k.nodes[n].command.loc;
        if (s.empty()) {
            err(loc, "missing successor for node " + std::to_string(n));
            continue;
        }
        for (int t : s)
            if (t < 0 || static_cast<std::size_t>(t) >= k.nodes.size())
                err(loc, "edge to unknown node " + std::to_string(t));
        if (s.size() == 1)
            continue;
        if (s.size() != 2) {
            err(loc, "node " + std::to_string(n) + " has more than two successors");
            continue;
        }
        const auto& a = k.nodes[static_cast<std::size_t>(s[0])];
        const auto& b = k.nodes[static_cast<std::size_t>(s[1])];
        const bool guarded = a.kind == CfgNode::Kind::Command && b.kind == CfgNode::Kind::Command &&
                             a.command.kind == Command::Kind::Assume &&
                             b.command.kind == Command::Kind::Assume &&
                             (is_negation_of(*b.command.cond, *a.command.cond) ||
                              is_negation_of(*a.command.cond, *b.command.cond));
        if (!guarded)
            err(loc, "branch at node " + std::to_string(n) + " is not guarded by assume(b)/assume(!b)");
    }

    std::vector<bool> seen(k.nodes.size(), false);
    std::deque<int> work{Kernel::kStart};
    seen[Kernel::kStart] = true;
    while (!work.empty()) {
        const int n = work.front();
        work.pop_front();
        for (int t : k.succ[static_cast<std::size_t>(n)]) {
            if (t >= 0 && static_cast<std::size_t>(t) < seen.size() && !seen[static_cast<std::size_t>(t)]) {
                seen[static_cast<std::size_t>(t)] = true;
                work.push_back(t);
            }
        }
    }
    for (std::size_t n = 0; n < k.nodes.size(); ++n)
        if (!seen[n])
            diags.push_back({Diagnostic::Severity::Warning, k.nodes[n].command.loc,
                             "unreachable node " + std::to_string(n)});
    return diags;
}

std::vector<Diagnostic> build_cfg(Kernel& kernel)
{
    CfgBuilder(kernel).build();
    return validate_cfg(kernel);
}

bool structurally_equal(const Kernel& a, const Kernel& b)
{
    if (a.name != b.name || a.globals != b.globals || a.locals != b.locals)
        return false;
    if (a.params.size() != b.params.size())
        return false;
    for (std::size_t i = 0; i < a.params.size(); ++i)
        if (a.params[i].name != b.params[i].name || a.params[i].is_array != b.params[i].is_array ||
            a.params[i].shared != b.params[i].shared)
            return false;
    if (a.nodes.size() != b.nodes.size() || a.succ != b.succ)
        return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i].kind != b.nodes[i].kind)
            return false;
        if (a.nodes[i].kind == CfgNode::Kind::Command && !(a.nodes[i].command == b.nodes[i].command))
            return false;
    }
    return true;
}

}  // namespace klrace
