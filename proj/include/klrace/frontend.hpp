#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klrace/ast.hpp"

namespace klrace {

struct ParseResult {
    std::optional<Kernel> kernel;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return kernel.has_value(); }
};

/// Parses kernel source text. On success the returned kernel already carries a
/// validated control-flow graph; structured `if`/`while` are desugared into
/// branches guarded by assume(b) / assume(!b).
ParseResult parse_kernel(std::string_view text);

/// Rebuilds the control-flow graph of `kernel` from its structured body and
/// validates it. Returns diagnostics (warnings for unreachable nodes, errors for
/// malformed edges); the kernel is only usable when no error is reported.
std::vector<Diagnostic> build_cfg(Kernel& kernel);

/// Validates the edge relation without rebuilding it.
std::vector<Diagnostic> validate_cfg(const Kernel& kernel);

std::string print_expr(const Expr& e);
std::string print_bool(const BoolExpr& b);
std::string print_command(const Command& c);
std::string print_node(const Kernel& k, int node);

/// Surface-syntax rendering that parses back to a structurally identical kernel.
std::string print_kernel(const Kernel& k);

bool structurally_equal(const Kernel& a, const Kernel& b);

}  // namespace klrace
