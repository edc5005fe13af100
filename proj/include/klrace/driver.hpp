#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "klrace/concrete.hpp"
#include "klrace/symexec.hpp"

namespace klrace::driver {

/// Bad invocation, unreadable file or parse failure. Exit code 4.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { Analyze, Oracle, Both };
enum class Output { Text, Json };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

/// Parses `name = [v0, v1, ...]` and `name = v` lines; `#` starts a comment.
concrete::Inputs parse_inputs(std::string_view text);
concrete::Inputs read_inputs(const std::filesystem::path& p);

struct RunConfig {
    std::filesystem::path kernel_path;
    Mode mode = Mode::Analyze;
    int threads = 2;
    concrete::Semantics semantics = concrete::Semantics::Epoch;
    std::optional<std::filesystem::path> inputs_path;
    concrete::Inputs inputs;
    int loop_bound = 3;
    std::size_t max_heaps = 64;
    std::string solver;                  // empty: internal prover only
    std::vector<std::string> preconditions;  // pure formulas over the kernel's names
    // In `both` mode the analyzer also assumes the oracle's launch:
    // nthreads and every array size fixed to the concrete values.
    bool launch_facts = true;
    std::size_t max_states = 2'000'000;
};

enum class Agreement { Agree, AnalyzerOverApproximates, KnownUnsoundMiss, DisagreeUnexpected };

std::string_view to_string(Agreement a);
Agreement classify(symexec::Verdict analyzer, concrete::OracleVerdict::Kind oracle);

struct CombinedReport {
    std::string kernel;  // path as given
    RunConfig config;
    std::optional<symexec::AnalysisReport> analyzer;
    std::optional<concrete::OracleVerdict> oracle;
    std::optional<Agreement> agreement;
    double analyzer_seconds = 0, oracle_seconds = 0;
};

/// Parses the kernel and runs the requested engines (concurrently in `both`
/// mode). Throws UsageError for unreadable or malformed input.
CombinedReport run(const RunConfig& cfg);
CombinedReport run(const RunConfig& cfg, const Kernel& k);

/// 0 race-free, 1 race, 2 definite or runtime error, 3 inconclusive. With
/// both engines the more severe outcome wins, in the order 2, 1, 3, 0.
int exit_code(const CombinedReport& r);

nlohmann::json to_json(const CombinedReport& r, bool timing = true);
std::string to_text(const CombinedReport& r);

// ---- corpus regression gate ---------------------------------------------------------

struct CorpusEntry {
    std::string name;
    std::string kernel;   // relative to the corpus directory
    std::string inputs;   // relative, may be empty
    int threads = 2;
    std::vector<std::string> preconditions;
    std::string expect_analyzer;  // verdict strings as printed in reports
    std::string expect_oracle;
    std::string expect_agreement;
};

std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest);

struct CorpusRow {
    CorpusEntry entry;
    CombinedReport report;
    std::vector<std::string> drift;  // "analyzer: expected X, observed Y"
};

struct CorpusResult {
    std::vector<CorpusRow> rows;
    bool ok() const;
};

CorpusResult corpus_check(const std::filesystem::path& manifest);

nlohmann::json to_json(const CorpusResult& r, bool timing = true);
std::string to_text(const CorpusResult& r);

}  // namespace klrace::driver
