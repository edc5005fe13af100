// klrace: static race analysis and exhaustive interleaving oracle for
// kernel files.

#include <iostream>

#include <CLI11.hpp>

#include "klrace/driver.hpp"

#ifndef KLRACE_CORPUS_DIR
#define KLRACE_CORPUS_DIR "corpus"
#endif

namespace {

constexpr int kUsage = 4;

}  // namespace

int main(int argc, char** argv)
{
    using namespace klrace;
    CLI::App app{"Data-race analysis for barrier-synchronized kernels"};
    app.set_version_flag("--version", "klrace 1.0");

    driver::RunConfig cfg;
    std::string kernel, mode = "analyze", semantics = "epoch", inputs, output = "text";
    bool no_launch_facts = false;
    app.add_option("kernel", kernel, "Kernel source file");
    app.add_option("--mode", mode, "analyze, oracle or both")->check(CLI::IsMember({"analyze", "oracle", "both"}));
    app.add_option("--threads", cfg.threads, "Thread count for the oracle")->check(CLI::Range(1, 8));
    app.add_option("--oracle-semantics", semantics, "epoch or strict")->check(CLI::IsMember({"epoch", "strict"}));
    app.add_option("--inputs", inputs, "Initial values: `name = [v0, ...]` / `name = v` lines");
    app.add_option("--loop-bound", cfg.loop_bound, "Back-edge traversals per heap")->check(CLI::NonNegativeNumber);
    app.add_option("--max-heaps", cfg.max_heaps, "Heaps per CFG node")->check(CLI::PositiveNumber);
    app.add_option("--max-states", cfg.max_states, "Oracle state budget")->check(CLI::PositiveNumber);
    app.add_option("--solver", cfg.solver, "SMT-LIB2 solver executable")->envname("KLRACE_SOLVER");
    app.add_option("--require", cfg.preconditions, "Extra launch precondition, e.g. 'nthreads < size(A)'");
    app.add_flag("--no-launch-facts", no_launch_facts,
                 "In both mode, do not fix nthreads and array sizes to the oracle's launch");
    app.add_option("--output", output, "text or json")->check(CLI::IsMember({"text", "json", "structured"}));

    auto* corpus = app.add_subcommand("corpus-check", "Run the bundled corpus against its pinned verdicts");
    std::string manifest = std::string(KLRACE_CORPUS_DIR) + "/manifest.json";
    bool no_timing = false;
    corpus->add_option("--manifest", manifest, "Corpus manifest");
    corpus->add_option("--output", output, "text or json")->check(CLI::IsMember({"text", "json", "structured"}));
    corpus->add_flag("--no-timing", no_timing, "Leave timing fields out of the json report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }
    const bool json = output != "text";

    try {
        if (corpus->parsed()) {
            const auto result = driver::corpus_check(manifest);
            if (json)
                std::cout << driver::to_json(result, !no_timing).dump(2) << "\n";
            else
                std::cout << driver::to_text(result);
            return result.ok() ? 0 : 1;
        }
        if (kernel.empty())
            throw driver::UsageError("no kernel file given (try --help)");
        cfg.kernel_path = kernel;
        cfg.mode = *driver::parse_mode(mode);
        cfg.semantics = *concrete::parse_semantics(semantics);
        if (!inputs.empty())
            cfg.inputs_path = inputs;
        cfg.launch_facts = !no_launch_facts;
        const auto report = driver::run(cfg);
        if (json)
            std::cout << driver::to_json(report).dump(2) << "\n";
        else
            std::cout << driver::to_text(report);
        return driver::exit_code(report);
    } catch (const driver::UsageError& e) {
        std::cerr << "klrace: " << e.what() << "\n";
        return kUsage;
    }
}
