#include <chrono>
#include <fstream>
#include <future>
#include <sstream>

#include "klrace/driver.hpp"
#include "klrace/frontend.hpp"

namespace klrace::driver {

namespace {

template <class F>
auto timed(double& seconds, F&& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

symexec::Config analyzer_config(const RunConfig& cfg, const Kernel& k)
{
    symexec::Config c;
    c.loop_bound = cfg.loop_bound;
    c.max_heaps = cfg.max_heaps;
    c.prover.solver = cfg.solver;
    const auto ctx = symexec::formula_context(k);
    for (const auto& text : cfg.preconditions) {
        try {
            for (auto& a : sym::parse_pure(text, ctx))
                c.preconditions.push_back(std::move(a));
        } catch (const std::exception& e) {
            throw UsageError("bad precondition '" + text + "': " + e.what());
        }
    }
    if (cfg.mode == Mode::Both && cfg.launch_facts) {
        c.preconditions.push_back(
            sym::Atom::eq(sym::SymExpr::logic(symexec::kThreads, true), sym::SymExpr::constant(cfg.threads)));
        for (const auto& a : k.arrays()) {
            auto it = cfg.inputs.arrays.find(a);
            if (it != cfg.inputs.arrays.end())
                c.preconditions.push_back(sym::Atom::eq(
                    sym::SymExpr::size(a), sym::SymExpr::constant(static_cast<sym::Value>(it->second.size()))));
        }
    }
    return c;
}

void check_oracle_inputs(const RunConfig& cfg, const Kernel& k)
{
    if (cfg.threads < 1)
        throw UsageError("--threads must be at least 1");
    for (const auto& a : k.arrays())
        if (!cfg.inputs.arrays.count(a))
            throw UsageError("the oracle needs concrete contents for array " + a + " (see --inputs)");
}

}  // namespace

CombinedReport run(const RunConfig& cfg)
{
    std::ifstream f(cfg.kernel_path);
    if (!f)
        throw UsageError("cannot read kernel file " + cfg.kernel_path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    ParseResult p = parse_kernel(ss.str());
    if (!p.ok()) {
        std::string msg = cfg.kernel_path.string() + ": parse failed";
        for (const auto& d : p.diagnostics)
            msg += "\n  " + d.str();
        throw UsageError(msg);
    }
    RunConfig c = cfg;
    if (c.inputs_path)
        c.inputs = read_inputs(*c.inputs_path);
    return run(c, *p.kernel);
}

CombinedReport run(const RunConfig& cfg, const Kernel& k)
{
    CombinedReport r;
    r.kernel = cfg.kernel_path.string();
    r.config = cfg;
    const bool analyze = cfg.mode != Mode::Oracle, oracle = cfg.mode != Mode::Analyze;

    std::optional<symexec::Config> acfg;
    if (analyze)
        acfg = analyzer_config(cfg, k);
    if (oracle)
        check_oracle_inputs(cfg, k);

    // The engines share nothing but the kernel, which both only read.
    std::future<concrete::OracleVerdict> ofut;
    if (oracle) {
        ofut = std::async(std::launch::async, [&] {
            concrete::OracleOptions o;
            o.semantics = cfg.semantics;
            o.max_states = cfg.max_states;
            return timed(r.oracle_seconds, [&] { return concrete::run_oracle(k, cfg.threads, cfg.inputs, o); });
        });
    }
    if (analyze)
        r.analyzer = timed(r.analyzer_seconds, [&] { return symexec::analyze(k, *acfg); });
    if (oracle)
        r.oracle = ofut.get();
    if (r.analyzer && r.oracle)
        r.agreement = classify(r.analyzer->verdict, r.oracle->kind);
    return r;
}

int exit_code(const CombinedReport& r)
{
    auto analyzer_code = [](symexec::Verdict v) {
        switch (v) {
        case symexec::Verdict::RaceFree: return 0;
        case symexec::Verdict::PotentialRace: return 1;
        case symexec::Verdict::DefiniteError: return 2;
        case symexec::Verdict::Inconclusive: return 3;
        }
        return 3;
    };
    auto oracle_code = [](concrete::OracleVerdict::Kind k) {
        switch (k) {
        case concrete::OracleVerdict::Kind::RaceFree: return 0;
        case concrete::OracleVerdict::Kind::Race: return 1;
        case concrete::OracleVerdict::Kind::RuntimeError: return 2;
        case concrete::OracleVerdict::Kind::Inconclusive: return 3;
        }
        return 3;
    };
    auto severity = [](int code) {
        static constexpr int rank[] = {0, 2, 3, 1};
        return rank[code];
    };
    int code = 0;
    if (r.analyzer)
        code = analyzer_code(r.analyzer->verdict);
    if (r.oracle) {
        const int o = oracle_code(r.oracle->kind);
        if (severity(o) > severity(code))
            code = o;
    }
    return code;
}

}  // namespace klrace::driver
