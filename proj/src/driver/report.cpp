#include <sstream>

#include "klrace/driver.hpp"
#include "klrace/frontend.hpp"

namespace klrace::driver {

using nlohmann::json;

namespace {

json schedule_json(const concrete::Schedule& s)
{
    json out = json::array();
    for (const auto& st : s)
        out.push_back({{"thread", st.thread}, {"node", st.node}});
    return out;
}

std::string schedule_text(const concrete::Schedule& s)
{
    std::string out;
    for (const auto& st : s)
        out += (out.empty() ? "" : " ") + ("t" + std::to_string(st.thread) + "@" + std::to_string(st.node));
    return out.empty() ? "(empty)" : out;
}

json analyzer_json(const symexec::AnalysisReport& a)
{
    json findings = json::array();
    for (const auto& f : a.findings) {
        json j = {{"kind", f.kind == symexec::Finding::Kind::Race ? "race" : "error"},
                  {"node", f.node},
                  {"line", f.loc.line},
                  {"column", f.loc.column},
                  {"message", f.message},
                  {"heap", f.heap}};
        if (f.race)
            j["race"] = {{"heap_i", f.race->heap_i},       {"heap_j", f.race->heap_j},
                         {"location", f.race->location},   {"condition", f.race->condition},
                         {"value_i", f.race->value_i},     {"value_j", f.race->value_j},
                         {"other_heap", f.other_heap}};
        findings.push_back(std::move(j));
    }
    json states = json::object();
    for (const auto& [node, heaps] : a.states) {
        json hs = json::array();
        for (const auto& h : heaps)
            hs.push_back(sym::to_string(h));
        states[std::to_string(node)] = std::move(hs);
    }
    return {{"verdict", symexec::to_string(a.verdict)},
            {"findings", std::move(findings)},
            {"notes", a.notes},
            {"states", std::move(states)},
            {"heaps_explored", a.heaps_explored},
            {"barriers_checked", a.barriers_checked},
            {"prover",
             {{"queries", a.prover.queries},
              {"unknown", a.prover.unknown},
              {"solver_calls", a.prover.solver_calls},
              {"solver_proofs", a.prover.solver_proofs}}}};
}

json oracle_json(const concrete::OracleVerdict& o)
{
    json j = {{"verdict", concrete::to_string(o.kind)},
              {"states_explored", o.states_explored},
              {"pruned_schedules", o.pruned_schedules},
              {"strict_race_seen", o.strict_race_seen},
              {"epoch_divergence_seen", o.epoch_divergence_seen},
              {"epoch_digests", o.epoch_digests}};
    if (!o.witness.empty() || !o.witness_point.empty())
        j["witness"] = {{"schedule", schedule_json(o.witness)},
                        {"alternative", schedule_json(o.witness_alt)},
                        {"point", o.witness_point}};
    if (!o.fault.empty())
        j["fault"] = o.fault;
    if (!o.note.empty())
        j["note"] = o.note;
    return j;
}

}  // namespace

json to_json(const CombinedReport& r, bool timing)
{
    const RunConfig& c = r.config;
    json config = {{"mode", to_string(c.mode)},
                   {"loop_bound", c.loop_bound},
                   {"max_heaps", c.max_heaps},
                   {"preconditions", c.preconditions}};
    if (c.mode != Mode::Analyze) {
        config["threads"] = c.threads;
        config["oracle_semantics"] = concrete::to_string(c.semantics);
        config["inputs"] = {{"arrays", c.inputs.arrays}, {"scalars", c.inputs.scalars}};
    }
    if (c.mode == Mode::Both)
        config["launch_facts"] = c.launch_facts;
    config["solver"] = c.solver.empty() ? json(nullptr) : json(c.solver);

    json out = {{"kernel", r.kernel}, {"config", std::move(config)}, {"exit_code", exit_code(r)}};
    out["analyzer"] = r.analyzer ? analyzer_json(*r.analyzer) : json(nullptr);
    out["oracle"] = r.oracle ? oracle_json(*r.oracle) : json(nullptr);
    out["agreement"] = r.agreement ? json(to_string(*r.agreement)) : json(nullptr);
    if (timing)
        out["timing"] = {{"analyzer_seconds", r.analyzer_seconds}, {"oracle_seconds", r.oracle_seconds}};
    return out;
}

std::string to_text(const CombinedReport& r)
{
    std::ostringstream os;
    os << r.kernel << "\n";
    if (r.analyzer) {
        const auto& a = *r.analyzer;
        os << "  analyzer: " << symexec::to_string(a.verdict) << " (" << a.heaps_explored << " heaps, "
           << a.barriers_checked << " barrier checks, " << a.prover.queries << " prover queries)\n";
        for (const auto& f : a.findings) {
            os << "    " << f.loc.line << ":" << f.loc.column << ": " << f.message << "\n";
            if (f.race)
                os << "      when " << f.race->condition << ": " << f.race->value_i << " vs " << f.race->value_j
                   << "\n";
            os << "      in heap " << f.heap << "\n";
        }
        for (const auto& n : a.notes)
            os << "    note: " << n << "\n";
    }
    if (r.oracle) {
        const auto& o = *r.oracle;
        os << "  oracle (" << r.config.threads << " threads, " << concrete::to_string(r.config.semantics)
           << "): " << concrete::to_string(o.kind) << " (" << o.states_explored << " states)\n";
        if (!o.witness_point.empty()) {
            os << "    at " << o.witness_point << "\n";
            os << "    schedule     " << schedule_text(o.witness) << "\n";
            if (!o.witness_alt.empty())
                os << "    alternative  " << schedule_text(o.witness_alt) << "\n";
        }
        if (!o.fault.empty())
            os << "    fault: " << o.fault << "\n";
        if (!o.note.empty())
            os << "    note: " << o.note << "\n";
    }
    if (r.agreement)
        os << "  agreement: " << to_string(*r.agreement) << "\n";
    return os.str();
}

}  // namespace klrace::driver
