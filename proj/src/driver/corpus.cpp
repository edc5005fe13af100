#include <fstream>
#include <sstream>

#include "klrace/driver.hpp"

namespace klrace::driver {

using nlohmann::json;

std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest)
{
    std::ifstream f(manifest);
    if (!f)
        throw UsageError("cannot read corpus manifest " + manifest.string());
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw UsageError(manifest.string() + ": " + e.what());
    }
    std::vector<CorpusEntry> out;
    try {
        for (const auto& k : doc.at("kernels")) {
            CorpusEntry e;
            e.name = k.at("name");
            e.kernel = k.at("kernel");
            e.inputs = k.value("inputs", "");
            e.threads = k.value("threads", 2);
            e.preconditions = k.value("requires", std::vector<std::string>{});
            const auto& ex = k.at("expect");
            e.expect_analyzer = ex.at("analyzer");
            e.expect_oracle = ex.at("oracle");
            e.expect_agreement = ex.at("agreement");
            out.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw UsageError(manifest.string() + ": " + e.what());
    }
    return out;
}

bool CorpusResult::ok() const
{
    for (const auto& r : rows)
        if (!r.drift.empty())
            return false;
    return true;
}

CorpusResult corpus_check(const std::filesystem::path& manifest)
{
    const auto dir = manifest.parent_path();
    CorpusResult out;
    for (auto& e : load_manifest(manifest)) {
        RunConfig cfg;
        cfg.kernel_path = dir / e.kernel;
        cfg.mode = Mode::Both;
        cfg.threads = e.threads;
        if (!e.inputs.empty())
            cfg.inputs_path = dir / e.inputs;
        cfg.preconditions = e.preconditions;

        CorpusRow row{e, {}, {}};
        row.report = run(cfg);
        // Paths relative to the manifest keep reports independent of the checkout.
        row.report.kernel = e.kernel;
        if (row.report.config.inputs_path)
            row.report.config.inputs_path = e.inputs;
        row.report.config.kernel_path = e.kernel;

        auto compare = [&](const char* what, const std::string& expected, std::string_view observed) {
            if (expected != observed)
                row.drift.push_back(std::string(what) + ": expected " + expected + ", observed " +
                                    std::string(observed));
        };
        compare("analyzer", e.expect_analyzer, symexec::to_string(row.report.analyzer->verdict));
        compare("oracle", e.expect_oracle, concrete::to_string(row.report.oracle->kind));
        compare("agreement", e.expect_agreement, to_string(*row.report.agreement));
        out.rows.push_back(std::move(row));
    }
    return out;
}

json to_json(const CorpusResult& r, bool timing)
{
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"name", row.entry.name}, {"drift", row.drift}, {"report", to_json(row.report, timing)}});
    return {{"ok", r.ok()}, {"kernels", std::move(rows)}};
}

std::string to_text(const CorpusResult& r)
{
    std::ostringstream os;
    std::size_t width = 6;
    for (const auto& row : r.rows)
        width = std::max(width, row.entry.name.size());
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    os << pad("kernel", width) << "  " << pad("analyzer", 15) << "  " << pad("oracle", 14) << "  "
       << pad("agreement", 27) << "  status\n";
    for (const auto& row : r.rows) {
        os << pad(row.entry.name, width) << "  "
           << pad(std::string(symexec::to_string(row.report.analyzer->verdict)), 15) << "  "
           << pad(std::string(concrete::to_string(row.report.oracle->kind)), 14) << "  "
           << pad(std::string(to_string(*row.report.agreement)), 27) << "  "
           << (row.drift.empty() ? "ok" : "DRIFT") << "\n";
        for (const auto& d : row.drift)
            os << "    " << d << "\n";
    }
    os << (r.ok() ? "corpus ok" : "corpus drift") << " (" << r.rows.size() << " kernels)\n";
    return os.str();
}

}  // namespace klrace::driver
