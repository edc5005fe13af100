#include <algorithm>
#include <functional>

#include "klrace/frontend.hpp"
#include "klrace/symexec.hpp"

namespace klrace::symexec {

using namespace sym;

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::RaceFree: return "race-free";
    case Verdict::PotentialRace: return "potential-race";
    case Verdict::DefiniteError: return "definite-error";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

struct Item {
    SymbolicHeap heap;
    int laps = 0;  // back edges traversed
};

// Reverse postorder from the start node; unreachable nodes come last.
std::vector<int> rpo_index(const Kernel& k)
{
    const int n = static_cast<int>(k.nodes.size());
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    std::function<void(int)> dfs = [&](int v) {
        seen[v] = 1;
        for (int s : k.succ[v])
            if (!seen[s])
                dfs(s);
        order.push_back(v);
    };
    dfs(Kernel::kStart);
    std::reverse(order.begin(), order.end());
    std::vector<int> index(n, n);
    for (int i = 0; i < static_cast<int>(order.size()); ++i)
        index[order[i]] = i;
    return index;
}

class Worklist {
public:
    Worklist(const Kernel& k, const Config& cfg, AnalysisReport& r)
        : k_(k), cfg_(cfg), report_(r), prover_(prover_options(k, cfg)), exec_(k, prover_, cfg),
          rpo_(rpo_index(k)), pending_(k.nodes.size()), seen_(k.nodes.size())
    {
        for (std::size_t v = 0; v < k.nodes.size(); ++v)
            for (int s : k.succ[v])
                if (rpo_[s] <= rpo_[v])
                    loop_heads_.insert(s);
    }

    void run()
    {
        pending_[Kernel::kStart].push_back({exec_.initial_heap(), 0});
        while (!stopped_) {
            const int v = next();
            if (v < 0)
                break;
            std::vector<Item> items;
            items.swap(pending_[v]);
            items = fresh(v, std::move(items));
            if (!items.empty())
                step(v, std::move(items));
        }
        for (const auto& n : exec_.notes())
            note(n);
        report_.prover = prover_.stats();
        if (report_.verdict == Verdict::RaceFree && inconclusive_)
            report_.verdict = Verdict::Inconclusive;
    }

private:
    const Kernel& k_;
    const Config& cfg_;
    AnalysisReport& report_;
    prover::Prover prover_;
    Executor exec_;
    std::vector<int> rpo_;
    std::vector<std::vector<Item>> pending_;
    std::vector<std::set<std::string>> seen_;  // printed input heaps per node
    std::set<int> loop_heads_;
    bool stopped_ = false;
    bool inconclusive_ = false;
    bool pruned_noted_ = false;

    static prover::Options prover_options(const Kernel& k, const Config& cfg)
    {
        prover::Options o = cfg.prover;
        for (const auto& a : k.arrays())
            o.arrays.insert(a);
        return o;
    }

    bool collective(int v) const
    {
        return v == Kernel::kExit ||
               (k_.nodes[v].kind == CfgNode::Kind::Command && k_.nodes[v].command.kind == Command::Kind::Barrier);
    }

    // Thread-local steps first; a barrier (or the exit) fires only once no
    // thread-local work is left, so it sees every heap that can reach it.
    int next() const
    {
        int best = -1;
        for (int pass = 0; pass < 2 && best < 0; ++pass)
            for (int v = 0; v < static_cast<int>(pending_.size()); ++v)
                if (!pending_[v].empty() && collective(v) == (pass == 1) && (best < 0 || rpo_[v] < rpo_[best]))
                    best = v;
        return best;
    }

    void note(const std::string& n)
    {
        if (std::find(report_.notes.begin(), report_.notes.end(), n) == report_.notes.end())
            report_.notes.push_back(n);
    }

    std::vector<Item> fresh(int v, std::vector<Item> items)
    {
        std::vector<Item> out;
        for (auto& it : items) {
            it.heap = simplify(it.heap);
            if (!seen_[v].insert(to_string(it.heap)).second)
                continue;
            // At loop heads a heap entailing an earlier one adds nothing.
            if (loop_heads_.count(v)) {
                const auto& st = report_.states[v];
                bool subsumed = false;
                for (const auto& old : st)
                    if (prover_.prove_entailment(it.heap, old).proven) {
                        subsumed = true;
                        break;
                    }
                if (subsumed)
                    continue;
            }
            out.push_back(std::move(it));
        }
        return out;
    }

    void emit(int v, std::vector<Item> out)
    {
        auto& st = report_.states[v];
        for (auto& it : out) {
            st.push_back(it.heap);
            ++report_.heaps_explored;
        }
        if (st.size() > cfg_.max_heaps) {
            note("heap cap " + std::to_string(cfg_.max_heaps) + " reached at node " + std::to_string(v));
            inconclusive_ = true;
            stopped_ = true;
            return;
        }
        for (int s : k_.succ[v]) {
            const bool back = rpo_[s] <= rpo_[v];
            for (const auto& it : out) {
                const int laps = it.laps + (back ? 1 : 0);
                if (laps > cfg_.loop_bound) {
                    note("loop bound " + std::to_string(cfg_.loop_bound) + " reached at node " + std::to_string(s));
                    inconclusive_ = true;
                    continue;
                }
                pending_[s].push_back({it.heap, laps});
            }
        }
    }

    void error(int v, const std::string& msg, const SymbolicHeap& h)
    {
        Finding f;
        f.kind = Finding::Kind::Error;
        f.node = v;
        f.loc = k_.nodes[v].command.loc;
        f.message = msg;
        f.heap = to_string(h);
        report_.findings.push_back(std::move(f));
        report_.verdict = Verdict::DefiniteError;
        stopped_ = true;
    }

    void race(int v, const RaceWitness& w, const std::vector<SymbolicHeap>& heaps)
    {
        Finding f;
        f.kind = Finding::Kind::Race;
        f.node = v;
        if (v != Kernel::kExit)
            f.loc = k_.nodes[v].command.loc;
        f.message = "cannot prove that instances i and j agree on " + w.location;
        f.heap = to_string(heaps[w.heap_i]);
        f.other_heap = to_string(heaps[w.heap_j]);
        f.race = w;
        report_.findings.push_back(std::move(f));
        report_.verdict = Verdict::PotentialRace;
        stopped_ = true;
    }

    void step(int v, std::vector<Item> items)
    {
        if (v == Kernel::kStart) {
            emit(v, std::move(items));
            return;
        }
        if (collective(v)) {
            ++report_.barriers_checked;
            std::vector<SymbolicHeap> heaps;
            int laps = 0;
            for (const auto& it : items) {
                heaps.push_back(it.heap);
                laps = std::max(laps, it.laps);
            }
            if (v == Kernel::kExit) {
                // The implicit final barrier: NoRace only.
                RaceCheck rc = exec_.no_race(heaps);
                if (!rc.race_free)
                    return race(v, *rc.witness, heaps);
                report_.states[v] = heaps;
                return;
            }
            BarrierOutcome b = exec_.exec_barrier(heaps);
            if (b.race)
                return race(v, *b.witness, heaps);
            std::vector<Item> out;
            for (auto& h : b.heaps)
                out.push_back({std::move(h), laps});
            emit(v, std::move(out));
            return;
        }

        const Command& c = k_.nodes[v].command;
        std::vector<Item> out;
        for (auto& it : items) {
            Outcome o;
            try {
                o = exec_.exec_command(c, it.heap);
            } catch (const std::length_error& e) {
                note(std::string(e.what()) + " at node " + std::to_string(v));
                inconclusive_ = true;
                stopped_ = true;
                return;
            }
            switch (o.kind) {
            case Outcome::Kind::Bottom: return error(v, o.reason, it.heap);
            case Outcome::Kind::Top:
                if (!pruned_noted_) {
                    note("infeasible paths are dropped and take no part in later barrier checks");
                    pruned_noted_ = true;
                }
                break;
            case Outcome::Kind::Heaps:
                for (auto& h : o.heaps)
                    out.push_back({std::move(h), it.laps});
                break;
            }
        }
        emit(v, std::move(out));
    }
};

}  // namespace

AnalysisReport analyze(const Kernel& k, const Config& cfg)
{
    AnalysisReport r;
    Worklist w(k, cfg, r);
    w.run();
    return r;
}

}  // namespace klrace::symexec
