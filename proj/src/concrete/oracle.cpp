#include <algorithm>
#include <cstring>
#include <functional>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "klrace/concrete.hpp"

namespace klrace::concrete {

namespace {

using Status = ThreadSlot::Status;

bool at_exit(const Kernel& k, int pc)
{
    const auto& s = k.succ[static_cast<std::size_t>(pc)];
    return s.size() == 1 && s[0] == Kernel::kExit;
}

void append(std::string& out, Value v)
{
    char buf[sizeof(Value)];
    std::memcpy(buf, &v, sizeof v);
    out.append(buf, sizeof buf);
}

void encode_shared(std::string& out, const SharedState& s)
{
    for (const auto& [_, v] : s.stack)
        append(out, v);
    for (const auto& [_, v] : s.heap)
        append(out, v);
}

std::string encode(const GlobalState& g)
{
    std::string out;
    append(out, g.epoch);
    for (const auto& t : g.threads) {
        append(out, t.pc);
        append(out, static_cast<Value>(t.status));
        for (const auto& [_, v] : t.state.stack)
            append(out, v);
        if (t.snapshot) {
            append(out, 1);
            encode_shared(out, *t.snapshot);
        } else {
            append(out, 0);
        }
    }
    encode_shared(out, g.shared);
    return out;
}

// Applies the barrier rules once no thread can run: releases suspended
// threads, or performs the final implicit barrier when all have exited.
void synchronize(const Kernel& k, GlobalStep& step, Semantics mode)
{
    auto& g = step.state;
    for (;;) {
        bool any_running = false, any_suspended = false, any_done = false;
        for (const auto& t : g.threads) {
            any_running |= t.status == Status::Running;
            any_suspended |= t.status == Status::Suspended;
            any_done |= t.status == Status::Done;
        }
        if (any_running || g.threads.empty())
            return;

        auto mismatched = [&] {
            return std::any_of(g.threads.begin(), g.threads.end(),
                               [&](const ThreadSlot& t) { return t.snapshot && !(*t.snapshot == g.shared); });
        };

        if (!any_suspended) {
            if (mode == Semantics::Strict && mismatched()) {
                step.kind = GlobalStep::Kind::Bottom;
                step.race = true;
                step.fault = "shared state at final barrier differs from a thread's exit snapshot";
                return;
            }
            step.releases.push_back({g.epoch, true, g.shared});
            return;
        }
        if (any_done) {
            step.kind = GlobalStep::Kind::Bottom;
            step.fault = "barrier divergence: some threads exited while others wait at a barrier";
            return;
        }
        if (mode == Semantics::Strict && mismatched()) {
            step.kind = GlobalStep::Kind::Bottom;
            step.race = true;
            step.fault = "shared state at barrier release differs from a thread's suspension snapshot";
            return;
        }
        step.releases.push_back({g.epoch, false, g.shared});
        ++g.epoch;
        for (auto& t : g.threads) {
            t.status = Status::Running;
            t.snapshot.reset();
            if (at_exit(k, t.pc)) {
                t.status = Status::Done;
                t.snapshot = g.shared;
            }
        }
    }
}

std::string point_name(const Release& r)
{
    return r.final ? std::string("final") : "epoch " + std::to_string(r.epoch);
}

}  // namespace

std::string_view to_string(Semantics s) { return s == Semantics::Strict ? "strict" : "epoch"; }

std::optional<Semantics> parse_semantics(std::string_view s)
{
    if (s == "strict")
        return Semantics::Strict;
    if (s == "epoch")
        return Semantics::Epoch;
    return std::nullopt;
}

std::string_view to_string(OracleVerdict::Kind k)
{
    switch (k) {
    case OracleVerdict::Kind::RaceFree: return "race-free";
    case OracleVerdict::Kind::Race: return "race";
    case OracleVerdict::Kind::RuntimeError: return "runtime-error";
    case OracleVerdict::Kind::Inconclusive: return "inconclusive";
    }
    return "?";
}

GlobalState initial_state(const Kernel& k, int threads, const Inputs& inputs)
{
    if (threads < 1)
        throw std::invalid_argument("thread count must be at least 1");
    for (const auto& [name, _] : inputs.arrays)
        if (!k.is_array(name))
            throw std::invalid_argument("input binds " + name + " as an array but the kernel has no such array");
    for (const auto& [name, _] : inputs.scalars) {
        auto kind = k.kind_of(name);
        if (!kind || *kind == VarKind::SharedArray)
            throw std::invalid_argument("input binds unknown scalar " + name);
    }

    GlobalState g;
    Value next_base = 16;
    for (const auto& a : k.arrays()) {
        auto it = inputs.arrays.find(a);
        if (it == inputs.arrays.end())
            throw std::invalid_argument("no input values for array " + a);
        g.shared.stack[a] = next_base;
        g.shared.sizes[a] = static_cast<Value>(it->second.size());
        for (std::size_t i = 0; i < it->second.size(); ++i)
            g.shared.heap[next_base + static_cast<Value>(i)] = it->second[i];
        next_base += static_cast<Value>(it->second.size()) + 16;
    }
    auto scalar = [&](const std::string& n) {
        auto it = inputs.scalars.find(n);
        return it == inputs.scalars.end() ? Value{0} : it->second;
    };
    for (const auto& s : k.shared_scalars())
        g.shared.stack[s] = scalar(s);

    for (int i = 0; i < threads; ++i) {
        ThreadSlot slot;
        slot.state.tid = i;
        for (const auto& p : k.private_scalars())
            slot.state.stack[p] = scalar(p);
        if (at_exit(k, Kernel::kStart)) {
            slot.status = Status::Done;
            slot.snapshot = g.shared;
        }
        g.threads.push_back(std::move(slot));
    }
    return g;
}

std::vector<int> runnable(const GlobalState& g)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < g.threads.size(); ++i)
        if (g.threads[i].status == Status::Running)
            out.push_back(static_cast<int>(i));
    return out;
}

GlobalStep step_global(const Kernel& k, const GlobalState& g, int thread, Semantics mode)
{
    if (thread < 0 || static_cast<std::size_t>(thread) >= g.threads.size())
        throw std::invalid_argument("no thread " + std::to_string(thread));
    const ThreadSlot& slot = g.threads[static_cast<std::size_t>(thread)];
    if (slot.status != Status::Running)
        throw std::invalid_argument("thread " + std::to_string(thread) + " is not runnable");

    GlobalStep step;
    const auto& cands = k.succ[static_cast<std::size_t>(slot.pc)];
    int node = cands.front();
    if (cands.size() > 1) {
        // Branch: the arms are guarded by assume(b) / assume(!b), so exactly
        // one is enabled in the current state; the other would step to top.
        node = -1;
        for (int c : cands) {
            const auto& cmd = k.nodes[static_cast<std::size_t>(c)].command;
            try {
                if (eval_bool(*cmd.cond, slot.state, g.shared)) {
                    node = c;
                    break;
                }
            } catch (const RuntimeFault&) {
                node = c;  // let step_thread report the fault
                break;
            }
        }
        if (node < 0) {
            step.kind = GlobalStep::Kind::Pruned;
            step.node = cands.front();
            return step;
        }
    }
    step.node = node;
    const Command& cmd = k.nodes[static_cast<std::size_t>(node)].command;
    StepOutcome out = step_thread(k, cmd, slot.state, g.shared);

    switch (out.kind) {
    case StepOutcome::Kind::Bottom:
        step.kind = GlobalStep::Kind::Bottom;
        step.fault = out.fault;
        return step;
    case StepOutcome::Kind::Top:
        step.kind = GlobalStep::Kind::Pruned;
        return step;
    default: break;
    }

    step.state = g;
    ThreadSlot& ns = step.state.threads[static_cast<std::size_t>(thread)];
    ns.state = std::move(out.thread);
    step.state.shared = std::move(out.shared);
    ns.pc = node;
    if (out.kind == StepOutcome::Kind::Suspended) {
        ns.status = Status::Suspended;
        ns.snapshot = step.state.shared;
    } else if (at_exit(k, node)) {
        ns.status = Status::Done;
        ns.snapshot = step.state.shared;
    }
    synchronize(k, step, mode);
    return step;
}

OracleVerdict run_oracle(const Kernel& k, int threads, const Inputs& inputs, const OracleOptions& opts)
{
    OracleVerdict v;
    const GlobalState init = initial_state(k, threads, inputs);

    std::unordered_set<std::string> visited;
    Schedule path;
    std::map<std::string, std::map<std::string, Schedule>> points;  // point -> digest -> first schedule
    std::optional<Schedule> error_path, race_path;
    std::string error_fault, race_fault;
    bool budget_hit = false;

    auto record = [&](const Release& r) {
        auto& seen = points[point_name(r)];
        seen.emplace(digest(r.shared), path);
    };

    std::function<void(const GlobalState&)> visit = [&](const GlobalState& g) {
        if (budget_hit)
            return;
        if (!opts.count_schedules && !visited.insert(encode(g)).second)
            return;
        if (++v.states_explored > opts.max_states) {
            budget_hit = true;
            return;
        }
        const auto ready = runnable(g);
        if (ready.empty()) {
            ++v.maximal_schedules;
            return;
        }
        for (int t : ready) {
            GlobalStep step = step_global(k, g, t, opts.semantics);
            path.push_back({t, step.node});
            for (const auto& r : step.releases)
                record(r);
            switch (step.kind) {
            case GlobalStep::Kind::Bottom:
                ++v.maximal_schedules;
                if (step.race) {
                    v.strict_race_seen = true;
                    if (!race_path) {
                        race_path = path;
                        race_fault = step.fault;
                    }
                } else if (!error_path) {
                    error_path = path;
                    error_fault = step.fault;
                }
                break;
            case GlobalStep::Kind::Pruned: ++v.pruned_schedules; break;
            case GlobalStep::Kind::Next: visit(step.state); break;
            }
            path.pop_back();
            if (budget_hit)
                return;
        }
    };

    if (runnable(init).empty()) {
        GlobalStep boot;
        boot.state = init;
        synchronize(k, boot, opts.semantics);
        for (const auto& r : boot.releases)
            record(r);
        ++v.states_explored;
        ++v.maximal_schedules;
    } else {
        visit(init);
    }

    for (const auto& [point, digests] : points) {
        auto& out = v.epoch_digests[point];
        for (const auto& [d, _] : digests)
            out.push_back(d);
        if (digests.size() > 1 && !v.epoch_divergence_seen) {
            v.epoch_divergence_seen = true;
            auto it = digests.begin();
            v.witness = it->second;
            v.witness_alt = std::next(it)->second;
            v.witness_point = point;
        }
    }

    if (error_path) {
        v.kind = OracleVerdict::Kind::RuntimeError;
        v.witness = *error_path;
        v.witness_alt.clear();
        v.witness_point.clear();
        v.fault = error_fault;
    } else if (opts.semantics == Semantics::Strict && v.strict_race_seen) {
        v.kind = OracleVerdict::Kind::Race;
        v.witness = *race_path;
        v.witness_alt.clear();
        v.witness_point.clear();
        v.fault = race_fault;
    } else if (opts.semantics == Semantics::Epoch && v.epoch_divergence_seen) {
        v.kind = OracleVerdict::Kind::Race;
        v.fault = "shared state at " + v.witness_point + " depends on the schedule";
    } else if (budget_hit) {
        v.kind = OracleVerdict::Kind::Inconclusive;
        v.witness.clear();
        v.witness_alt.clear();
        v.note = "state budget of " + std::to_string(opts.max_states) + " exceeded";
    } else {
        v.kind = OracleVerdict::Kind::RaceFree;
        v.witness.clear();
        v.witness_alt.clear();
        v.witness_point.clear();
    }
    if (budget_hit && v.kind != OracleVerdict::Kind::Inconclusive)
        v.note = "state budget exceeded after a definite finding";
    if (points.empty() && v.kind == OracleVerdict::Kind::RaceFree)
        v.note = "no schedule reached a synchronization point (all paths pruned)";
    return v;
}

ReplayResult replay(const Kernel& k, int threads, const Inputs& inputs, const std::vector<int>& schedule,
                    Semantics mode)
{
    ReplayResult r;
    r.state = initial_state(k, threads, inputs);
    if (runnable(r.state).empty()) {
        GlobalStep boot;
        boot.state = r.state;
        synchronize(k, boot, mode);
        r.releases = boot.releases;
        if (boot.kind == GlobalStep::Kind::Bottom) {
            r.kind = ReplayResult::Kind::Bottom;
            r.fault = boot.fault;
            return r;
        }
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const int t = schedule[i];
        if (t < 0 || static_cast<std::size_t>(t) >= r.state.threads.size() ||
            r.state.threads[static_cast<std::size_t>(t)].status != Status::Running)
            throw InvalidSchedule("schedule step " + std::to_string(i) + " selects thread " + std::to_string(t) +
                                  ", which cannot run");
        GlobalStep step = step_global(k, r.state, t, mode);
        r.releases.insert(r.releases.end(), step.releases.begin(), step.releases.end());
        if (step.kind == GlobalStep::Kind::Bottom) {
            r.kind = ReplayResult::Kind::Bottom;
            r.fault = step.fault;
            return r;
        }
        if (step.kind == GlobalStep::Kind::Pruned) {
            r.kind = ReplayResult::Kind::Pruned;
            return r;
        }
        r.state = std::move(step.state);
    }
    r.kind = runnable(r.state).empty() ? ReplayResult::Kind::Completed : ReplayResult::Kind::Incomplete;
    return r;
}

std::string digest(const SharedState& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [name, v] : s.stack) {
        mix(name.data(), name.size());
        mix(&v, sizeof v);
    }
    for (const auto& [loc, v] : s.heap) {
        mix(&loc, sizeof loc);
        mix(&v, sizeof v);
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string describe(const SharedState& s, const Kernel& k)
{
    std::ostringstream os;
    bool first = true;
    auto sep = [&] {
        if (!first)
            os << "; ";
        first = false;
    };
    for (const auto& name : k.shared_scalars()) {
        sep();
        auto it = s.stack.find(name);
        os << name << "=" << (it == s.stack.end() ? 0 : it->second);
    }
    for (const auto& a : k.arrays()) {
        sep();
        os << a << "=[";
        const Value base = s.stack.at(a);
        const Value n = s.sizes.at(a);
        for (Value i = 0; i < n; ++i) {
            if (i)
                os << ",";
            auto it = s.heap.find(base + i);
            os << (it == s.heap.end() ? 0 : it->second);
        }
        os << "]";
    }
    return os.str();
}

}  // namespace klrace::concrete
