#include "robustdrop/queue_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace robustdrop {

Pmf chain_step(const Pmf& prev, const Pmf& exec, Tick deadline, const ChainOptions& opts) {
    return compact(convolve_truncated(prev, exec, deadline), opts.max_impulses);
}

std::vector<ChainResult> completion_chain(const QueueSnapshot& snap, const ChainOptions& opts) {
    std::vector<ChainResult> out;
    out.reserve(snap.entries.size());
    const Pmf* prev = &snap.base;
    for (const auto& entry : snap.entries) {
        const Pmf& exec = snap.pet->lookup(entry.task_type, snap.machine_type);
        Pmf completion = chain_step(*prev, exec, entry.deadline, opts);
        const double chance = chance_of_success(completion, entry.deadline);
        out.push_back({std::move(completion), chance});
        prev = &out.back().completion;
    }
    return out;
}

double instantaneous_robustness(const QueueSnapshot& snap, const ChainOptions& opts) {
    double total = 0.0;
    for (const auto& r : completion_chain(snap, opts)) total += r.chance;
    return total;
}

Pmf queue_tail(const QueueSnapshot& snap, const ChainOptions& opts) {
    Pmf tail = snap.base;
    for (const auto& entry : snap.entries) {
        const Pmf& exec = snap.pet->lookup(entry.task_type, snap.machine_type);
        tail = chain_step(tail, exec, entry.deadline, opts);
    }
    return tail;
}

std::vector<ChainResult> chain_with_drop(const QueueSnapshot& snap,
                                         const std::vector<std::size_t>& dropped,
                                         const ChainOptions& opts) {
    QueueSnapshot survivor = snap;
    if (!dropped.empty()) {
        std::vector<bool> is_dropped(snap.entries.size(), false);
        for (std::size_t pos : dropped) {
            if (pos >= snap.entries.size())
                throw std::out_of_range("chain_with_drop: position out of range");
            is_dropped[pos] = true;
        }
        survivor.entries.clear();
        for (std::size_t i = 0; i < snap.entries.size(); ++i)
            if (!is_dropped[i]) survivor.entries.push_back(snap.entries[i]);
    }
    return completion_chain(survivor, opts);
}

double robustness_after_drop(const QueueSnapshot& snap, std::size_t position,
                             const ChainOptions& opts) {
    double total = 0.0;
    for (const auto& r : chain_with_drop(snap, {position}, opts)) total += r.chance;
    return total;
}

Pmf residual_completion(const Pmf& exec, Tick start, Tick now) {
    const Tick elapsed = now - start;
    std::vector<Impulse> surviving;
    double mass = 0.0;
    for (const auto& imp : exec.impulses()) {
        if (imp.tick > elapsed) {
            surviving.push_back({start + imp.tick, imp.mass});
            mass += imp.mass;
        }
    }
    if (surviving.empty()) return Pmf::delta(now + 1);
    for (auto& imp : surviving) imp.mass /= mass;
    return Pmf::from_impulses(std::move(surviving));
}

}  // namespace robustdrop
