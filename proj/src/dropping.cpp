#include "robustdrop/dropping.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace robustdrop {

void DropPolicyConfig::validate() const {
    if (!(beta >= 1.0)) throw std::invalid_argument("dropping: beta must be >= 1");
    if (eta < 1) throw std::invalid_argument("dropping: eta must be >= 1");
    if (!(threshold >= 0.0)) throw std::invalid_argument("dropping: threshold must be >= 0");
}

std::vector<DropDecision> reactive_sweep(const QueueSnapshot& snap, Tick now) {
    std::vector<DropDecision> out;
    for (std::size_t i = 0; i < snap.entries.size(); ++i) {
        if (snap.entries[i].deadline <= now)
            out.push_back({snap.entries[i].task_id, DropReason::missed_deadline, i});
    }
    return out;
}

std::vector<DropDecision> heuristic_drop(const QueueSnapshot& snap, const DropPolicyConfig& cfg,
                                         const ChainOptions& opts) {
    cfg.validate();
    if (cfg.kind != DropPolicyKind::heuristic)
        throw std::invalid_argument("heuristic_drop: wrong policy kind");
    std::vector<DropDecision> decisions;
    if (std::isinf(cfg.beta)) return decisions;

    std::vector<QueueEntry> working = snap.entries;
    const auto exec_of = [&](const QueueEntry& e) -> const Pmf& {
        return snap.pet->lookup(e.task_type, snap.machine_type);
    };

    Pmf prefix = snap.base;  // completion of the entry ahead of position i
    std::size_t i = 0;
    while (i + 1 < working.size()) {
        const std::size_t hi = std::min(i + static_cast<std::size_t>(cfg.eta), working.size() - 1);

        // Current chances over the window [i, hi].
        double kept_sum = 0.0;
        Pmf advanced;  // completion of entry i, reused when the drop is rejected
        {
            Pmf cur = prefix;
            for (std::size_t n = i; n <= hi; ++n) {
                cur = chain_step(cur, exec_of(working[n]), working[n].deadline, opts);
                kept_sum += chance_of_success(cur, working[n].deadline);
                if (n == i) advanced = cur;
            }
        }

        // Provisional-drop chances over [i+1, hi].
        double drop_sum = 0.0;
        {
            Pmf cur = prefix;
            for (std::size_t n = i + 1; n <= hi; ++n) {
                cur = chain_step(cur, exec_of(working[n]), working[n].deadline, opts);
                drop_sum += chance_of_success(cur, working[n].deadline);
            }
        }

        if (drop_sum > cfg.beta * kept_sum) {
            decisions.push_back({working[i].task_id, DropReason::proactive, i});
            working.erase(working.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            prefix = std::move(advanced);
            ++i;
        }
    }
    return decisions;
}

OptimalDropResult optimal_drop(const QueueSnapshot& snap, const ChainOptions& opts) {
    const std::size_t q = snap.entries.size();
    if (q > 16) throw std::invalid_argument("optimal search too large");

    OptimalDropResult best;
    best.robustness = -1.0;

    if (q == 0) return {{}, 0.0, 1};

    const auto exec_of = [&](const QueueEntry& e) -> const Pmf& {
        return snap.pet->lookup(e.task_type, snap.machine_type);
    };

    std::size_t examined = 0;
    std::vector<std::size_t> chosen;

    const auto consider = [&](double robustness) {
        ++examined;
        const bool better =
            robustness > best.robustness ||
            (robustness == best.robustness &&
             (chosen.size() < best.positions.size() ||
              (chosen.size() == best.positions.size() && chosen < best.positions)));
        if (better) {
            best.robustness = robustness;
            best.positions = chosen;
        }
    };

    // Depth-first over keep/drop for positions 0..q-2; completion prefixes
    // are shared along the tree. The last entry is always kept.
    std::function<void(std::size_t, const Pmf&, double)> walk = [&](std::size_t pos,
                                                                    const Pmf& prefix,
                                                                    double acc) {
        if (pos == q - 1) {
            const Pmf last = chain_step(prefix, exec_of(snap.entries[pos]),
                                        snap.entries[pos].deadline, opts);
            consider(acc + chance_of_success(last, snap.entries[pos].deadline));
            return;
        }
        const Pmf kept = chain_step(prefix, exec_of(snap.entries[pos]),
                                    snap.entries[pos].deadline, opts);
        walk(pos + 1, kept, acc + chance_of_success(kept, snap.entries[pos].deadline));

        chosen.push_back(pos);
        walk(pos + 1, prefix, acc);
        chosen.pop_back();
    };
    walk(0, snap.base, 0.0);

    best.subsets_examined = examined;
    return best;
}

std::vector<DropDecision> threshold_drop(const QueueSnapshot& snap, const DropPolicyConfig& cfg,
                                         const ChainOptions& opts) {
    cfg.validate();
    if (cfg.kind != DropPolicyKind::threshold)
        throw std::invalid_argument("threshold_drop: wrong policy kind");
    std::vector<DropDecision> decisions;
    std::vector<QueueEntry> working = snap.entries;

    Pmf prefix = snap.base;
    std::size_t i = 0;
    while (i < working.size()) {
        const Pmf& exec = snap.pet->lookup(working[i].task_type, snap.machine_type);
        Pmf completion = chain_step(prefix, exec, working[i].deadline, opts);
        if (chance_of_success(completion, working[i].deadline) < cfg.threshold) {
            decisions.push_back({working[i].task_id, DropReason::below_threshold, i});
            working.erase(working.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            prefix = std::move(completion);
            ++i;
        }
    }
    return decisions;
}

}  // namespace robustdrop
