#pragma once

#include <cstdint>
#include <vector>

#include "robustdrop/queue_model.hpp"

namespace robustdrop {

enum class DropPolicyKind { reactive_only, threshold, heuristic, optimal };

struct DropPolicyConfig {
    DropPolicyKind kind = DropPolicyKind::heuristic;
    // Robustness improvement factor. beta = 1 drops on any net gain;
    // beta = +inf disables proactive dropping entirely.
    double beta = 1.0;
    // Effective depth: how many influence-zone successors the heuristic
    // weighs against a candidate drop.
    int eta = 2;
    // Chance-of-success floor for the threshold baseline. Values above 1
    // drop every entry that is not certain to succeed.
    double threshold = 0.5;

    void validate() const;
};

enum class DropReason { missed_deadline, below_threshold, proactive };

struct DropDecision {
    std::uint64_t task_id = 0;
    DropReason reason = DropReason::missed_deadline;
    std::size_t position = 0;  // entry index at decision time
};

// Entries whose deadline is at or before `now` (they can no longer begin
// strictly before their deadline). Positions index snap.entries.
std::vector<DropDecision> reactive_sweep(const QueueSnapshot& snap, Tick now);

// Single head-to-tail pass of the proactive dropping heuristic. For each
// entry i the eta-clipped window test is evaluated: drop iff
//   sum_{n=i+1..i+eta} p_n^(i)  >  beta * sum_{n=i..i+eta} p_n
// with windows clipped at the queue tail. A confirmed drop takes effect
// immediately, so later candidates are judged against the shortened queue.
// The last remaining entry is never dropped (its influence zone is empty).
std::vector<DropDecision> heuristic_drop(const QueueSnapshot& snap, const DropPolicyConfig& cfg,
                                         const ChainOptions& opts = {});

struct OptimalDropResult {
    std::vector<std::size_t> positions;  // dropped entry positions, ascending
    double robustness = 0.0;             // sum of surviving chances
    std::size_t subsets_examined = 0;    // 2^(q-1)
};

// Exhaustive search over every subset of the first q-1 entries (the last
// entry's influence zone is empty, so it is excluded). Ties are broken by
// smaller subset, then lexicographically smaller positions.
OptimalDropResult optimal_drop(const QueueSnapshot& snap, const ChainOptions& opts = {});

// Static-threshold baseline: head-to-tail pass dropping any entry whose
// chance of success on the current (already shortened) chain is below the
// configured threshold. The last entry is a candidate like any other.
std::vector<DropDecision> threshold_drop(const QueueSnapshot& snap, const DropPolicyConfig& cfg,
                                         const ChainOptions& opts = {});

}  // namespace robustdrop
