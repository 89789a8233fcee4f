#pragma once

#include <cstdint>
#include <vector>

#include "robustdrop/pet.hpp"
#include "robustdrop/pmf.hpp"

namespace robustdrop {

struct QueueEntry {
    std::uint64_t task_id = 0;
    std::size_t task_type = 0;
    Tick deadline = 0;
};

/// Immutable view of one machine queue for stochastic analysis: the
/// machine's availability-time Pmf plus the pending entries in FIFO order.
/// The executing task is not an entry; it is folded into `base`.
struct QueueSnapshot {
    std::size_t machine_type = 0;
    Pmf base;
    std::vector<QueueEntry> entries;
    const PetMatrix* pet = nullptr;
};

struct ChainResult {
    Pmf completion;
    double chance = 0.0;
};

struct ChainOptions {
    std::size_t max_impulses = kDefaultMaxImpulses;
};

// One chain step: deadline-truncated convolution followed by compaction.
Pmf chain_step(const Pmf& prev, const Pmf& exec, Tick deadline, const ChainOptions& opts);

// Completion Pmf and chance of success for every pending entry, chained
// head to tail from `base`.
std::vector<ChainResult> completion_chain(const QueueSnapshot& snap, const ChainOptions& opts = {});

// Sum of the chances of success over the queue.
double instantaneous_robustness(const QueueSnapshot& snap, const ChainOptions& opts = {});

// Completion Pmf of the queue's final entry (the machine's availability
// distribution for a task appended next); `base` when the queue is empty.
Pmf queue_tail(const QueueSnapshot& snap, const ChainOptions& opts = {});

// Chain over the entries that survive removing `dropped` (positions into
// snap.entries); results are reported for survivors only, in order.
std::vector<ChainResult> chain_with_drop(const QueueSnapshot& snap,
                                         const std::vector<std::size_t>& dropped,
                                         const ChainOptions& opts = {});

// Instantaneous robustness of the queue once entry `position` is
// provisionally dropped (sum over all surviving entries).
double robustness_after_drop(const QueueSnapshot& snap, std::size_t position,
                             const ChainOptions& opts = {});

// Availability Pmf of a machine executing a task of the given execution
// distribution since `start`: the distribution conditioned on not having
// finished by `now` (mass at elapsed durations discarded, renormalized),
// expressed in absolute ticks. Falls back to an impulse at now + 1 when the
// whole distribution is already exhausted.
Pmf residual_completion(const Pmf& exec, Tick start, Tick now);

}  // namespace robustdrop
