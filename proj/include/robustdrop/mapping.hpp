#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustdrop/queue_model.hpp"

namespace robustdrop {

enum class MappingVariant { MM, MSD, PAM, FCFS, SJF, EDF };

MappingVariant mapping_variant_from_string(const std::string& name);
std::string to_string(MappingVariant v);

struct BatchTask {
    std::uint64_t id = 0;
    std::size_t task_type = 0;
    Tick arrival = 0;
    Tick deadline = 0;
};

struct MachineView {
    QueueSnapshot snapshot;
    std::size_t free_slots = 0;
};

struct MappingAssignment {
    std::uint64_t task_id = 0;
    std::size_t machine = 0;  // index into the machines vector
    Pmf predicted_completion;
};

// Two-phase batch-mode heuristics (MM, MSD, PAM). Each round, phase 1 pairs
// every unmapped task with its best machine among those with a free slot
// (MM/MSD: minimum expected completion time; PAM: highest chance of
// success). Phase 2 commits one pair per machine (MM: minimum completion,
// ties soonest deadline then task id; MSD: soonest deadline, ties minimum
// completion then task id; PAM: minimum completion, ties shortest expected
// execution then task id). Rounds repeat until the batch or the slots run
// out.
std::vector<MappingAssignment> map_two_phase(const std::vector<BatchTask>& batch,
                                             std::vector<MachineView> machines,
                                             MappingVariant variant,
                                             const ChainOptions& opts = {});

// Ordered heuristics (FCFS by arrival, SJF by mean execution time across
// machine types, EDF by deadline; ties by task id). Tasks are assigned in
// order, each to the machine with the earliest expected availability (mean
// of the chained completion of its last entry), until slots run out.
std::vector<MappingAssignment> map_ordered(const std::vector<BatchTask>& batch,
                                           std::vector<MachineView> machines,
                                           MappingVariant variant,
                                           const ChainOptions& opts = {});

}  // namespace robustdrop
