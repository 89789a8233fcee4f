#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "robustdrop/dropping.hpp"
#include "robustdrop/mapping.hpp"
#include "robustdrop/pet.hpp"

namespace robustdrop {

enum class TaskState {
    unmapped,
    queued,
    executing,
    completed_on_time,
    missed,
    dropped_reactive,
    dropped_proactive,
    dropped_threshold,
};

struct Task {
    std::uint64_t id = 0;
    std::size_t task_type = 0;
    Tick arrival = 0;
    Tick deadline = 0;
    TaskState state = TaskState::unmapped;
    std::optional<Tick> start;
    std::optional<Tick> finish;
    std::optional<Tick> sampled_exec;
    std::optional<std::size_t> machine;
};

struct WorkloadSpec {
    std::size_t n_tasks = 0;
    double arrival_rate = 0.0;  // tasks per tick
    double gamma_slack = 0.0;   // the gamma coefficient of the deadline formula
    std::uint64_t seed = 0;
};

// Poisson arrivals (exponential inter-arrival times, rounded up to >= 1
// tick), uniformly drawn task types, deadlines
//   deadline = arrival + round(avg_type + gamma * avg_all)
// with the averages taken from the PET matrix. Deterministic per seed.
std::vector<Task> generate_workload(const WorkloadSpec& spec, const PetMatrix& pet);

struct MachineConfigEntry {
    std::size_t machine_type = 0;
    std::size_t count = 1;
    double price_per_hour = 0.0;
    std::size_t queue_capacity = 6;  // includes the executing task
};

struct MachineInstance {
    std::size_t machine_type = 0;
    double price_per_hour = 0.0;
    std::size_t queue_capacity = 6;
};

std::vector<MachineInstance> expand_machines(const std::vector<MachineConfigEntry>& config);

struct SimConfig {
    MappingVariant mapping = MappingVariant::PAM;
    DropPolicyConfig dropping;
    std::uint64_t seed = 0;  // execution-sampling stream
    bool sample_from_gamma = false;
    ChainOptions chain;
};

struct SimResult {
    std::vector<Task> tasks;  // arrival order, all in a terminal state
    std::vector<MachineInstance> machines;
    std::vector<Tick> machine_busy_ticks;
};

// Deterministic event loop over arrivals and completions. Every event is a
// mapping event: reactive sweep, proactive/threshold policy pass, mapping,
// then dispatch of idle machines. Executions are sampled once per started
// task and run non-preemptively. Simultaneous events process completions
// before arrivals, then by schedule order.
SimResult run_trial(const std::vector<Task>& workload, const std::vector<MachineInstance>& machines,
                    const PetMatrix& pet, const SimConfig& cfg, std::ostream* trace = nullptr);

struct TrialResult {
    std::size_t measured = 0;
    std::size_t on_time = 0;
    std::size_t missed = 0;
    std::size_t dropped_reactive = 0;
    std::size_t dropped_proactive = 0;
    std::size_t dropped_threshold = 0;
    double robustness_pct = 0.0;     // percent of measured tasks on time
    double reactive_fraction = 0.0;  // reactive drops / all drops (0 when no drops)
    double total_cost = 0.0;
    double normalized_cost = 0.0;
    bool normalized_cost_infinite = false;
};

// Metrics restricted to tasks with arrival-order index in
// [warmup, n - cooldown). Throws when the window is empty.
TrialResult measure_window(const SimResult& result, std::size_t warmup, std::size_t cooldown);

// total = sum over machines of busy time * hourly price; normalized divides
// by the robustness percentage (infinite sentinel + flag at 0% robustness).
void compute_cost(TrialResult& result, const SimResult& sim);

}  // namespace robustdrop
