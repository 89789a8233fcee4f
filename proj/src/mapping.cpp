#include "robustdrop/mapping.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace robustdrop {

MappingVariant mapping_variant_from_string(const std::string& name) {
    if (name == "MM") return MappingVariant::MM;
    if (name == "MSD") return MappingVariant::MSD;
    if (name == "PAM") return MappingVariant::PAM;
    if (name == "FCFS") return MappingVariant::FCFS;
    if (name == "SJF") return MappingVariant::SJF;
    if (name == "EDF") return MappingVariant::EDF;
    throw std::invalid_argument("unknown mapping heuristic: " + name);
}

std::string to_string(MappingVariant v) {
    switch (v) {
        case MappingVariant::MM: return "MM";
        case MappingVariant::MSD: return "MSD";
        case MappingVariant::PAM: return "PAM";
        case MappingVariant::FCFS: return "FCFS";
        case MappingVariant::SJF: return "SJF";
        case MappingVariant::EDF: return "EDF";
    }
    return "?";
}

namespace {

struct Pair {
    std::size_t task_index = 0;  // into the batch vector
    double completion_mean = 0.0;
    double chance = 0.0;
    double exec_mean = 0.0;
};

}  // namespace

std::vector<MappingAssignment> map_two_phase(const std::vector<BatchTask>& batch,
                                             std::vector<MachineView> machines,
                                             MappingVariant variant, const ChainOptions& opts) {
    if (variant != MappingVariant::MM && variant != MappingVariant::MSD &&
        variant != MappingVariant::PAM)
        throw std::invalid_argument("map_two_phase: not a two-phase heuristic");

    std::vector<MappingAssignment> assignments;
    if (batch.empty() || machines.empty()) return assignments;
    const PetMatrix& pet = *machines.front().snapshot.pet;

    std::vector<Pmf> tails;
    tails.reserve(machines.size());
    for (const auto& m : machines) tails.push_back(queue_tail(m.snapshot, opts));

    std::vector<bool> assigned(batch.size(), false);
    std::size_t remaining = batch.size();

    while (remaining > 0) {
        bool any_free = false;
        for (const auto& m : machines) any_free |= m.free_slots > 0;
        if (!any_free) break;

        // Phase 1: one provisional (task, best machine) pair per task.
        std::vector<std::vector<Pair>> per_machine(machines.size());
        for (std::size_t t = 0; t < batch.size(); ++t) {
            if (assigned[t]) continue;
            const BatchTask& task = batch[t];
            std::size_t best_machine = machines.size();
            Pair best{};
            for (std::size_t m = 0; m < machines.size(); ++m) {
                if (machines[m].free_slots == 0) continue;
                const std::size_t mt = machines[m].snapshot.machine_type;
                Pair cand;
                cand.task_index = t;
                cand.exec_mean = pet.mean_exec(task.task_type, mt);
                cand.completion_mean = truncated_mean(tails[m], cand.exec_mean, task.deadline);
                if (variant == MappingVariant::PAM)
                    cand.chance =
                        truncated_chance(tails[m], pet.lookup(task.task_type, mt), task.deadline);
                bool better = best_machine == machines.size();
                if (!better) {
                    if (variant == MappingVariant::PAM) {
                        better = cand.chance > best.chance ||
                                 (cand.chance == best.chance &&
                                  cand.completion_mean < best.completion_mean);
                    } else {
                        better = cand.completion_mean < best.completion_mean;
                    }
                }
                if (better) {
                    best = cand;
                    best_machine = m;
                }
            }
            per_machine[best_machine].push_back(best);
        }

        // Phase 2: per machine with a free slot, commit the winning pair.
        bool committed_any = false;
        for (std::size_t m = 0; m < machines.size(); ++m) {
            if (machines[m].free_slots == 0 || per_machine[m].empty()) continue;
            const auto wins = [&](const Pair& a, const Pair& b) {
                const BatchTask& ta = batch[a.task_index];
                const BatchTask& tb = batch[b.task_index];
                switch (variant) {
                    case MappingVariant::MM:
                        return std::tie(a.completion_mean, ta.deadline, ta.id) <
                               std::tie(b.completion_mean, tb.deadline, tb.id);
                    case MappingVariant::MSD:
                        return std::tie(ta.deadline, a.completion_mean, ta.id) <
                               std::tie(tb.deadline, b.completion_mean, tb.id);
                    default:  // PAM
                        return std::tie(a.completion_mean, a.exec_mean, ta.id) <
                               std::tie(b.completion_mean, b.exec_mean, tb.id);
                }
            };
            const Pair* winner = &per_machine[m].front();
            for (const auto& p : per_machine[m])
                if (wins(p, *winner)) winner = &p;

            const BatchTask& task = batch[winner->task_index];
            const std::size_t mt = machines[m].snapshot.machine_type;
            Pmf predicted =
                chain_step(tails[m], pet.lookup(task.task_type, mt), task.deadline, opts);
            assignments.push_back({task.id, m, predicted});
            tails[m] = std::move(predicted);
            machines[m].snapshot.entries.push_back({task.id, task.task_type, task.deadline});
            machines[m].free_slots--;
            assigned[winner->task_index] = true;
            --remaining;
            committed_any = true;
        }
        if (!committed_any) break;
    }
    return assignments;
}

std::vector<MappingAssignment> map_ordered(const std::vector<BatchTask>& batch,
                                           std::vector<MachineView> machines,
                                           MappingVariant variant, const ChainOptions& opts) {
    if (variant != MappingVariant::FCFS && variant != MappingVariant::SJF &&
        variant != MappingVariant::EDF)
        throw std::invalid_argument("map_ordered: not an ordered heuristic");

    std::vector<MappingAssignment> assignments;
    if (batch.empty() || machines.empty()) return assignments;
    const PetMatrix& pet = *machines.front().snapshot.pet;

    std::vector<std::size_t> order(batch.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const BatchTask& ta = batch[a];
        const BatchTask& tb = batch[b];
        switch (variant) {
            case MappingVariant::FCFS:
                return std::tie(ta.arrival, ta.id) < std::tie(tb.arrival, tb.id);
            case MappingVariant::EDF:
                return std::tie(ta.deadline, ta.id) < std::tie(tb.deadline, tb.id);
            default: {  // SJF
                const double ma = pet.avg_exec_of_type(ta.task_type);
                const double mb = pet.avg_exec_of_type(tb.task_type);
                return std::tie(ma, ta.id) < std::tie(mb, tb.id);
            }
        }
    });

    std::vector<Pmf> tails;
    tails.reserve(machines.size());
    for (const auto& m : machines) tails.push_back(queue_tail(m.snapshot, opts));

    for (std::size_t idx : order) {
        std::size_t best = machines.size();
        double best_avail = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < machines.size(); ++m) {
            if (machines[m].free_slots == 0) continue;
            const double avail = tails[m].mean();
            if (avail < best_avail) {
                best_avail = avail;
                best = m;
            }
        }
        if (best == machines.size()) break;  // no free slot anywhere

        const BatchTask& task = batch[idx];
        const std::size_t mt = machines[best].snapshot.machine_type;
        Pmf predicted =
            chain_step(tails[best], pet.lookup(task.task_type, mt), task.deadline, opts);
        assignments.push_back({task.id, best, predicted});
        tails[best] = std::move(predicted);
        machines[best].snapshot.entries.push_back({task.id, task.task_type, task.deadline});
        machines[best].free_slots--;
    }
    return assignments;
}

}  // namespace robustdrop
