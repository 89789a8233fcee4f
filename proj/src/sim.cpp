#include "robustdrop/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace robustdrop {

std::vector<Task> generate_workload(const WorkloadSpec& spec, const PetMatrix& pet) {
    if (spec.n_tasks < 1) throw std::invalid_argument("workload: n_tasks must be >= 1");
    if (!(spec.arrival_rate > 0.0)) throw std::invalid_argument("workload: arrival_rate must be > 0");
    if (spec.gamma_slack < 0.0) throw std::invalid_argument("workload: gamma_slack must be >= 0");

    std::mt19937_64 rng(spec.seed);
    std::exponential_distribution<double> inter_arrival(spec.arrival_rate);
    std::uniform_int_distribution<std::size_t> type_dist(0, pet.num_task_types() - 1);
    const double avg_all = pet.avg_exec_all();

    std::vector<Task> tasks;
    tasks.reserve(spec.n_tasks);
    Tick now = 0;
    for (std::size_t i = 0; i < spec.n_tasks; ++i) {
        now += std::max<Tick>(1, static_cast<Tick>(std::ceil(inter_arrival(rng))));
        Task t;
        t.id = i;
        t.task_type = type_dist(rng);
        t.arrival = now;
        t.deadline = now + static_cast<Tick>(std::llround(pet.avg_exec_of_type(t.task_type) +
                                                          spec.gamma_slack * avg_all));
        tasks.push_back(t);
    }
    return tasks;
}

std::vector<MachineInstance> expand_machines(const std::vector<MachineConfigEntry>& config) {
    std::vector<MachineInstance> out;
    for (const auto& entry : config) {
        if (entry.count < 1) throw std::invalid_argument("machines: count must be >= 1");
        if (entry.queue_capacity < 1)
            throw std::invalid_argument("machines: queue_capacity must be >= 1");
        for (std::size_t i = 0; i < entry.count; ++i)
            out.push_back({entry.machine_type, entry.price_per_hour, entry.queue_capacity});
    }
    return out;
}

namespace {

struct Event {
    Tick tick = 0;
    int kind = 0;  // 0 = completion, 1 = arrival: completions first on ties
    std::uint64_t seq = 0;
    std::size_t task = 0;
    std::size_t machine = 0;

    bool operator>(const Event& other) const {
        return std::tie(tick, kind, seq) > std::tie(other.tick, other.kind, other.seq);
    }
};

struct MachineRun {
    MachineInstance inst;
    std::deque<std::size_t> pending;  // task indices, FIFO
    std::optional<std::size_t> executing;
    Tick exec_start = 0;
    Tick busy_ticks = 0;
};

Tick sample_duration(const Pmf& cell, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    for (const auto& imp : cell.impulses()) {
        cum += imp.mass;
        if (u < cum) return imp.tick;
    }
    return cell.max_tick();
}

class Trial {
public:
    Trial(const std::vector<Task>& workload, const std::vector<MachineInstance>& machines,
          const PetMatrix& pet, const SimConfig& cfg, std::ostream* trace)
        : tasks_(workload), pet_(pet), cfg_(cfg), trace_(trace), rng_(cfg.seed) {
        cfg_.dropping.validate();
        if (machines.empty()) throw std::invalid_argument("sim: no machines configured");
        machines_.reserve(machines.size());
        for (const auto& m : machines) {
            if (m.machine_type >= pet.num_machine_types())
                throw std::invalid_argument("sim: machine_type outside the PET matrix");
            machines_.push_back({m, {}, std::nullopt, 0, 0});
        }
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            index_of_id_[tasks_[i].id] = i;
            push_event({tasks_[i].arrival, 1, 0, i, 0});
        }
    }

    SimResult run() {
        while (!events_.empty()) {
            const Event ev = events_.top();
            events_.pop();
            now_ = ev.tick;
            if (ev.kind == 0)
                on_completion(ev);
            else
                on_arrival(ev);
            mapping_event();
        }
        SimResult result;
        result.tasks = std::move(tasks_);
        for (const auto& m : machines_) {
            result.machines.push_back(m.inst);
            result.machine_busy_ticks.push_back(m.busy_ticks);
        }
        return result;
    }

private:
    void push_event(Event ev) {
        ev.seq = next_seq_++;
        events_.push(ev);
    }

    void log(const char* kind, std::uint64_t task_id, std::ptrdiff_t machine, const char* detail) {
        if (!trace_) return;
        (*trace_) << now_ << ',' << kind << ',' << task_id << ',' << machine << ',' << detail
                  << '\n';
    }

    void on_arrival(const Event& ev) {
        batch_.push_back(ev.task);
        log("arrival", tasks_[ev.task].id, -1, "");
    }

    void on_completion(const Event& ev) {
        Task& t = tasks_[ev.task];
        MachineRun& m = machines_[ev.machine];
        t.finish = now_;
        t.state = now_ < t.deadline ? TaskState::completed_on_time : TaskState::missed;
        m.executing.reset();
        log("finish", t.id, static_cast<std::ptrdiff_t>(ev.machine),
            t.state == TaskState::completed_on_time ? "ontime" : "missed");
    }

    QueueSnapshot snapshot_of(std::size_t mi) const {
        const MachineRun& m = machines_[mi];
        QueueSnapshot snap;
        snap.machine_type = m.inst.machine_type;
        snap.pet = &pet_;
        if (m.executing) {
            const Task& exec_task = tasks_[*m.executing];
            snap.base = residual_completion(
                pet_.lookup(exec_task.task_type, m.inst.machine_type), m.exec_start, now_);
        } else {
            snap.base = Pmf::delta(now_);
        }
        snap.entries.reserve(m.pending.size());
        for (std::size_t ti : m.pending) {
            const Task& t = tasks_[ti];
            snap.entries.push_back({t.id, t.task_type, t.deadline});
        }
        return snap;
    }

    void drop_pending(std::size_t mi, std::uint64_t task_id, TaskState state, const char* detail) {
        MachineRun& m = machines_[mi];
        for (auto it = m.pending.begin(); it != m.pending.end(); ++it) {
            if (tasks_[*it].id == task_id) {
                tasks_[*it].state = state;
                m.pending.erase(it);
                log("drop", task_id, static_cast<std::ptrdiff_t>(mi), detail);
                return;
            }
        }
    }

    void mapping_event() {
        // (1) reactive sweep, (2) policy pass, per machine in index order
        for (std::size_t mi = 0; mi < machines_.size(); ++mi) {
            QueueSnapshot snap = snapshot_of(mi);
            for (const auto& d : reactive_sweep(snap, now_))
                drop_pending(mi, d.task_id, TaskState::dropped_reactive, "reactive");

            if (cfg_.dropping.kind == DropPolicyKind::reactive_only) continue;
            snap = snapshot_of(mi);
            if (snap.entries.empty()) continue;
            switch (cfg_.dropping.kind) {
                case DropPolicyKind::heuristic:
                    for (const auto& d : heuristic_drop(snap, cfg_.dropping, cfg_.chain))
                        drop_pending(mi, d.task_id, TaskState::dropped_proactive, "proactive");
                    break;
                case DropPolicyKind::optimal: {
                    const auto best = optimal_drop(snap, cfg_.chain);
                    for (std::size_t pos : best.positions)
                        drop_pending(mi, snap.entries[pos].task_id, TaskState::dropped_proactive,
                                     "proactive");
                    break;
                }
                case DropPolicyKind::threshold:
                    for (const auto& d : threshold_drop(snap, cfg_.dropping, cfg_.chain))
                        drop_pending(mi, d.task_id, TaskState::dropped_threshold, "threshold");
                    break;
                default: break;
            }
        }

        // (3)+(4) mapping then dispatch, repeated while either makes
        // progress: a head reactively dropped at start frees its slot
        // within the same event, and the remaining batch must not strand.
        while (true) {
            const std::size_t assigned = run_mapping();
            const std::size_t started = dispatch_idle();
            if (assigned == 0 && started == 0) break;
        }
    }

    std::size_t run_mapping() {
        if (batch_.empty()) return 0;
        std::vector<BatchTask> batch;
        batch.reserve(batch_.size());
        for (std::size_t ti : batch_) {
            const Task& t = tasks_[ti];
            batch.push_back({t.id, t.task_type, t.arrival, t.deadline});
        }
        std::vector<MachineView> views;
        views.reserve(machines_.size());
        bool any_free = false;
        for (std::size_t mi = 0; mi < machines_.size(); ++mi) {
            const MachineRun& m = machines_[mi];
            const std::size_t used = m.pending.size() + (m.executing ? 1 : 0);
            const std::size_t free = used < m.inst.queue_capacity ? m.inst.queue_capacity - used : 0;
            any_free |= free > 0;
            views.push_back({snapshot_of(mi), free});
        }
        if (!any_free) return 0;
        const bool ordered = cfg_.mapping == MappingVariant::FCFS ||
                             cfg_.mapping == MappingVariant::SJF ||
                             cfg_.mapping == MappingVariant::EDF;
        const auto assignments =
            ordered ? map_ordered(batch, std::move(views), cfg_.mapping, cfg_.chain)
                    : map_two_phase(batch, std::move(views), cfg_.mapping, cfg_.chain);
        for (const auto& a : assignments) {
            const std::size_t ti = index_of_id_.at(a.task_id);
            tasks_[ti].state = TaskState::queued;
            tasks_[ti].machine = a.machine;
            machines_[a.machine].pending.push_back(ti);
            batch_.erase(std::find(batch_.begin(), batch_.end(), ti));
            log("map", tasks_[ti].id, static_cast<std::ptrdiff_t>(a.machine), "");
        }
        return assignments.size();
    }

    std::size_t dispatch_idle() {
        std::size_t started = 0;
        for (std::size_t mi = 0; mi < machines_.size(); ++mi) {
            MachineRun& m = machines_[mi];
            while (!m.executing && !m.pending.empty()) {
                const std::size_t ti = m.pending.front();
                m.pending.pop_front();
                Task& t = tasks_[ti];
                if (t.deadline <= now_) {
                    t.state = TaskState::dropped_reactive;
                    log("drop", t.id, static_cast<std::ptrdiff_t>(mi), "reactive");
                    continue;
                }
                const Tick duration = sample_execution(t.task_type, m.inst.machine_type);
                t.state = TaskState::executing;
                t.start = now_;
                t.sampled_exec = duration;
                m.executing = ti;
                m.exec_start = now_;
                m.busy_ticks += duration;
                push_event({now_ + duration, 0, 0, ti, mi});
                log("start", t.id, static_cast<std::ptrdiff_t>(mi), "");
                ++started;
            }
        }
        return started;
    }

    Tick sample_execution(std::size_t task_type, std::size_t machine_type) {
        if (cfg_.sample_from_gamma) {
            const auto params = pet_.gamma_params(task_type, machine_type);
            if (!params)
                throw std::runtime_error("sim: sample_from_gamma needs generator parameters");
            std::gamma_distribution<double> gamma(params->first, params->second);
            return std::max<Tick>(1, static_cast<Tick>(std::llround(gamma(rng_))));
        }
        return sample_duration(pet_.lookup(task_type, machine_type), rng_);
    }

    std::vector<Task> tasks_;
    const PetMatrix& pet_;
    SimConfig cfg_;
    std::ostream* trace_;
    std::mt19937_64 rng_;
    std::vector<MachineRun> machines_;
    std::vector<std::size_t> batch_;  // unmapped task indices, arrival order
    std::unordered_map<std::uint64_t, std::size_t> index_of_id_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t next_seq_ = 0;
    Tick now_ = 0;
};

}  // namespace

SimResult run_trial(const std::vector<Task>& workload, const std::vector<MachineInstance>& machines,
                    const PetMatrix& pet, const SimConfig& cfg, std::ostream* trace) {
    return Trial(workload, machines, pet, cfg, trace).run();
}

TrialResult measure_window(const SimResult& result, std::size_t warmup, std::size_t cooldown) {
    if (warmup + cooldown >= result.tasks.size())
        throw std::invalid_argument("measure_window: empty measurement window");
    TrialResult out;
    for (std::size_t i = warmup; i < result.tasks.size() - cooldown; ++i) {
        ++out.measured;
        switch (result.tasks[i].state) {
            case TaskState::completed_on_time: ++out.on_time; break;
            case TaskState::missed: ++out.missed; break;
            case TaskState::dropped_reactive: ++out.dropped_reactive; break;
            case TaskState::dropped_proactive: ++out.dropped_proactive; break;
            case TaskState::dropped_threshold: ++out.dropped_threshold; break;
            default: break;  // non-terminal states indicate an unfinished run
        }
    }
    out.robustness_pct =
        100.0 * static_cast<double>(out.on_time) / static_cast<double>(out.measured);
    const std::size_t drops = out.dropped_reactive + out.dropped_proactive + out.dropped_threshold;
    out.reactive_fraction =
        drops == 0 ? 0.0 : static_cast<double>(out.dropped_reactive) / static_cast<double>(drops);
    return out;
}

void compute_cost(TrialResult& result, const SimResult& sim) {
    constexpr double kTicksPerHour = 3'600'000.0;
    double total = 0.0;
    for (std::size_t i = 0; i < sim.machines.size(); ++i)
        total += static_cast<double>(sim.machine_busy_ticks[i]) / kTicksPerHour *
                 sim.machines[i].price_per_hour;
    result.total_cost = total;
    if (total == 0.0) {
        result.normalized_cost = 0.0;
    } else if (result.robustness_pct > 0.0) {
        result.normalized_cost = total / result.robustness_pct;
    } else {
        result.normalized_cost = std::numeric_limits<double>::infinity();
        result.normalized_cost_infinite = true;
    }
}

}  // namespace robustdrop
