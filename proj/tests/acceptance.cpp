// Acceptance suite: one checked, printed verdict per criterion, at the
// tolerances stated in the project requirements. Desk scale throughout:
// 8 machines x 12 task types, 2,000 tasks per trial, 10 trials, fixed seeds.
#include "doctest.h"

#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "trace_checks.hpp"
#include "robustdrop/chart.hpp"
#include "robustdrop/experiment.hpp"

using namespace robustdrop;
using testutil::make_pmf;
using testutil::random_pmf;

#ifndef ROBUSTDROP_CONFIG_DIR
#define ROBUSTDROP_CONFIG_DIR "configs"
#endif

namespace {

void verdict(int criterion, const char* name, bool ok) {
    std::printf("criterion %2d (%s): %s\n", criterion, name, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, " failed: ", name);
}

std::filesystem::path config_path(const char* name) {
    return std::filesystem::path(ROBUSTDROP_CONFIG_DIR) / name;
}

// ---- shared state for the trend criteria ------------------------------

struct PointKey {
    std::string mapping;
    std::string policy;
    double rate = 0.0;
    double beta = 1.0;
    int eta = 2;
    bool operator<(const PointKey& o) const {
        return std::tie(mapping, policy, rate, beta, eta) <
               std::tie(o.mapping, o.policy, o.rate, o.beta, o.eta);
    }
};

struct PointStats {
    double robustness_mean = 0.0;
    double robustness_ci = 0.0;
    double reactive_fraction_mean = 0.0;
    double normalized_cost_mean = 0.0;
};

class TrendRunner {
public:
    explicit TrendRunner(const char* config_name) {
        cfg_ = ExperimentConfig::load(config_path(config_name));
        exp_.emplace(cfg_, 1);
    }

    const ExperimentConfig& config() const { return cfg_; }

    const PointStats& point(const std::string& mapping, const std::string& policy, double rate,
                            double beta = 1.0, int eta = 2) {
        const PointKey key{mapping, policy, rate, beta, eta};
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        SweepPoint p;
        p.mapping = mapping_variant_from_string(mapping);
        p.policy = drop_policy_kind_from_string(policy);
        p.arrival_rate = rate;
        p.beta = beta;
        p.eta = eta;
        const auto trials = exp_->run_point(p);

        std::vector<double> rob, reactive, cost;
        for (const auto& t : trials) {
            rob.push_back(t.robustness_pct);
            reactive.push_back(t.reactive_fraction);
            cost.push_back(t.normalized_cost);
        }
        PointStats stats;
        std::tie(stats.robustness_mean, stats.robustness_ci) = mean_ci95(rob);
        stats.reactive_fraction_mean = mean_ci95(reactive).first;
        stats.normalized_cost_mean = mean_ci95(cost).first;
        return cache_.emplace(key, stats).first->second;
    }

private:
    ExperimentConfig cfg_;
    std::optional<Experiment> exp_;
    std::map<PointKey, PointStats> cache_;
};

bool ci_disjoint_above(const PointStats& hi, const PointStats& lo) {
    return hi.robustness_mean - hi.robustness_ci > lo.robustness_mean + lo.robustness_ci;
}

bool ci_overlap(const PointStats& a, const PointStats& b) {
    return a.robustness_mean - a.robustness_ci <= b.robustness_mean + b.robustness_ci &&
           b.robustness_mean - b.robustness_ci <= a.robustness_mean + a.robustness_ci;
}

QueueSnapshot random_snapshot(const PetMatrix& pet, std::mt19937_64& rng, std::size_t q) {
    std::uniform_int_distribution<std::size_t> type_dist(0, pet.num_task_types() - 1);
    std::uniform_int_distribution<std::size_t> machine_dist(0, pet.num_machine_types() - 1);
    std::uniform_int_distribution<Tick> deadline_dist(1, 400);
    QueueSnapshot snap;
    snap.machine_type = machine_dist(rng);
    snap.base = random_pmf(rng, 6, 0, 80);
    snap.pet = &pet;
    for (std::size_t i = 0; i < q; ++i)
        snap.entries.push_back({i, type_dist(rng), deadline_dist(rng)});
    return snap;
}

}  // namespace

// =======================================================================
TEST_SUITE("acceptance_algebra") {

TEST_CASE("criterion 1: PMF algebra property suite") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<Tick> deadline_dist(0, 140);

    bool conservation = true;
    bool dominance = true;
    bool pessimism = true;
    for (int iter = 0; iter < 10'000; ++iter) {
        const Pmf prev = random_pmf(rng, 8, 0, 60);
        const Pmf exec = random_pmf(rng, 8, 1, 60);
        const Tick deadline = deadline_dist(rng);

        const Pmf plain = convolve(prev, exec);
        const Pmf trunc = convolve_truncated(prev, exec, deadline);
        conservation &= std::abs(plain.total_mass() - 1.0) <= 1e-9;
        conservation &= std::abs(trunc.total_mass() - 1.0) <= 1e-9;
        dominance &= chance_of_success(trunc, deadline) <=
                     chance_of_success(plain, deadline) + 1e-12;

        const Pmf compacted = compact(plain, 1 + iter % 12);
        conservation &= std::abs(compacted.total_mass() - 1.0) <= 1e-9;
        for (int k = 0; k < 6; ++k) {
            const Tick d = deadline_dist(rng);
            pessimism &=
                chance_of_success(compacted, d) <= chance_of_success(plain, d) + 1e-12;
        }
    }
    verdict(1, "mass conservation <= 1e-9 on 10^4 cases", conservation);
    verdict(1, "truncation dominance on 10^4 cases", dominance);
    verdict(1, "compact pessimism on 10^4 cases", pessimism);

    bool oracle_ok = true;
    for (int pair = 0; pair < 100; ++pair) {
        const Pmf a = random_pmf(rng);
        const Pmf b = random_pmf(rng);
        const Pmf exact = convolve(a, b);
        std::map<Tick, std::size_t> counts;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) counts[testutil::sample(a, rng) + testutil::sample(b, rng)]++;
        std::vector<Impulse> imps;
        for (const auto& [tick, count] : counts)
            imps.push_back({tick, static_cast<double>(count) / n});
        const double tv = testutil::tv_distance(exact, Pmf::from_impulses(imps));
        oracle_ok &= tv < 0.01;
    }
    verdict(1, "Monte-Carlo oracle TV < 0.01 on 100 pairs", oracle_ok);
}

TEST_CASE("criterion 2: deadline-truncation fixture") {
    const Pmf prev = make_pmf({{1, 0.5}, {5, 0.5}});
    const Pmf exec = make_pmf({{2, 1.0}});
    const Pmf got = convolve_truncated(prev, exec, 3);
    const bool exact = got.size() == 2 && got.impulses()[0].tick == 3 &&
                       got.impulses()[0].mass == 0.5 && got.impulses()[1].tick == 5 &&
                       got.impulses()[1].mass == 0.5;
    const bool strict = chance_of_success(got, 3) == 0.0;
    verdict(2, "Eq.-1 fixture {3:0.5, 5:0.5} with chance 0", exact && strict);
}

}  // TEST_SUITE

// =======================================================================
TEST_SUITE("acceptance_dropping") {

TEST_CASE("criterion 3: optimal-vs-heuristic oracle on 1000 snapshots") {
    const auto pet = testutil::small_pet(55, 6, 4);
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> q_dist(1, 6);

    bool dominance = true;
    double optimal_total = 0.0;
    double heuristic_total = 0.0;
    const DropPolicyConfig cfg{DropPolicyKind::heuristic, 1.0, 2, 0.0};

    for (int iter = 0; iter < 1000; ++iter) {
        const auto snap = random_snapshot(pet, rng, q_dist(rng));
        const auto best = optimal_drop(snap);

        const auto decisions = heuristic_drop(snap, cfg);
        QueueSnapshot after = snap;
        for (const auto& d : decisions) {
            for (auto it = after.entries.begin(); it != after.entries.end(); ++it) {
                if (it->task_id == d.task_id) {
                    after.entries.erase(it);
                    break;
                }
            }
        }
        const double heuristic_rob = instantaneous_robustness(after);

        dominance &= best.robustness >= heuristic_rob - 1e-9;
        optimal_total += best.robustness;
        heuristic_total += heuristic_rob;
    }
    verdict(3, "optimal >= heuristic in every instance", dominance);
    verdict(3, "heuristic mean >= 95% of optimal mean",
            heuristic_total >= 0.95 * optimal_total);
    std::printf("    heuristic/optimal mean robustness ratio: %.4f\n",
                heuristic_total / optimal_total);
}

TEST_CASE("criterion 4: subset counts") {
    const auto pet = testutil::small_pet(56, 6, 4);
    std::mt19937_64 rng(304);
    const auto q3 = optimal_drop(random_snapshot(pet, rng, 3));
    const auto q6 = optimal_drop(random_snapshot(pet, rng, 6));
    verdict(4, "q=3 examines exactly 4 subsets", q3.subsets_examined == 4);
    verdict(4, "q=6 examines exactly 32 subsets", q6.subsets_examined == 32);
}

}  // TEST_SUITE

// =======================================================================
TEST_SUITE("acceptance_simulator") {

TEST_CASE("criterion 10: simulator invariant suite over 100 random configs") {
    std::mt19937_64 rng(1010);
    bool conservation = true;
    bool fifo = true;
    bool overlap = true;
    bool deterministic = true;

    const MappingVariant mappings[] = {MappingVariant::MM,   MappingVariant::MSD,
                                       MappingVariant::PAM,  MappingVariant::FCFS,
                                       MappingVariant::SJF,  MappingVariant::EDF};
    const DropPolicyKind policies[] = {DropPolicyKind::reactive_only, DropPolicyKind::threshold,
                                       DropPolicyKind::heuristic, DropPolicyKind::optimal};

    for (int iter = 0; iter < 100; ++iter) {
        const auto pet = testutil::small_pet(2000 + static_cast<std::uint64_t>(iter),
                                             2 + iter % 4, 1 + iter % 3);
        std::vector<MachineConfigEntry> mcfg;
        const std::size_t n_machines = 1 + iter % 3;
        for (std::size_t j = 0; j < n_machines; ++j)
            mcfg.push_back({j % pet.num_machine_types(), 1 + rng() % 2, 0.4, 3 + rng() % 4});
        const auto machines = expand_machines(mcfg);

        WorkloadSpec spec{100 + rng() % 200, 0.02 + 0.001 * static_cast<double>(rng() % 100),
                          0.5 + 0.1 * static_cast<double>(rng() % 40), rng()};
        const auto tasks = generate_workload(spec, pet);

        SimConfig sim;
        sim.mapping = mappings[iter % 6];
        sim.dropping.kind = policies[iter % 4];
        sim.dropping.beta = 1.0 + 0.5 * static_cast<double>(iter % 3);
        sim.dropping.eta = 1 + iter % 3;
        sim.dropping.threshold = 0.1 * static_cast<double>(iter % 10);
        sim.seed = rng();

        std::ostringstream trace;
        const auto a = run_trial(tasks, machines, pet, sim, &trace);
        const auto b = run_trial(tasks, machines, pet, sim);

        std::size_t terminal = 0;
        for (const auto& t : a.tasks) {
            terminal += t.state == TaskState::completed_on_time || t.state == TaskState::missed ||
                        t.state == TaskState::dropped_reactive ||
                        t.state == TaskState::dropped_proactive ||
                        t.state == TaskState::dropped_threshold;
        }
        conservation &= terminal == a.tasks.size();

        const auto checks = testutil::check_trace(trace.str());
        fifo &= checks.fifo_ok;
        overlap &= checks.overlap_ok;

        deterministic &= a.machine_busy_ticks == b.machine_busy_ticks;
        for (std::size_t i = 0; i < a.tasks.size(); ++i) {
            deterministic &= a.tasks[i].state == b.tasks[i].state &&
                             a.tasks[i].start == b.tasks[i].start &&
                             a.tasks[i].finish == b.tasks[i].finish &&
                             a.tasks[i].sampled_exec == b.tasks[i].sampled_exec;
        }
    }
    verdict(10, "terminal-state conservation", conservation);
    verdict(10, "FIFO start order", fifo);
    verdict(10, "non-overlapping executions", overlap);
    verdict(10, "bit-exact determinism per seed", deterministic);
}

TEST_CASE("criterion 11: empirical on-time rate matches the analytic chance") {
    const auto pet = testutil::small_pet(31, 3, 2);
    const std::vector<MachineInstance> one = {{0, 1.0, 6}};

    bool ok = true;
    for (std::size_t type = 0; type < pet.num_task_types(); ++type) {
        std::vector<Task> workload(1);
        workload[0].id = 0;
        workload[0].task_type = type;
        workload[0].arrival = 3;
        workload[0].deadline = 3 + static_cast<Tick>(pet.mean_exec(type, 0)) + 2;

        const double analytic = chance_of_success(
            convolve(Pmf::delta(workload[0].arrival), pet.lookup(type, 0)), workload[0].deadline);

        int on_time = 0;
        const int n = 10'000;
        SimConfig sim;
        sim.mapping = MappingVariant::MM;
        sim.dropping.kind = DropPolicyKind::reactive_only;
        for (int i = 0; i < n; ++i) {
            sim.seed = 50'000 + static_cast<std::uint64_t>(i);
            const auto result = run_trial(workload, one, pet, sim);
            on_time += result.tasks[0].state == TaskState::completed_on_time;
        }
        const double empirical = static_cast<double>(on_time) / n;
        ok &= std::abs(empirical - analytic) < 0.02;
        std::printf("    type %zu: empirical %.4f vs analytic %.4f\n", type, empirical, analytic);
    }
    verdict(11, "single-task on-time rate within 2% of chance_of_success", ok);
}

}  // TEST_SUITE

// =======================================================================
TEST_SUITE("acceptance_trends") {

TEST_CASE("criteria 5-9: desk-scale trend reproduction") {
    TrendRunner hetero("desk_specint8x12.json");
    const auto& rates = hetero.config().sweeps.arrival_rate;
    REQUIRE(rates.size() == 3);
    const double mid = rates[1];
    const double high = rates[2];

    // --- criterion 5: beta sweep (Fig. 6 analog) ---
    {
        const auto& betas = hetero.config().sweeps.beta;
        double best_beta = -1.0, best_mean = -1.0;
        for (double beta : betas) {
            const auto& s = hetero.point("PAM", "heuristic", mid, beta, 2);
            std::printf("    beta %.1f: robustness %.2f +- %.2f\n", beta, s.robustness_mean,
                        s.robustness_ci);
            if (s.robustness_mean > best_mean) {
                best_mean = s.robustness_mean;
                best_beta = beta;
            }
        }
        verdict(5, "argmax robustness at beta=1", best_beta == 1.0);
        verdict(5, "beta=4 below beta=1 beyond CI overlap",
                ci_disjoint_above(hetero.point("PAM", "heuristic", mid, 1.0, 2),
                                  hetero.point("PAM", "heuristic", mid, 4.0, 2)));
    }

    // --- criterion 6: eta sweep (Fig. 5 analog) ---
    {
        for (int eta : hetero.config().sweeps.eta) {
            const auto& s = hetero.point("PAM", "heuristic", mid, 1.0, eta);
            std::printf("    eta %d: robustness %.2f +- %.2f\n", eta, s.robustness_mean,
                        s.robustness_ci);
        }
        verdict(6, "eta=2 above eta=1 beyond CI overlap",
                ci_disjoint_above(hetero.point("PAM", "heuristic", mid, 1.0, 2),
                                  hetero.point("PAM", "heuristic", mid, 1.0, 1)));
        bool plateau = true;
        for (int eta = 3; eta <= 5; ++eta)
            plateau &= ci_overlap(hetero.point("PAM", "heuristic", mid, 1.0, eta),
                                  hetero.point("PAM", "heuristic", mid, 1.0, 2));
        verdict(6, "eta=3..5 within CI overlap of eta=2", plateau);
    }

    // --- criterion 7: dropping benefit and spread collapse (Fig. 7 analog) ---
    {
        bool benefit = true;
        double h_min = 1e9, h_max = -1e9, r_min = 1e9, r_max = -1e9;
        for (const char* mapping : {"MM", "MSD", "PAM"}) {
            const auto& with = hetero.point(mapping, "heuristic", mid);
            const auto& without = hetero.point(mapping, "reactive_only", mid);
            std::printf("    %s: +Heuristic %.2f vs +ReactDrop %.2f\n", mapping,
                        with.robustness_mean, without.robustness_mean);
            benefit &= with.robustness_mean >= without.robustness_mean;
            h_min = std::min(h_min, with.robustness_mean);
            h_max = std::max(h_max, with.robustness_mean);
            r_min = std::min(r_min, without.robustness_mean);
            r_max = std::max(r_max, without.robustness_mean);
        }
        verdict(7, "heterogeneous: +Heuristic >= +ReactDrop for MM/MSD/PAM", benefit);
        verdict(7, "heterogeneous: spread halved with dropping",
                (h_max - h_min) <= 0.5 * (r_max - r_min));

        TrendRunner homo("desk_homogeneous8x12.json");
        const double homo_rate = homo.config().sweeps.arrival_rate[1];
        bool homo_benefit = true;
        double hh_min = 1e9, hh_max = -1e9, hr_min = 1e9, hr_max = -1e9;
        for (const char* mapping : {"FCFS", "SJF", "EDF"}) {
            const auto& with = homo.point(mapping, "heuristic", homo_rate);
            const auto& without = homo.point(mapping, "reactive_only", homo_rate);
            std::printf("    %s: +Heuristic %.2f vs +ReactDrop %.2f\n", mapping,
                        with.robustness_mean, without.robustness_mean);
            homo_benefit &= with.robustness_mean >= without.robustness_mean;
            hh_min = std::min(hh_min, with.robustness_mean);
            hh_max = std::max(hh_max, with.robustness_mean);
            hr_min = std::min(hr_min, without.robustness_mean);
            hr_max = std::max(hr_max, without.robustness_mean);
        }
        verdict(7, "homogeneous: +Heuristic >= +ReactDrop for FCFS/SJF/EDF", homo_benefit);
        verdict(7, "homogeneous: spread halved with dropping",
                (hh_max - hh_min) <= 0.5 * (hr_max - hr_min));
    }

    // --- criterion 8: reactive fraction under PAM+Heuristic ---
    {
        const auto& s = hetero.point("PAM", "heuristic", high);
        std::printf("    reactive fraction at highest oversubscription: %.4f\n",
                    s.reactive_fraction_mean);
        verdict(8, "reactive drops < 15% of all drops", s.reactive_fraction_mean < 0.15);
    }

    // --- criterion 9: normalized cost trend (Fig. 9 analog) ---
    {
        bool cheaper_everywhere = true;
        for (double rate : rates) {
            const auto& pam = hetero.point("PAM", "heuristic", rate);
            const auto& mm = hetero.point("MM", "reactive_only", rate);
            std::printf("    rate %.3f: PAM+Heuristic %.5f vs MM+ReactDrop %.5f\n", rate,
                        pam.normalized_cost_mean, mm.normalized_cost_mean);
            cheaper_everywhere &= pam.normalized_cost_mean < mm.normalized_cost_mean;
        }
        verdict(9, "PAM+Heuristic normalized cost below MM reactive-only at every level",
                cheaper_everywhere);
    }
}

}  // TEST_SUITE
