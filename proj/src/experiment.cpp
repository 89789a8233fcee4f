#include "robustdrop/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"

namespace robustdrop {

using nlohmann::json;

DropPolicyKind drop_policy_kind_from_string(const std::string& name) {
    if (name == "reactive_only") return DropPolicyKind::reactive_only;
    if (name == "threshold") return DropPolicyKind::threshold;
    if (name == "heuristic") return DropPolicyKind::heuristic;
    if (name == "optimal") return DropPolicyKind::optimal;
    throw std::invalid_argument("unknown dropping policy: " + name);
}

std::string to_string(DropPolicyKind kind) {
    switch (kind) {
        case DropPolicyKind::reactive_only: return "reactive_only";
        case DropPolicyKind::threshold: return "threshold";
        case DropPolicyKind::heuristic: return "heuristic";
        case DropPolicyKind::optimal: return "optimal";
    }
    return "?";
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

namespace {

// Wraps json access so errors carry the config field path.
template <typename T>
T get_field(const json& obj, const std::string& path, const std::string& key) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) throw ConfigError(full + ": missing");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(full + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return get_field<T>(obj, path, key);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    ExperimentConfig cfg;
    const int schema = get_field<int>(doc, "", "schema");
    if (schema != 1) throw ConfigError("schema: unsupported version " + std::to_string(schema));

    {
        const json pet = get_field<json>(doc, "", "pet");
        if (pet.contains("file")) {
            cfg.pet.file = get_field<std::string>(pet, "pet", "file");
        } else if (pet.contains("generator")) {
            const json gen = pet.at("generator");
            PetGeneratorParams p;
            p.task_types = get_field<std::vector<std::string>>(gen, "pet.generator", "task_types");
            p.machine_types =
                get_field<std::vector<std::string>>(gen, "pet.generator", "machine_types");
            p.means =
                get_field<std::vector<std::vector<double>>>(gen, "pet.generator", "means");
            const auto range =
                get_field<std::vector<double>>(gen, "pet.generator", "scale_range");
            if (range.size() != 2) throw ConfigError("pet.generator.scale_range: need [low, high]");
            p.scale_low = range[0];
            p.scale_high = range[1];
            p.samples_per_cell = get_or<int>(gen, "pet.generator", "samples_per_cell", 500);
            p.bin_width = get_or<Tick>(gen, "pet.generator", "bin_width", 1);
            p.seed = get_or<std::uint64_t>(gen, "pet.generator", "seed", 0);
            cfg.pet.generator = std::move(p);
            cfg.pet.homogeneous = get_or<bool>(gen, "pet.generator", "homogeneous", false);
            cfg.pet.homogeneous_source =
                get_or<std::size_t>(gen, "pet.generator", "homogeneous_source", 0);
        } else {
            throw ConfigError("pet: need either 'file' or 'generator'");
        }
    }

    {
        const json machines = get_field<json>(doc, "", "machines");
        if (!machines.is_array() || machines.empty())
            throw ConfigError("machines: need a non-empty list");
        for (std::size_t i = 0; i < machines.size(); ++i) {
            const std::string p = "machines[" + std::to_string(i) + "]";
            const json& m = machines.at(i);
            MachineConfigEntry entry;
            entry.machine_type = get_field<std::size_t>(m, p, "machine_type");
            entry.count = get_or<std::size_t>(m, p, "count", 1);
            entry.price_per_hour = get_or<double>(m, p, "price_per_hour", 0.0);
            entry.queue_capacity = get_or<std::size_t>(m, p, "queue_capacity", 6);
            if (entry.count < 1) throw ConfigError(p + ".count: must be >= 1");
            if (entry.queue_capacity < 1) throw ConfigError(p + ".queue_capacity: must be >= 1");
            cfg.machines.push_back(entry);
        }
    }

    {
        const json w = get_field<json>(doc, "", "workload");
        cfg.workload.n_tasks = get_field<std::size_t>(w, "workload", "n_tasks");
        cfg.workload.arrival_rate = get_field<double>(w, "workload", "arrival_rate");
        cfg.workload.gamma_slack = get_field<double>(w, "workload", "gamma_slack");
        cfg.workload.seed = get_or<std::uint64_t>(w, "workload", "seed", 1);
        if (cfg.workload.n_tasks < 1) throw ConfigError("workload.n_tasks: must be >= 1");
        if (!(cfg.workload.arrival_rate > 0.0))
            throw ConfigError("workload.arrival_rate: must be > 0");
        if (cfg.workload.gamma_slack < 0.0) throw ConfigError("workload.gamma_slack: must be >= 0");
    }

    try {
        cfg.mapping = mapping_variant_from_string(get_field<std::string>(doc, "", "mapping"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mapping: ") + e.what());
    }

    {
        const json d = get_field<json>(doc, "", "dropping");
        try {
            cfg.dropping.kind =
                drop_policy_kind_from_string(get_field<std::string>(d, "dropping", "kind"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("dropping.kind: ") + e.what());
        }
        cfg.dropping.beta = get_or<double>(d, "dropping", "beta", 1.0);
        cfg.dropping.eta = get_or<int>(d, "dropping", "eta", 2);
        cfg.dropping.threshold = get_or<double>(d, "dropping", "threshold", 0.5);
        try {
            cfg.dropping.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("dropping: ") + e.what());
        }
    }

    cfg.trials = get_or<int>(doc, "", "trials", 10);
    if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
    cfg.warmup = get_or<std::size_t>(doc, "", "warmup", 100);
    cfg.cooldown = get_or<std::size_t>(doc, "", "cooldown", 100);
    if (cfg.warmup + cfg.cooldown >= cfg.workload.n_tasks)
        throw ConfigError("warmup/cooldown: leave an empty measurement window");
    cfg.seed = get_or<std::uint64_t>(doc, "", "seed", 1);
    cfg.sample_from_gamma = get_or<bool>(doc, "", "sample_from_gamma", false);
    cfg.output_dir = get_or<std::string>(doc, "", "output_dir", "out");

    if (doc.contains("sweeps")) {
        const json s = doc.at("sweeps");
        cfg.sweeps.eta = get_or<std::vector<int>>(s, "sweeps", "eta", {});
        cfg.sweeps.beta = get_or<std::vector<double>>(s, "sweeps", "beta", {});
        cfg.sweeps.arrival_rate = get_or<std::vector<double>>(s, "sweeps", "arrival_rate", {});
        cfg.sweeps.n_tasks = get_or<std::vector<std::size_t>>(s, "sweeps", "n_tasks", {});
        for (std::size_t n : cfg.sweeps.n_tasks)
            if (cfg.warmup + cfg.cooldown >= n)
                throw ConfigError("sweeps.n_tasks: " + std::to_string(n) +
                                  " leaves an empty measurement window");
        for (const auto& name :
             get_or<std::vector<std::string>>(s, "sweeps", "mapping", {})) {
            try {
                cfg.sweeps.mapping.push_back(mapping_variant_from_string(name));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("sweeps.mapping: ") + e.what());
            }
        }
        for (const auto& name : get_or<std::vector<std::string>>(s, "sweeps", "policy", {})) {
            try {
                cfg.sweeps.policy.push_back(drop_policy_kind_from_string(name));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("sweeps.policy: ") + e.what());
            }
        }
    }

    // exhaustive subset search stays cheap only for shallow queues
    const bool uses_optimal =
        cfg.dropping.kind == DropPolicyKind::optimal ||
        std::find(cfg.sweeps.policy.begin(), cfg.sweeps.policy.end(), DropPolicyKind::optimal) !=
            cfg.sweeps.policy.end();
    if (uses_optimal) {
        for (std::size_t i = 0; i < cfg.machines.size(); ++i)
            if (cfg.machines[i].queue_capacity > 6)
                throw ConfigError("machines[" + std::to_string(i) +
                                  "].queue_capacity: optimal dropping is restricted to <= 6");
    }
    return cfg;
}

std::pair<double, double> mean_ci95(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_ci95: no values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};

    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    if (var <= 0.0) return {mean, 0.0};

    boost::math::students_t dist(static_cast<double>(values.size() - 1));
    const double t = boost::math::quantile(dist, 0.975);
    return {mean, t * std::sqrt(var / static_cast<double>(values.size()))};
}

Experiment::Experiment(ExperimentConfig config, int jobs)
    : config_(std::move(config)), jobs_(jobs < 1 ? 1 : jobs) {
    if (config_.pet.file) {
        pet_ = PetMatrix::load(*config_.pet.file);
    } else {
        pet_ = PetMatrix::generate_synthetic(*config_.pet.generator);
    }
    if (config_.pet.homogeneous) pet_ = pet_.homogeneous(config_.pet.homogeneous_source);
    machines_ = expand_machines(config_.machines);
    for (const auto& m : machines_)
        if (m.machine_type >= pet_.num_machine_types())
            throw ConfigError("machines: machine_type outside the PET matrix");
}

std::vector<TrialResult> Experiment::run_point(const SweepPoint& point) const {
    WorkloadSpec workload = config_.workload;
    if (point.arrival_rate) workload.arrival_rate = *point.arrival_rate;
    if (point.n_tasks) workload.n_tasks = *point.n_tasks;

    SimConfig sim;
    sim.mapping = point.mapping.value_or(config_.mapping);
    sim.dropping = config_.dropping;
    if (point.policy) sim.dropping.kind = *point.policy;
    if (point.eta) sim.dropping.eta = *point.eta;
    if (point.beta) sim.dropping.beta = *point.beta;
    sim.sample_from_gamma = config_.sample_from_gamma;

    const int n = config_.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            WorkloadSpec w = workload;
            w.seed = workload.seed + static_cast<std::uint64_t>(i);
            SimConfig s = sim;
            s.seed = config_.seed + static_cast<std::uint64_t>(i);
            const auto tasks = generate_workload(w, pet_);
            const SimResult r = run_trial(tasks, machines_, pet_, s);
            TrialResult t = measure_window(r, config_.warmup, config_.cooldown);
            compute_cost(t, r);
            results[static_cast<std::size_t>(i)] = t;
        }
    };
    if (jobs_ == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < std::min(jobs_, n); ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

std::vector<AggregateRow> Experiment::aggregate(
    const SweepPoint& point, std::vector<std::pair<std::string, std::string>> coords,
    bool robustness_only) const {
    const auto trials = run_point(point);
    std::vector<std::pair<std::string, std::vector<double>>> metrics;
    auto values_of = [&](auto getter) {
        std::vector<double> v;
        v.reserve(trials.size());
        for (const auto& t : trials) v.push_back(getter(t));
        return v;
    };
    metrics.emplace_back("robustness",
                         values_of([](const TrialResult& t) { return t.robustness_pct; }));
    if (!robustness_only) {
        metrics.emplace_back("reactive_fraction",
                             values_of([](const TrialResult& t) { return t.reactive_fraction; }));
        metrics.emplace_back("total_cost",
                             values_of([](const TrialResult& t) { return t.total_cost; }));
        metrics.emplace_back("normalized_cost",
                             values_of([](const TrialResult& t) { return t.normalized_cost; }));
    }

    std::vector<AggregateRow> rows;
    for (auto& [name, values] : metrics) {
        AggregateRow row;
        row.coords = coords;
        row.metric = name;
        std::tie(row.mean, row.ci95) = mean_ci95(values);
        row.n = values.size();
        row.single_sample = values.size() == 1;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AggregateRow> Experiment::run_single() const {
    return aggregate(SweepPoint{}, {});
}

std::vector<IntensityLevel> Experiment::intensity_levels() const {
    std::vector<IntensityLevel> levels;
    if (!config_.sweeps.arrival_rate.empty()) {
        for (double rate : config_.sweeps.arrival_rate) {
            IntensityLevel level{"arrival_rate", format_double(rate), {}};
            level.point.arrival_rate = rate;
            levels.push_back(std::move(level));
        }
    } else if (!config_.sweeps.n_tasks.empty()) {
        for (std::size_t n : config_.sweeps.n_tasks) {
            IntensityLevel level{"n_tasks", std::to_string(n), {}};
            level.point.n_tasks = n;
            levels.push_back(std::move(level));
        }
    } else {
        IntensityLevel level{"arrival_rate", format_double(config_.workload.arrival_rate), {}};
        level.point.arrival_rate = config_.workload.arrival_rate;
        levels.push_back(std::move(level));
    }
    return levels;
}

std::vector<AggregateRow> Experiment::sweep_eta() const {
    if (config_.sweeps.eta.empty()) throw ConfigError("sweeps.eta: must be non-empty");
    std::vector<AggregateRow> rows;
    for (const auto& level : intensity_levels()) {
        for (int eta : config_.sweeps.eta) {
            SweepPoint point = level.point;
            point.eta = eta;
            point.mapping = MappingVariant::PAM;
            point.policy = DropPolicyKind::heuristic;
            auto batch = aggregate(point,
                                   {{level.axis_name, level.label},
                                    {"eta", std::to_string(eta)}},
                                   /*robustness_only=*/true);
            rows.insert(rows.end(), batch.begin(), batch.end());
        }
    }
    return rows;
}

std::vector<AggregateRow> Experiment::sweep_beta() const {
    if (config_.sweeps.beta.empty()) throw ConfigError("sweeps.beta: must be non-empty");
    std::vector<AggregateRow> rows;
    for (const auto& level : intensity_levels()) {
        for (double beta : config_.sweeps.beta) {
            SweepPoint point = level.point;
            point.beta = beta;
            point.mapping = MappingVariant::PAM;
            point.policy = DropPolicyKind::heuristic;
            auto batch = aggregate(point,
                                   {{level.axis_name, level.label},
                                    {"beta", format_double(beta)}},
                                   /*robustness_only=*/true);
            rows.insert(rows.end(), batch.begin(), batch.end());
        }
    }
    return rows;
}

std::vector<AggregateRow> Experiment::compare_policies() const {
    std::vector<MappingVariant> mappings = config_.sweeps.mapping;
    if (mappings.empty()) mappings.push_back(config_.mapping);
    std::vector<DropPolicyKind> policies = config_.sweeps.policy;
    if (policies.empty()) policies.push_back(config_.dropping.kind);

    std::vector<AggregateRow> rows;
    for (const auto mapping : mappings) {
        for (const auto policy : policies) {
            for (const auto& level : intensity_levels()) {
                SweepPoint point = level.point;
                point.mapping = mapping;
                point.policy = policy;
                auto batch = aggregate(point, {{"mapping", to_string(mapping)},
                                               {"policy", to_string(policy)},
                                               {level.axis_name, level.label}});
                rows.insert(rows.end(), batch.begin(), batch.end());
            }
        }
    }
    return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
    std::vector<std::string> names;
    if (!rows.empty())
        for (const auto& [name, value] : rows.front().coords) names.push_back(name);
    write_csv(path, names, rows);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& sweep_names,
               const std::vector<AggregateRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("cannot open " + path.string() + " for writing");
    for (const auto& name : sweep_names) out << "sweep_" << name << ',';
    out << "metric,mean,ci95,n\n";
    for (const auto& row : rows) {
        if (row.coords.size() != sweep_names.size())
            throw OutputError("csv row coordinate mismatch for " + path.string());
        for (const auto& [name, value] : row.coords) out << value << ',';
        out << row.metric << ',' << format_double(row.mean) << ',' << format_double(row.ci95)
            << ',' << row.n << '\n';
    }
    if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace robustdrop
