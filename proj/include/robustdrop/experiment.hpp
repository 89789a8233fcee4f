#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustdrop/sim.hpp"

namespace robustdrop {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DropPolicyKind drop_policy_kind_from_string(const std::string& name);
std::string to_string(DropPolicyKind kind);

struct PetSource {
    std::optional<std::filesystem::path> file;
    std::optional<PetGeneratorParams> generator;
    bool homogeneous = false;
    std::size_t homogeneous_source = 0;
};

struct SweepAxes {
    std::vector<int> eta;
    std::vector<double> beta;
    std::vector<double> arrival_rate;  // oversubscription axis, or:
    std::vector<std::size_t> n_tasks;  // used when arrival_rate is not swept
    std::vector<MappingVariant> mapping;
    std::vector<DropPolicyKind> policy;
};

struct ExperimentConfig {
    PetSource pet;
    std::vector<MachineConfigEntry> machines;
    WorkloadSpec workload;
    MappingVariant mapping = MappingVariant::PAM;
    DropPolicyConfig dropping;
    int trials = 10;
    std::size_t warmup = 100;
    std::size_t cooldown = 100;
    std::uint64_t seed = 0;  // execution-sampling base seed
    bool sample_from_gamma = false;
    SweepAxes sweeps;
    std::filesystem::path output_dir = "out";

    // Parses and validates; throws ConfigError naming the offending field.
    static ExperimentConfig load(const std::filesystem::path& path);
};

struct AggregateRow {
    std::vector<std::pair<std::string, std::string>> coords;  // (sweep name, value)
    std::string metric;
    double mean = 0.0;
    double ci95 = 0.0;  // half-width; 0 for a single sample
    std::size_t n = 0;
    bool single_sample = false;
};

// Mean and 95% Student-t confidence half-width of the trial values.
std::pair<double, double> mean_ci95(const std::vector<double>& values);

// Point overrides applied on top of the base config for one sweep cell.
struct SweepPoint {
    std::optional<double> arrival_rate;
    std::optional<std::size_t> n_tasks;
    std::optional<int> eta;
    std::optional<double> beta;
    std::optional<MappingVariant> mapping;
    std::optional<DropPolicyKind> policy;
};

// One coordinate on the oversubscription axis: either an arrival rate or a
// task count, depending on which the config sweeps.
struct IntensityLevel {
    std::string axis_name;  // "arrival_rate" or "n_tasks"
    std::string label;
    SweepPoint point;
};

class Experiment {
public:
    Experiment(ExperimentConfig config, int jobs = 1);

    const ExperimentConfig& config() const { return config_; }
    const PetMatrix& pet() const { return pet_; }

    // `trials` independent trials of one sweep point; trial i uses workload
    // seed base+i and execution seed base+i.
    std::vector<TrialResult> run_point(const SweepPoint& point) const;

    // Aggregate rows for every metric of one sweep point.
    std::vector<AggregateRow> aggregate(const SweepPoint& point,
                                        std::vector<std::pair<std::string, std::string>> coords,
                                        bool robustness_only = false) const;

    std::vector<AggregateRow> run_single() const;
    std::vector<AggregateRow> sweep_eta() const;
    std::vector<AggregateRow> sweep_beta() const;
    std::vector<AggregateRow> compare_policies() const;

    // The configured oversubscription levels (arrival_rate sweep when
    // present, n_tasks sweep otherwise, else the base workload).
    std::vector<IntensityLevel> intensity_levels() const;

private:
    ExperimentConfig config_;
    PetMatrix pet_;
    std::vector<MachineInstance> machines_;
    int jobs_;
};

// CSV with the stable schema: sweep_<name>..., metric, mean, ci95, n.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& sweep_names,
               const std::vector<AggregateRow>& rows);

// Same, with the sweep column names taken from the rows' coordinates.
void write_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

std::string format_double(double value);

}  // namespace robustdrop
