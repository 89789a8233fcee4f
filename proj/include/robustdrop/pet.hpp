#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "robustdrop/pmf.hpp"

namespace robustdrop {

struct PetGeneratorParams {
    std::vector<std::string> task_types;
    std::vector<std::string> machine_types;
    // means[task_type][machine_type], in ticks.
    std::vector<std::vector<double>> means;
    double scale_low = 1.0;
    double scale_high = 20.0;
    int samples_per_cell = 500;
    Tick bin_width = 1;
    std::uint64_t seed = 0;

    bool operator==(const PetGeneratorParams&) const = default;
};

/// Probabilistic Execution Time matrix: one execution-time Pmf per
/// (task type, machine type) pair, immutable after construction.
class PetMatrix {
public:
    // Gamma-sampled synthetic matrix. Per cell: scale drawn uniformly from
    // [scale_low, scale_high], shape = mean/scale, samples_per_cell draws
    // rounded to ticks (clamped to >= one bin so Eq.-1 chaining never sees a
    // zero-length execution), then histogrammed at bin_width. Deterministic
    // for a fixed seed; cells are generated row-major.
    static PetMatrix generate_synthetic(const PetGeneratorParams& params);

    static PetMatrix load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const Pmf& lookup(std::size_t task_type, std::size_t machine_type) const;
    double mean_exec(std::size_t task_type, std::size_t machine_type) const;

    // Mean execution time of a task type across machine types (avg_i of the
    // deadline formula), and the mean of those means (avg_all).
    double avg_exec_of_type(std::size_t task_type) const;
    double avg_exec_all() const;

    std::size_t num_task_types() const { return task_types_.size(); }
    std::size_t num_machine_types() const { return machine_types_.size(); }
    const std::vector<std::string>& task_type_names() const { return task_types_; }
    const std::vector<std::string>& machine_type_names() const { return machine_types_; }
    Tick bin_width() const { return bin_width_; }
    std::uint64_t seed() const { return seed_; }

    // The per-cell Gamma parameters drawn at generation time, when known.
    // Needed by the sample_from_gamma simulation mode.
    std::optional<std::pair<double, double>> gamma_params(std::size_t task_type,
                                                          std::size_t machine_type) const;

    // Replicate one machine column across all machine types (homogeneous
    // system mode). Names and grid shape are preserved.
    PetMatrix homogeneous(std::size_t source_machine_type) const;

    bool operator==(const PetMatrix&) const = default;

private:
    std::vector<std::string> task_types_;
    std::vector<std::string> machine_types_;
    std::vector<Pmf> cells_;        // row-major [task][machine]
    std::vector<double> mean_exec_; // cached cell means
    std::vector<double> cell_shape_;
    std::vector<double> cell_scale_;
    Tick bin_width_ = 1;
    std::uint64_t seed_ = 0;
    std::optional<PetGeneratorParams> generator_;

    std::size_t cell_index(std::size_t task_type, std::size_t machine_type) const;
};

}  // namespace robustdrop
