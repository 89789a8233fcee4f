#include "robustdrop/pet.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace robustdrop {

using nlohmann::json;

namespace {

void validate_params(const PetGeneratorParams& p) {
    if (p.task_types.empty() || p.machine_types.empty())
        throw std::invalid_argument("pet: empty task or machine type list");
    if (p.means.size() != p.task_types.size())
        throw std::invalid_argument("pet: means grid rows != task type count");
    for (const auto& row : p.means) {
        if (row.size() != p.machine_types.size())
            throw std::invalid_argument("pet: means grid cols != machine type count");
        for (double m : row)
            if (!(m > 0.0)) throw std::invalid_argument("pet: non-positive mean");
    }
    if (!(p.scale_low > 0.0) || p.scale_high < p.scale_low)
        throw std::invalid_argument("pet: invalid scale_range");
    if (p.samples_per_cell < 1) throw std::invalid_argument("pet: samples_per_cell must be >= 1");
    if (p.bin_width < 1) throw std::invalid_argument("pet: bin_width must be >= 1");
}

}  // namespace

std::size_t PetMatrix::cell_index(std::size_t task_type, std::size_t machine_type) const {
    if (task_type >= task_types_.size()) throw std::out_of_range("pet: task type out of range");
    if (machine_type >= machine_types_.size())
        throw std::out_of_range("pet: machine type out of range");
    return task_type * machine_types_.size() + machine_type;
}

PetMatrix PetMatrix::generate_synthetic(const PetGeneratorParams& params) {
    validate_params(params);
    PetMatrix pet;
    pet.task_types_ = params.task_types;
    pet.machine_types_ = params.machine_types;
    pet.bin_width_ = params.bin_width;
    pet.seed_ = params.seed;
    pet.generator_ = params;

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> scale_dist(params.scale_low, params.scale_high);
    std::vector<Tick> samples(static_cast<std::size_t>(params.samples_per_cell));
    const Tick min_tick = params.bin_width;  // keep every execution >= one bin

    for (std::size_t i = 0; i < pet.task_types_.size(); ++i) {
        for (std::size_t j = 0; j < pet.machine_types_.size(); ++j) {
            const double scale = scale_dist(rng);
            const double shape = params.means[i][j] / scale;
            std::gamma_distribution<double> gamma(shape, scale);
            for (auto& s : samples)
                s = std::max<Tick>(min_tick, static_cast<Tick>(std::llround(gamma(rng))));
            Pmf cell = from_samples(samples, params.bin_width);
            pet.mean_exec_.push_back(cell.mean());
            pet.cells_.push_back(std::move(cell));
            pet.cell_shape_.push_back(shape);
            pet.cell_scale_.push_back(scale);
        }
    }
    return pet;
}

const Pmf& PetMatrix::lookup(std::size_t task_type, std::size_t machine_type) const {
    return cells_[cell_index(task_type, machine_type)];
}

double PetMatrix::mean_exec(std::size_t task_type, std::size_t machine_type) const {
    return mean_exec_[cell_index(task_type, machine_type)];
}

double PetMatrix::avg_exec_of_type(std::size_t task_type) const {
    double total = 0.0;
    for (std::size_t j = 0; j < machine_types_.size(); ++j) total += mean_exec(task_type, j);
    return total / static_cast<double>(machine_types_.size());
}

double PetMatrix::avg_exec_all() const {
    double total = 0.0;
    for (std::size_t i = 0; i < task_types_.size(); ++i) total += avg_exec_of_type(i);
    return total / static_cast<double>(task_types_.size());
}

std::optional<std::pair<double, double>> PetMatrix::gamma_params(std::size_t task_type,
                                                                 std::size_t machine_type) const {
    const auto idx = cell_index(task_type, machine_type);
    if (cell_shape_.empty()) return std::nullopt;
    return std::make_pair(cell_shape_[idx], cell_scale_[idx]);
}

PetMatrix PetMatrix::homogeneous(std::size_t source_machine_type) const {
    PetMatrix out = *this;
    for (std::size_t i = 0; i < task_types_.size(); ++i) {
        const auto src = cell_index(i, source_machine_type);
        for (std::size_t j = 0; j < machine_types_.size(); ++j) {
            const auto dst = cell_index(i, j);
            out.cells_[dst] = cells_[src];
            out.mean_exec_[dst] = mean_exec_[src];
            if (!cell_shape_.empty()) {
                out.cell_shape_[dst] = cell_shape_[src];
                out.cell_scale_[dst] = cell_scale_[src];
            }
        }
    }
    return out;
}

void PetMatrix::save(const std::filesystem::path& path) const {
    json doc;
    doc["task_types"] = task_types_;
    doc["machine_types"] = machine_types_;
    doc["bin_width"] = bin_width_;
    doc["seed"] = seed_;

    json cells = json::array();
    for (const auto& cell : cells_) {
        json imps = json::array();
        for (const auto& imp : cell.impulses()) imps.push_back({imp.tick, imp.mass});
        cells.push_back(std::move(imps));
    }
    doc["cells"] = std::move(cells);

    json gp;
    if (generator_) {
        gp["means"] = generator_->means;
        gp["scale_range"] = {generator_->scale_low, generator_->scale_high};
        gp["samples_per_cell"] = generator_->samples_per_cell;
        gp["cell_shapes"] = cell_shape_;
        gp["cell_scales"] = cell_scale_;
    }
    doc["generator_params"] = std::move(gp);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("pet: cannot open " + path.string() + " for writing");
    out << doc.dump(1) << "\n";
    if (!out) throw std::runtime_error("pet: write failed for " + path.string());
}

PetMatrix PetMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("pet: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("pet: malformed file " + path.string() + ": " + e.what());
    }

    PetMatrix pet;
    try {
        pet.task_types_ = doc.at("task_types").get<std::vector<std::string>>();
        pet.machine_types_ = doc.at("machine_types").get<std::vector<std::string>>();
        pet.bin_width_ = doc.at("bin_width").get<Tick>();
        pet.seed_ = doc.at("seed").get<std::uint64_t>();

        const auto& cells = doc.at("cells");
        const std::size_t expected = pet.task_types_.size() * pet.machine_types_.size();
        if (cells.size() != expected)
            throw std::runtime_error("incomplete grid: " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(expected));
        for (const auto& imps : cells) {
            std::vector<Impulse> v;
            double total = 0.0;
            for (const auto& pair : imps) {
                v.push_back({pair.at(0).get<Tick>(), pair.at(1).get<double>()});
                total += v.back().mass;
            }
            if (std::abs(total - 1.0) > 1e-6)
                throw std::runtime_error("unnormalized PMF: mass " + std::to_string(total));
            Pmf cell = Pmf::from_impulses(std::move(v));
            pet.mean_exec_.push_back(cell.mean());
            pet.cells_.push_back(std::move(cell));
        }

        const json gp = doc.value("generator_params", json::object());
        if (gp.contains("cell_shapes")) {
            pet.cell_shape_ = gp.at("cell_shapes").get<std::vector<double>>();
            pet.cell_scale_ = gp.at("cell_scales").get<std::vector<double>>();
            PetGeneratorParams params;
            params.task_types = pet.task_types_;
            params.machine_types = pet.machine_types_;
            params.means = gp.at("means").get<std::vector<std::vector<double>>>();
            params.scale_low = gp.at("scale_range").at(0).get<double>();
            params.scale_high = gp.at("scale_range").at(1).get<double>();
            params.samples_per_cell = gp.at("samples_per_cell").get<int>();
            params.bin_width = pet.bin_width_;
            params.seed = pet.seed_;
            pet.generator_ = std::move(params);
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("pet: malformed file " + path.string() + ": " + e.what());
    }
    return pet;
}

}  // namespace robustdrop
