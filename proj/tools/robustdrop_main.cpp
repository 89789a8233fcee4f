#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "robustdrop/chart.hpp"
#include "robustdrop/experiment.hpp"

namespace {

using namespace robustdrop;

std::filesystem::path resolve_output(const std::filesystem::path& cli_value,
                                     const ExperimentConfig* cfg) {
    if (const char* env = std::getenv("ROBUSTDROP_OUT")) return env;
    if (!cli_value.empty()) return cli_value;
    if (cfg) return cfg->output_dir;
    return "out";
}

void apply_overrides(ExperimentConfig& cfg, std::uint64_t* seed) {
    if (seed) cfg.seed = *seed;
}

void write_rows(const std::filesystem::path& dir, const std::string& name,
                const std::vector<AggregateRow>& rows) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory " + dir.string());
    write_csv(dir / name, rows);
    std::cout << "wrote " << (dir / name).string() << " (" << rows.size() << " rows)\n";
}

void run_traced_single(const Experiment& exp, const std::filesystem::path& dir) {
    // One extra trial of the base point with the event trace enabled.
    const auto& cfg = exp.config();
    auto tasks = generate_workload(cfg.workload, exp.pet());
    SimConfig sim;
    sim.mapping = cfg.mapping;
    sim.dropping = cfg.dropping;
    sim.seed = cfg.seed;
    sim.sample_from_gamma = cfg.sample_from_gamma;
    std::ofstream trace(dir / "trace.txt");
    if (!trace) throw OutputError("cannot open trace file");
    run_trial(tasks, expand_machines(cfg.machines), exp.pet(), sim, &trace);
    std::cout << "wrote " << (dir / "trace.txt").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic simulator for proactive task dropping in oversubscribed "
                 "heterogeneous clusters"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    bool trace = false;

    app.add_option("--jobs", jobs, "concurrent trials")->capture_default_str();
    app.add_flag("--trace", trace, "also write a per-event trace of one trial");
    auto* seed_opt = app.add_option("--seed", seed, "override the execution-sampling base seed");

    auto* gen_pet = app.add_subcommand("gen-pet", "generate a PET matrix file");
    gen_pet->add_option("config", config_path, "experiment config (JSON)")->required();
    std::string pet_out = "pet.json";
    gen_pet->add_option("-o,--output", pet_out, "PET output file")->capture_default_str();

    auto* run = app.add_subcommand("run", "run the configured experiment point");
    run->add_option("config", config_path)->required();
    run->add_option("-o,--output", output, "output directory");

    auto* sweep_eta = app.add_subcommand("sweep-eta", "sweep the effective depth");
    sweep_eta->add_option("config", config_path)->required();
    sweep_eta->add_option("-o,--output", output, "output directory");

    auto* sweep_beta = app.add_subcommand("sweep-beta", "sweep the robustness improvement factor");
    sweep_beta->add_option("config", config_path)->required();
    sweep_beta->add_option("-o,--output", output, "output directory");

    auto* compare = app.add_subcommand("compare", "cross mapping heuristics and drop policies");
    compare->add_option("config", config_path)->required();
    compare->add_option("-o,--output", output, "output directory");

    auto* render = app.add_subcommand("render", "render every CSV in a directory to SVG");
    std::string render_dir;
    render->add_option("dir", render_dir, "directory of CSV files")->required();

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (render->parsed()) {
            const int n = render_directory(render_dir);
            std::cout << "rendered " << n << " chart(s)\n";
            return 0;
        }

        ExperimentConfig cfg = ExperimentConfig::load(config_path);
        apply_overrides(cfg, seed_set ? &seed : nullptr);

        if (gen_pet->parsed()) {
            if (!cfg.pet.generator)
                throw ConfigError("pet.generator: required by gen-pet");
            Experiment exp(cfg, 1);
            exp.pet().save(pet_out);
            std::cout << "wrote " << pet_out << "\n";
            return 0;
        }

        const std::filesystem::path outdir = resolve_output(output, &cfg);
        Experiment exp(cfg, jobs);
        if (run->parsed()) {
            write_rows(outdir, "run.csv", exp.run_single());
            if (trace) run_traced_single(exp, outdir);
        } else if (sweep_eta->parsed()) {
            write_rows(outdir, "eta.csv", exp.sweep_eta());
        } else if (sweep_beta->parsed()) {
            write_rows(outdir, "beta.csv", exp.sweep_beta());
        } else if (compare->parsed()) {
            write_rows(outdir, "compare.csv", exp.compare_policies());
        }
        return 0;
    } catch (const robustdrop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const robustdrop::OutputError& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
