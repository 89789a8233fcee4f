#pragma once

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "robustdrop/pet.hpp"
#include "robustdrop/pmf.hpp"

namespace testutil {

using robustdrop::Impulse;
using robustdrop::PetGeneratorParams;
using robustdrop::PetMatrix;
using robustdrop::Pmf;
using robustdrop::Tick;

inline Pmf make_pmf(std::vector<Impulse> imps) {
    return Pmf::from_impulses(std::move(imps));
}

inline bool approx_equal(const Pmf& a, const Pmf& b, double tol = 1e-9) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.impulses()[i].tick != b.impulses()[i].tick) return false;
        if (std::abs(a.impulses()[i].mass - b.impulses()[i].mass) > tol) return false;
    }
    return true;
}

// Random Pmf with up to max_impulses impulses on [lo, hi], normalized mass.
inline Pmf random_pmf(std::mt19937_64& rng, int max_impulses = 8, Tick lo = 0, Tick hi = 60) {
    std::uniform_int_distribution<int> count_dist(1, max_impulses);
    std::uniform_int_distribution<Tick> tick_dist(lo, hi);
    std::uniform_real_distribution<double> mass_dist(0.05, 1.0);
    const int n = count_dist(rng);
    std::set<Tick> ticks;
    while (static_cast<int>(ticks.size()) < n) ticks.insert(tick_dist(rng));
    std::vector<Impulse> imps;
    double total = 0.0;
    for (Tick t : ticks) {
        imps.push_back({t, mass_dist(rng)});
        total += imps.back().mass;
    }
    for (auto& imp : imps) imp.mass /= total;
    return make_pmf(std::move(imps));
}

// Draw one sample from a Pmf by inverse CDF.
inline Tick sample(const Pmf& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    for (const auto& imp : p.impulses()) {
        cum += imp.mass;
        if (u < cum) return imp.tick;
    }
    return p.max_tick();
}

// Total-variation distance between two Pmfs.
inline double tv_distance(const Pmf& a, const Pmf& b) {
    std::set<Tick> ticks;
    for (const auto& imp : a.impulses()) ticks.insert(imp.tick);
    for (const auto& imp : b.impulses()) ticks.insert(imp.tick);
    auto mass_at = [](const Pmf& p, Tick t) {
        for (const auto& imp : p.impulses())
            if (imp.tick == t) return imp.mass;
        return 0.0;
    };
    double total = 0.0;
    for (Tick t : ticks) total += std::abs(mass_at(a, t) - mass_at(b, t));
    return total / 2.0;
}

// Small PET matrix for queue/dropping/mapping tests.
inline PetMatrix small_pet(std::uint64_t seed = 7, std::size_t task_types = 4,
                           std::size_t machine_types = 3) {
    PetGeneratorParams p;
    for (std::size_t i = 0; i < task_types; ++i) p.task_types.push_back("t" + std::to_string(i));
    for (std::size_t j = 0; j < machine_types; ++j)
        p.machine_types.push_back("m" + std::to_string(j));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mean_dist(20.0, 120.0);
    p.means.resize(task_types);
    for (auto& row : p.means)
        for (std::size_t j = 0; j < machine_types; ++j) row.push_back(mean_dist(rng));
    p.scale_low = 1.0;
    p.scale_high = 12.0;
    p.samples_per_cell = 200;
    p.bin_width = 4;
    p.seed = seed;
    return PetMatrix::generate_synthetic(p);
}

}  // namespace testutil
