#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace robustdrop {

// Time is integral milliseconds throughout the library.
using Tick = std::int64_t;

// Deadline sentinel: a deadline this far out never truncates anything.
inline constexpr Tick kNoDeadline = std::numeric_limits<Tick>::max();

// Impulse cap applied after every chained convolution.
inline constexpr std::size_t kDefaultMaxImpulses = 256;

struct Impulse {
    Tick tick = 0;
    double mass = 0.0;
    bool operator==(const Impulse&) const = default;
};

/// Discrete probability mass function over integer time ticks.
/// Impulses are kept sorted by tick with strictly positive masses summing
/// to 1. Instances are immutable values; all operations return new Pmfs.
class Pmf {
public:
    Pmf() = default;

    // Validates ordering, positivity and total mass (1.0 within 1e-9).
    static Pmf from_impulses(std::vector<Impulse> impulses);

    // Single certain outcome at `tick`.
    static Pmf delta(Tick tick);

    bool empty() const { return impulses_.empty(); }
    std::size_t size() const { return impulses_.size(); }
    const std::vector<Impulse>& impulses() const { return impulses_; }

    Tick min_tick() const;
    Tick max_tick() const;

    double total_mass() const;
    double mean() const;

    // P(X < tick). Strict, matching the chance-of-success summation bound.
    double mass_below(Tick tick) const;

    bool operator==(const Pmf&) const = default;

private:
    explicit Pmf(std::vector<Impulse> impulses) : impulses_(std::move(impulses)) {}
    std::vector<Impulse> impulses_;
};

// Plain convolution: distribution of the sum of two independent draws.
Pmf convolve(const Pmf& a, const Pmf& b);

// Deadline-aware convolution. Predecessor mass before `deadline` starts the
// task and is convolved with `exec`; mass at or after `deadline` passes
// through unchanged (the task is reactively dropped and contributes zero
// execution time). `exec` must not carry an impulse at tick 0, or that
// started mass is excluded by the strict inner bound and the result loses it.
Pmf convolve_truncated(const Pmf& prev_completion, const Pmf& exec, Tick deadline);

// Probability of completing strictly before `deadline`.
double chance_of_success(const Pmf& completion, Tick deadline);

// Histogram a set of duration samples. Each sample falls in bin
// floor(sample / bin_width); the bin is represented by its left-edge tick.
Pmf from_samples(std::span<const Tick> samples, Tick bin_width);

// Reduce to at most `max_impulses` impulses by repeatedly merging the two
// adjacent impulses with the smallest tick gap (ties: leftmost pair). The
// merged impulse keeps the pair's combined mass at the later tick, so mass
// never moves earlier and chance_of_success is never overestimated.
Pmf compact(const Pmf& p, std::size_t max_impulses);

// Closed forms for appending one task behind `prev` without materializing
// convolve_truncated. Both require exec ticks >= 1 (as PET cells guarantee).
//
// Mean of the truncated result: started mass gains the full execution mean,
// pass-through mass keeps its tick.
double truncated_mean(const Pmf& prev, double exec_mean, Tick deadline);
// Chance of the appended task: P(prev + exec < deadline). Identical to
// chance_of_success(convolve_truncated(prev, exec, deadline), deadline)
// because finishing before the deadline implies having started before it.
double truncated_chance(const Pmf& prev, const Pmf& exec, Tick deadline);

namespace detail {
// Test hook for the convolution-count complexity property.
extern thread_local std::uint64_t truncated_convolution_calls;
}

}  // namespace robustdrop
