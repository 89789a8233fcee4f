#include "robustdrop/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace robustdrop {

namespace detail {
thread_local std::uint64_t truncated_convolution_calls = 0;
}

namespace {

constexpr double kMassTolerance = 1e-9;

// Accumulates (tick, mass) contributions and emits a sorted impulse vector.
// Dense array over the output range when the range is small enough,
// otherwise an ordered map.
class Accumulator {
public:
    Accumulator(Tick lo, Tick hi) : lo_(lo) {
        const Tick range = hi - lo + 1;
        if (range > 0 && range <= kDenseLimit) {
            dense_.assign(static_cast<std::size_t>(range), 0.0);
        } else {
            use_map_ = true;
        }
    }

    void add(Tick tick, double mass) {
        if (use_map_) {
            map_[tick] += mass;
        } else {
            dense_[static_cast<std::size_t>(tick - lo_)] += mass;
        }
    }

    std::vector<Impulse> finish() {
        std::vector<Impulse> out;
        if (use_map_) {
            out.reserve(map_.size());
            for (const auto& [tick, mass] : map_) {
                if (mass > 0.0) out.push_back({tick, mass});
            }
        } else {
            for (std::size_t i = 0; i < dense_.size(); ++i) {
                if (dense_[i] > 0.0) out.push_back({lo_ + static_cast<Tick>(i), dense_[i]});
            }
        }
        return out;
    }

private:
    static constexpr Tick kDenseLimit = 1 << 22;
    Tick lo_ = 0;
    bool use_map_ = false;
    std::vector<double> dense_;
    std::map<Tick, double> map_;
};

}  // namespace

Pmf Pmf::from_impulses(std::vector<Impulse> impulses) {
    if (impulses.empty()) throw std::invalid_argument("pmf: no impulses");
    double total = 0.0;
    Tick prev = -1;
    for (const auto& imp : impulses) {
        if (imp.tick < 0) throw std::invalid_argument("pmf: negative tick");
        if (imp.tick <= prev) throw std::invalid_argument("pmf: ticks not strictly increasing");
        if (imp.mass <= 0.0) throw std::invalid_argument("pmf: non-positive mass");
        prev = imp.tick;
        total += imp.mass;
    }
    if (std::abs(total - 1.0) > kMassTolerance)
        throw std::invalid_argument("pmf: total mass " + std::to_string(total) + " != 1");
    return Pmf(std::move(impulses));
}

Pmf Pmf::delta(Tick tick) {
    return Pmf({{tick, 1.0}});
}

Tick Pmf::min_tick() const {
    return impulses_.front().tick;
}

Tick Pmf::max_tick() const {
    return impulses_.back().tick;
}

double Pmf::total_mass() const {
    double total = 0.0;
    for (const auto& imp : impulses_) total += imp.mass;
    return total;
}

double Pmf::mean() const {
    double m = 0.0;
    for (const auto& imp : impulses_) m += static_cast<double>(imp.tick) * imp.mass;
    return m;
}

double Pmf::mass_below(Tick tick) const {
    double m = 0.0;
    for (const auto& imp : impulses_) {
        if (imp.tick >= tick) break;
        m += imp.mass;
    }
    return m;
}

Pmf convolve(const Pmf& a, const Pmf& b) {
    const auto& ia = a.impulses();
    const auto& ib = b.impulses();
    Accumulator acc(a.min_tick() + b.min_tick(), a.max_tick() + b.max_tick());
    for (const auto& x : ia)
        for (const auto& y : ib) acc.add(x.tick + y.tick, x.mass * y.mass);
    return Pmf::from_impulses(acc.finish());
}

Pmf convolve_truncated(const Pmf& prev_completion, const Pmf& exec, Tick deadline) {
    ++detail::truncated_convolution_calls;
    const auto& prev = prev_completion.impulses();
    const auto& ex = exec.impulses();

    Tick lo = prev_completion.min_tick();
    Tick hi = prev_completion.max_tick();
    if (prev.front().tick < deadline) {
        lo = std::min(lo, prev.front().tick + exec.min_tick());
        hi = std::max(hi, std::min(prev.back().tick, deadline - 1) + exec.max_tick());
    }
    Accumulator acc(lo, hi);
    for (const auto& p : prev) {
        if (p.tick < deadline) {
            for (const auto& e : ex) {
                if (e.tick < 1) continue;  // strict k < t bound of the started branch
                acc.add(p.tick + e.tick, p.mass * e.mass);
            }
        } else {
            acc.add(p.tick, p.mass);  // reactive pass-through
        }
    }
    return Pmf::from_impulses(acc.finish());
}

double chance_of_success(const Pmf& completion, Tick deadline) {
    return completion.mass_below(deadline);
}

Pmf from_samples(std::span<const Tick> samples, Tick bin_width) {
    if (samples.empty()) throw std::invalid_argument("empty sample set");
    if (bin_width < 1) throw std::invalid_argument("bin_width must be >= 1");
    std::map<Tick, std::size_t> counts;
    for (Tick s : samples) {
        if (s < 0) throw std::invalid_argument("negative sample");
        counts[(s / bin_width) * bin_width]++;
    }
    std::vector<Impulse> out;
    out.reserve(counts.size());
    const double n = static_cast<double>(samples.size());
    for (const auto& [tick, count] : counts) out.push_back({tick, static_cast<double>(count) / n});
    return Pmf::from_impulses(std::move(out));
}

Pmf compact(const Pmf& p, std::size_t max_impulses) {
    if (max_impulses < 1) throw std::invalid_argument("max_impulses must be >= 1");
    if (p.size() <= max_impulses) return p;

    std::vector<Impulse> imp = p.impulses();
    const std::size_t n = imp.size();
    std::vector<std::size_t> next(n), prev(n);
    std::vector<bool> dead(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = i + 1;
        prev[i] = (i == 0) ? n : i - 1;
    }

    // (gap, left index) of each live adjacent pair; smallest gap merged first.
    std::set<std::pair<Tick, std::size_t>> gaps;
    auto gap_of = [&](std::size_t i) { return imp[next[i]].tick - imp[i].tick; };
    for (std::size_t i = 0; i + 1 < n; ++i) gaps.insert({gap_of(i), i});

    std::size_t live = n;
    while (live > max_impulses) {
        auto [gap, left] = *gaps.begin();
        gaps.erase(gaps.begin());
        const std::size_t right = next[left];

        // Combined mass lands on the later tick so mass never moves earlier.
        imp[right].mass += imp[left].mass;
        dead[left] = true;
        --live;

        if (prev[left] != n) {
            gaps.erase({imp[left].tick - imp[prev[left]].tick, prev[left]});
            next[prev[left]] = right;
            prev[right] = prev[left];
            gaps.insert({imp[right].tick - imp[prev[right]].tick, prev[right]});
        } else {
            prev[right] = n;
        }
    }

    std::vector<Impulse> out;
    out.reserve(live);
    for (std::size_t i = 0; i < n; ++i)
        if (!dead[i]) out.push_back(imp[i]);
    return Pmf::from_impulses(std::move(out));
}

double truncated_mean(const Pmf& prev, double exec_mean, Tick deadline) {
    return prev.mean() + exec_mean * prev.mass_below(deadline);
}

double truncated_chance(const Pmf& prev, const Pmf& exec, Tick deadline) {
    // P(prev + exec < deadline): walk prev ascending while the matching
    // exec cutoff (deadline - k) descends.
    const auto& pi = prev.impulses();
    const auto& ei = exec.impulses();
    double total = 0.0;
    std::size_t hi = ei.size();  // exec impulses [0, hi) are < cutoff
    double exec_cdf = 1.0;       // running sum of ei[0..hi)
    for (const auto& p : pi) {
        if (p.tick >= deadline) break;
        const Tick cutoff = deadline - p.tick;
        while (hi > 0 && ei[hi - 1].tick >= cutoff) {
            --hi;
            exec_cdf -= ei[hi].mass;
        }
        if (hi == 0) break;
        total += p.mass * exec_cdf;
    }
    return total;
}

}  // namespace robustdrop
