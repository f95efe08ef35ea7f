#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kinlab/error.hpp"
#include "kinlab/philox.hpp"

namespace kinlab {

/// Discretised Brownian path on [0, t_final] with n_steps = 2^level uniform steps.
///
/// Built by midpoint (Brownian bridge) insertion starting from W(t_final):
/// node values at level l are never touched by later levels, and every
/// Gaussian is keyed by (seed, level, node index). Values are stored as
/// integer multiples of 2^-40 so partial sums of increments are exact in
/// double precision; in particular each refined pair of increments sums to the
/// coarse increment bit-for-bit.
class NoisePath {
public:
    static constexpr double tick = 0x1.0p-40;

    NoisePath(std::uint64_t seed, double t_final, std::size_t n_steps) : seed_(seed), t_final_(t_final) {
        if (!(t_final > 0.0)) throw domain_error("NoisePath: t_final must be positive");
        if (n_steps == 0 || !std::has_single_bit(n_steps)) throw domain_error("NoisePath: n_steps must be a power of two");
        nodes_ = {0, to_ticks(std::sqrt(t_final) * rng::gaussian(seed, 0, 0))};
        const auto target = static_cast<unsigned>(std::countr_zero(n_steps));
        while (level_ < target) refine_in_place();
    }

    std::uint64_t seed() const noexcept { return seed_; }
    double t_final() const noexcept { return t_final_; }
    unsigned level() const noexcept { return level_; }
    std::size_t n_steps() const noexcept { return nodes_.size() - 1; }
    double dt() const noexcept { return t_final_ / static_cast<double>(n_steps()); }

    /// W(j dt)
    double value(std::size_t j) const { return static_cast<double>(nodes_.at(j)) * tick; }

    double increment(std::size_t j) const { return static_cast<double>(nodes_.at(j + 1) - nodes_.at(j)) * tick; }

    std::vector<double> increments() const {
        std::vector<double> out(n_steps());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = increment(j);
        return out;
    }

    /// Increments on a coarser or finer dyadic grid of the same path.
    std::vector<double> increments_at(std::size_t steps) const {
        if (steps == 0 || !std::has_single_bit(steps)) throw domain_error("increments_at: steps must be a power of two");
        if (steps > n_steps()) {
            NoisePath fine = *this;
            while (fine.n_steps() < steps) fine.refine_in_place();
            return fine.increments();
        }
        const std::size_t stride = n_steps() / steps;
        std::vector<double> out(steps);
        for (std::size_t j = 0; j < steps; ++j)
            out[j] = static_cast<double>(nodes_[(j + 1) * stride] - nodes_[j * stride]) * tick;
        return out;
    }

    friend NoisePath refine(const NoisePath& path) {
        NoisePath out = path;
        out.refine_in_place();
        return out;
    }

    friend bool operator==(const NoisePath&, const NoisePath&) = default;

private:
    static std::int64_t to_ticks(double w) { return static_cast<std::int64_t>(std::llround(w / tick)); }

    void refine_in_place() {
        const unsigned next = level_ + 1;
        const double half_interval_std = 0.5 * std::sqrt(t_final_ / static_cast<double>(n_steps()));
        std::vector<std::int64_t> fine(2 * n_steps() + 1);
        for (std::size_t j = 0; j < n_steps(); ++j) {
            const std::int64_t a = nodes_[j];
            const std::int64_t b = nodes_[j + 1];
            fine[2 * j] = a;
            const std::int64_t mid = (a + b) >> 1;
            fine[2 * j + 1] = mid + to_ticks(half_interval_std * rng::gaussian(seed_, next, 2 * j + 1));
        }
        fine.back() = nodes_.back();
        nodes_ = std::move(fine);
        level_ = next;
    }

    std::uint64_t seed_;
    double t_final_;
    unsigned level_ = 0;
    std::vector<std::int64_t> nodes_;
};

inline NoisePath sample_path(std::uint64_t seed, double t_final, std::size_t n_steps) {
    return NoisePath(seed, t_final, n_steps);
}

} // namespace kinlab
