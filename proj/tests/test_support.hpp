#pragma once

#include <cstdint>
#include <vector>

#include "kinlab/philox.hpp"
#include "kinlab/torus_field.hpp"

// Hand-rolled generators for property tests: deterministic, keyed by (seed, case).
namespace testgen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        state_ = kinlab::rng::splitmix64(state_);
        const double u = static_cast<double>(state_ >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)) % (hi - lo + 1); }

    kinlab::TorusField field(std::size_t n, double lo = -1.0, double hi = 1.0) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(lo, hi);
        return kinlab::TorusField(std::move(v));
    }

private:
    std::uint64_t state_;
};

inline kinlab::TorusField indicator_half(std::size_t n) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n / 2; ++i) v[i] = 1.0;
    return kinlab::TorusField(std::move(v));
}

} // namespace testgen
