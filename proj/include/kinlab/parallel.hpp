#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace kinlab {

/// Worker count from KINLAB_WORKERS, else hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("KINLAB_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// results[k] = fn(k) for k < n, spread over `workers` threads. Each slot is
/// written by exactly one task, so the output is independent of scheduling.
/// The first exception (lowest sample index) is rethrown.
template <class Result, class Fn>
std::vector<Result> map_samples(std::size_t n, Fn&& fn, unsigned workers = 0) {
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::vector<Result> results(n);
    std::vector<std::exception_ptr> errors(n);
    auto run_range = [&](unsigned w) {
        for (std::size_t k = w; k < n; k += workers) {
            try {
                results[k] = fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

} // namespace kinlab
