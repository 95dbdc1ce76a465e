// stats.hpp
// Seeded Poisson sampling and the 50-set bootstrap error estimate.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fiberchan {

// SplitMix64 step; used to derive independent per-set/per-restart seeds.
std::uint64_t splitmix64(std::uint64_t x);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

std::int64_t poisson_sample(double mean, std::mt19937_64& rng);

struct BootstrapConfig {
    int n_sets = 50;
    std::uint64_t seed = 0;
};

struct EstimateWithError {
    double value = 0.0;
    double std = 0.0;
    int n_sets = 0;
};

// Each synthetic set resamples every cell as Poisson(observed count); the
// reported error is the sample standard deviation of the per-set estimates.
EstimateWithError bootstrap(const std::vector<double>& counts,
                            const std::function<double(const std::vector<double>&)>& estimator,
                            const BootstrapConfig& cfg);

}  // namespace fiberchan
