#include "fiberchan/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fiberchan/matrix.hpp"

namespace fiberchan {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::int64_t poisson_sample(double mean, std::mt19937_64& rng) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw InvalidState("poisson_sample: mean must be non-negative, got " +
                           std::to_string(mean));
    if (mean == 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

EstimateWithError bootstrap(const std::vector<double>& counts,
                            const std::function<double(const std::vector<double>&)>& estimator,
                            const BootstrapConfig& cfg) {
    if (cfg.n_sets < 2) throw InvalidState("bootstrap: n_sets must be >= 2");
    if (counts.empty()) throw InvalidState("bootstrap: empty count vector");
    double value = 0.0;
    try {
        value = estimator(counts);
    } catch (const std::exception& e) {
        throw NonConvergence(std::string("bootstrap: estimator failed on the full sample: ") +
                             e.what());
    }

    std::vector<double> estimates(cfg.n_sets);
    std::vector<double> resampled(counts.size());
    for (int set = 0; set < cfg.n_sets; ++set) {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(set)));
        for (size_t i = 0; i < counts.size(); ++i)
            resampled[i] = static_cast<double>(poisson_sample(counts[i], rng));
        try {
            estimates[set] = estimator(resampled);
        } catch (const std::exception& e) {
            throw NonConvergence("bootstrap: estimator failed on set " +
                                 std::to_string(set) + ": " + e.what());
        }
    }

    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= cfg.n_sets;
    double var = 0.0;
    for (double v : estimates) var += (v - mean) * (v - mean);
    var /= (cfg.n_sets - 1);
    return EstimateWithError{value, std::sqrt(var), cfg.n_sets};
}

}  // namespace fiberchan
