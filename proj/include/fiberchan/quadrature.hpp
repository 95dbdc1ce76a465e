// quadrature.hpp
// Gauss-Hermite nodes matched to the Gaussian spectral profile, and a
// small adaptive Simpson rule for the coherence-factor integrals.

#pragma once

#include <functional>
#include <vector>

#include "fiberchan/channel.hpp"

namespace fiberchan {

struct FrequencyGrid {
    std::vector<double> omega;
    std::vector<double> weight;  // includes the spectral density; sums to ~1

    // n-node Gauss-Hermite rule mapped onto f(omega): nodes
    // omega0 + (sigma/2) x_i, weights w_i / sqrt(pi).
    static FrequencyGrid gauss_hermite(const SpectralProfile& s, int n);
};

// Adaptive Simpson on [a, b] for a complex integrand.
cd adaptive_simpson(const std::function<cd(double)>& f, double a, double b,
                    double tol = 1e-12, int max_depth = 40);

}  // namespace fiberchan
