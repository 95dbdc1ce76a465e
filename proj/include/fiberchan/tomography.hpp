// tomography.hpp
// Process tomography on the fixed probe set {H, V, D, R}: ideal setting
// probabilities, Poisson count simulation, maximum-likelihood chi
// reconstruction through the 16-parameter triangular factorization, and
// process fidelity.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "fiberchan/channel.hpp"

namespace fiberchan {

// phi_1..phi_4 = |H>, |V>, |D>, |R>
const std::array<Vector2, 4>& probe_states();

using ProbTable = Eigen::Matrix4d;  // input i x projector j

ProbTable ideal_probabilities(const ChiMatrix& chi);

struct CountsTable {
    Eigen::Matrix<std::int64_t, 4, 4> c = Eigen::Matrix<std::int64_t, 4, 4>::Zero();
    double total = 0.0;  // C, shots per setting
    std::uint64_t seed = 0;

    void validate() const;
};

CountsTable simulate_counts(const ChiMatrix& chi, std::int64_t shots_per_setting,
                            std::uint64_t seed);

// CSV wire format: "# C=<total> seed=<seed>" then "input,projector,count".
void counts_to_csv(const CountsTable& t, std::ostream& os);
CountsTable counts_from_csv(std::istream& is);

// t1..t4 on the diagonal of the lower-triangular T, off-diagonal
// pairs (t5,t6), (t7,t8), ... as real/imaginary parts.
struct TParams {
    std::array<double, 16> t{};
};

Eigen::Matrix4cd t_matrix(const TParams& p);
ChiMatrix t_to_chi(const TParams& p);

// f(t) = sum_ij (1/C) [c_ij - C p_ij(chi(t))]^2
double likelihood_cost(const TParams& p, const CountsTable& counts);
std::array<double, 16> likelihood_gradient(const TParams& p, const CountsTable& counts);

struct ReconstructedProcess {
    ChiMatrix chi;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Multi-start BFGS from a PSD-projected linear-inversion seed.
ReconstructedProcess reconstruct_ml(const CountsTable& counts, int restarts = 8,
                                    std::uint64_t seed = 0);

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b);

// PSD-projected linear-inversion estimate (exposed for the optimizer seed
// and for diagnostics).
Matrix4 linear_inversion_chi(const ProbTable& p);
TParams t_from_chi(const Matrix4& chi);

}  // namespace fiberchan
