// chsh.hpp
// Entangled-state preparation, one-sided channel application, linear
// polarizer correlations and CHSH optimization.

#pragma once

#include <cstdint>
#include <utility>

#include "fiberchan/channel.hpp"

namespace fiberchan {

// alpha|HH> + beta|VV> with real non-negative beta = sqrt(1 - alpha^2).
DensityMatrix entangled_input(double alpha_sq);

// (E (x) I) on a two-qubit state, channel on the first (A) qubit.
DensityMatrix channel_on_A(const ChiMatrix& chi, const DensityMatrix& rho_ab);

// p = <t1 t2| rho |t1 t2> with |t> = cos t |H> + sin t |V>.
double coincidence_probability(const DensityMatrix& rho_ab, double theta1_deg,
                               double theta2_deg);

// Normalized ratio of the four coincidences at (t1, t2) and their
// orthogonal settings.
double correlation_E(const DensityMatrix& rho_ab, double theta1_deg, double theta2_deg);

// Defaults maximize S for the ideal Bell state under the sign convention
// S = E(t1,t2) + E(t1,t2') + E(t1',t2) - E(t1',t2').
struct AngleSet {
    double theta1 = 0.0, theta1p = 45.0, theta2 = 22.5, theta2p = 157.5;  // degrees
};

double chsh_S(const DensityMatrix& rho_ab, const AngleSet& a);

// Multi-start local search over the four polarizer angles; never worse
// than the canonical settings.
std::pair<AngleSet, double> optimize_angles(const DensityMatrix& rho_ab, int restarts = 16,
                                            std::uint64_t seed = 1);

// Ic of the joint state: S(rho'_A) - S(rho'_AB).
double joint_coherent_info(const ChiMatrix& chi, double alpha_sq);

}  // namespace fiberchan
