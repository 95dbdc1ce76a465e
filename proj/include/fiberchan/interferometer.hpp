// interferometer.hpp
// Element-by-element propagation through the PBS/HWP/fiber networks over a
// sampled frequency grid, closed-form reduced output matrices for
// cross-validation, and per-port process extraction.

#pragma once

#include <optional>

#include "fiberchan/quadrature.hpp"

namespace fiberchan {

enum class NetworkMode { Unidirectional, BidirectionalAB, BidirectionalBA };

const char* to_string(NetworkMode mode);

// Single-photon polarization qubit; validated unit norm.
struct PureState {
    cd alpha{1.0, 0.0};  // |H>
    cd beta{0.0, 0.0};   // |V>

    void validate() const;
    Vector2 ket() const { return {alpha, beta}; }
};

// Amplitudes over {H,V} (x) {path 0, path 1} per frequency node,
// index = 2*pol + path. The weighted norm over the grid is ~1.
struct PolPathState {
    FrequencyGrid grid;
    std::vector<Vector4> amp;

    double total_norm() const;
    static PolPathState from_input(const PureState& in, FrequencyGrid grid);
};

inline constexpr int kBothPaths = -1;

// PBS as a CNOT: |V>|x> -> |V>|x^1>, |H> unchanged.
void pbs_apply(PolPathState& s);

// Jones operator [[cos 2a, sin 2a], [sin 2a, -cos 2a]] on the selected
// path (or both with kBothPaths).
void hwp_apply(PolPathState& s, double angle_deg, int path);

// Per node omega: both polarizations gain the common-delay phase, |V>
// additionally gains e^{i kappa omega}.
void fiber_apply(PolPathState& s, int path, const FiberParams& f);

struct PortOutcome {
    int port = 0;
    double probability = 0.0;
    Matrix2 state = Matrix2::Zero();  // frequency-averaged conditional state
};

struct NetworkResult {
    std::array<PortOutcome, 2> ports;
    Matrix2 combined = Matrix2::Zero();  // path traced out
};

NetworkResult run_network(NetworkMode mode, const PureState& input, const FiberParams& fiber1,
                          const FiberParams& fiber2, const SpectralProfile& s, int nodes);

// Reduced combined-port density matrix from the closed forms:
// diagonal (|a|^2, |b|^2), off-diagonal a b* Gamma_mode. The
// unidirectional Gamma is evaluated by adaptive quadrature of
// f(omega) e^{i d_delta omega} eta(d_tau); the bidirectional ones use the
// closed Gaussian average.
Matrix2 closed_form_output(NetworkMode mode, const PureState& input, const FiberParams& fiber1,
                           const FiberParams& fiber2, const SpectralProfile& s);

struct PortChannel {
    int port = 0;
    double probability = 0.0;
    ChiMatrix chi;  // normalized conditional process (may be non-TP)
};

struct PortChannels {
    std::vector<PortChannel> ports;
    ChiMatrix mean;  // probability-weighted mixture over occupied ports

    const PortChannel& port(int which) const;  // throws if the port is dark
};

// Drives run_network with the four probe states {H,V,D,R} and inverts the
// per-port linear maps. Ports with probability below 1e-12 are dropped.
PortChannels extract_port_channels(NetworkMode mode, const FiberParams& fiber1,
                                   const FiberParams& fiber2, const SpectralProfile& s,
                                   int nodes);

// Linear inversion of a (possibly trace-decreasing) qubit map from its
// action on the probe projectors; outputs are the unnormalized p*rho.
Matrix4 chi_from_probe_outputs(const std::array<Matrix2, 4>& outputs);

}  // namespace fiberchan
