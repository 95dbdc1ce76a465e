// capacity.hpp
// Coherent information, entropy exchange, the single-use capacity grid
// scan over the three-parameter input family, and the data-processing
// inequality check.

#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "fiberchan/channel.hpp"

namespace fiberchan {

struct ScanGrid {
    double lambda0_step = 0.01;
    double theta_step = std::numbers::pi / 50.0;
    double phi_step = std::numbers::pi / 50.0;

    void validate() const;
    // lambda0 in [0,1] inclusive, theta in [0,pi), phi in [0,2pi)
    int lambda0_points() const;
    int theta_points() const;
    int phi_points() const;
};

struct SurfaceRow {
    double lambda0, theta, phi, ic;
};

struct CapacityResult {
    double q1 = 0.0;
    StateParam argmax;
    std::optional<std::vector<SurfaceRow>> surface;
};

double entropy_exchange(const ChiMatrix& chi, const StateParam& p);

// Ic = S(E(rho)) - S((E (x) I)|Psi><Psi|)
double coherent_information(const ChiMatrix& chi, const StateParam& p);

// Exhaustive grid maximum, lexicographic tie-break on (lambda0, theta, phi).
CapacityResult q1_scan(const ChiMatrix& chi, const ScanGrid& g = {}, bool keep_surface = false,
                       int jobs = 0);

// Closed-form Q1 of a real dephasing channel: 1 - H2((1 - gamma)/2).
double dephasing_capacity_oracle(double gamma);

double binary_entropy(double p);

struct DataProcessingResult {
    double input_entropy = 0.0;
    double ic_first = 0.0;
    double ic_composed = 0.0;
    bool pass = false;
};

DataProcessingResult data_processing_check(const ChiMatrix& chi1, const ChiMatrix& chi2,
                                           const StateParam& p);

}  // namespace fiberchan
