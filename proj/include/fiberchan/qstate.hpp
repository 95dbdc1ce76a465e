// qstate.hpp
// Density matrices, the three-parameter input-state family, purification,
// partial trace, entropy and fidelity.

#pragma once

#include <utility>

#include "fiberchan/matrix.hpp"

namespace fiberchan {

// Validated Hermitian, PSD, unit-trace matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m);

    const Matrix& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    Matrix m_;
};

// Input-state family: rho = l0 |psi><psi| + (1-l0) |psi_perp><psi_perp|
// with |psi> = cos(theta)|0> + sin(theta) e^{i phi}|1>.
struct StateParam {
    double lambda0 = 0.5;
    double theta = 0.0;
    double phi = 0.0;

    void validate() const;
};

// |psi> and |psi_perp> of the family.
Vector2 family_ket(const StateParam& p);
Vector2 family_ket_perp(const StateParam& p);

DensityMatrix state_from_params(const StateParam& p);

// Schmidt-form purification, system (x) reference ordering:
// sqrt(l0)|psi>|0>_r + sqrt(l1)|psi_perp>|1>_r, index = 2*sys + ref.
Vector4 purify(const StateParam& p);

enum class Subsystem { First, Second };

// Trace a 4x4 bipartite matrix down to the kept 2x2 subsystem.
// `which` names the subsystem that is traced OUT.
Matrix2 partial_trace(const Matrix& rho_ab, Subsystem traced_out);
DensityMatrix partial_trace(const DensityMatrix& rho_ab, Subsystem traced_out);

double von_neumann_entropy(const DensityMatrix& rho);

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Closed-form eigenvalues of [[a, c], [c, b]], descending.
std::pair<double, double> eigvals_hermitian_2x2(double a, double b, double c);

}  // namespace fiberchan
