#include "fiberchan/qstate.hpp"

#include <cmath>
#include <numbers>

namespace fiberchan {

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("DensityMatrix: not square");
    if (!is_hermitian(m_, kHermTol))
        throw InvalidState("DensityMatrix: Hermiticity defect exceeds 1e-10");
    if (std::abs(m_.trace().real() - 1.0) > kTraceTol || std::abs(m_.trace().imag()) > kTraceTol)
        throw InvalidState("DensityMatrix: trace differs from 1 beyond 1e-10");
    Eigen::VectorXd ev = hermitian_eigenvalues(m_);
    if (ev.minCoeff() < kPsdTol)
        throw InvalidState("DensityMatrix: negative eigenvalue " + std::to_string(ev.minCoeff()));
}

void StateParam::validate() const {
    if (!(lambda0 >= 0.0 && lambda0 <= 1.0))
        throw InvalidState("StateParam: lambda0 outside [0,1]");
    if (!std::isfinite(theta) || !std::isfinite(phi))
        throw InvalidState("StateParam: non-finite angle");
}

Vector2 family_ket(const StateParam& p) {
    return {cd(std::cos(p.theta), 0.0), std::polar(std::sin(p.theta), p.phi)};
}

Vector2 family_ket_perp(const StateParam& p) {
    return {cd(std::sin(p.theta), 0.0), -std::polar(std::cos(p.theta), p.phi)};
}

DensityMatrix state_from_params(const StateParam& p) {
    p.validate();
    Vector2 psi = family_ket(p);
    Vector2 perp = family_ket_perp(p);
    Matrix2 rho = p.lambda0 * psi * psi.adjoint() + (1.0 - p.lambda0) * perp * perp.adjoint();
    return DensityMatrix(0.5 * (Matrix(rho) + Matrix(rho).adjoint()));
}

Vector4 purify(const StateParam& p) {
    p.validate();
    Vector2 psi = family_ket(p);
    Vector2 perp = family_ket_perp(p);
    const double a = std::sqrt(p.lambda0);
    const double b = std::sqrt(1.0 - p.lambda0);
    Vector4 out;
    for (int s = 0; s < 2; ++s) {
        out[2 * s + 0] = a * psi[s];
        out[2 * s + 1] = b * perp[s];
    }
    return out;
}

Matrix2 partial_trace(const Matrix& rho_ab, Subsystem traced_out) {
    if (rho_ab.rows() != 4 || rho_ab.cols() != 4)
        throw DimensionError("partial_trace: expected a 4x4 matrix");
    Matrix2 out = Matrix2::Zero();
    // index = 2*first + second
    if (traced_out == Subsystem::Second) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) out(i, j) += rho_ab(2 * i + k, 2 * j + k);
    } else {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) out(i, j) += rho_ab(2 * k + i, 2 * k + j);
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho_ab, Subsystem traced_out) {
    return DensityMatrix(partial_trace(rho_ab.mat(), traced_out));
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::VectorXd ev = hermitian_eigenvalues(rho.mat());
    return entropy_bits({ev.data(), static_cast<size_t>(ev.size())});
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return uhlmann_fidelity(rho.mat(), sigma.mat());
}

std::pair<double, double> eigvals_hermitian_2x2(double a, double b, double c) {
    const double disc = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
    return {0.5 * ((a + b) + disc), 0.5 * ((a + b) - disc)};
}

}  // namespace fiberchan
