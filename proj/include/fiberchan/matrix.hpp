// matrix.hpp
// Small-dimension complex matrix helpers shared by all modules:
// Hermiticity checks, PSD square roots, Uhlmann fidelity, entropy,
// and the JSON wire format for density / process matrices.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace fiberchan {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = -1e-10;
inline constexpr double kEntropyClamp = 1e-12;

struct InvalidState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidChannel : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Largest |m - m†| entry.
double hermiticity_defect(const Matrix& m);

bool is_hermitian(const Matrix& m, double tol = kHermTol);

// Eigenvalues of a Hermitian matrix, ascending. Input is symmetrized first.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);

// Principal square root of a Hermitian PSD matrix. Eigenvalues in
// [psd_tol, 0) are clamped to zero; anything more negative throws.
Matrix sqrtm_psd(const Matrix& m, double psd_tol = kPsdTol);

// (Tr sqrt(sqrt(a) b sqrt(a)))^2 for Hermitian PSD unit-trace a, b.
// Used for both state and process fidelities.
double uhlmann_fidelity(const Matrix& a, const Matrix& b);

// -sum l log2 l with the 0 log 0 := 0 convention; eigenvalues below
// kEntropyClamp are dropped, eigenvalues below psd_tol throw.
double entropy_bits(std::span<const double> eigenvalues, double psd_tol = kPsdTol);

// JSON wire format: {"dim": n, "re": [...], "im": [...]}, row-major.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace fiberchan
