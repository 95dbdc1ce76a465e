// channel.hpp
// Process representations (chi matrix in the Pauli basis, Kraus sets)
// and the physical fiber dephasing model: birefringent delay kappa,
// coherence length, Gaussian spectral profile and the coherence factor.

#pragma once

#include <array>
#include <vector>

#include "fiberchan/qstate.hpp"

namespace fiberchan {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

// Pauli basis order used everywhere: I, X, Y, Z.
const std::array<Matrix2, 4>& pauli_basis();

enum class PauliAxis { X = 1, Y = 2, Z = 3 };

struct CptpReport {
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    double trace_defect = 0.0;      // |Tr chi - 1|
    double tp_defect = 0.0;         // |sum chi_mn En+ Em - I|, max entry
    bool pass = false;
    bool warn = false;              // between the pass tolerances and 1e-6
};

// 4x4 process matrix in the Pauli basis, normalized to unit trace.
class ChiMatrix {
public:
    // Validates Hermiticity/PSD/trace; trace preservation is enforced
    // only when require_tp is set (per-port conditional channels are
    // generally not trace preserving for asymmetric fibers).
    explicit ChiMatrix(Matrix4 m, bool require_tp = true);

    const Matrix4& mat() const { return m_; }

    static ChiMatrix identity();

private:
    Matrix4 m_;
};

CptpReport is_cptp(const Matrix4& chi);
inline CptpReport is_cptp(const ChiMatrix& chi) { return is_cptp(chi.mat()); }

struct KrausSet {
    std::vector<Matrix2> operators;

    // max entry of |sum K+K - I|
    double completeness_defect() const;
    void validate(double tol = kHermTol) const;
};

Matrix2 apply_chi(const ChiMatrix& chi, const Matrix2& rho);
DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho);

ChiMatrix chi_from_kraus(const KrausSet& k);

// Eigendecomposition of chi; eigenvalues below `tol` are dropped.
KrausSet kraus_from_chi(const ChiMatrix& chi, double tol = 1e-12);

// chi of E2 after E1 (Kraus products).
ChiMatrix compose_channels(const ChiMatrix& first, const ChiMatrix& then);

// Off-diagonal element in the axis eigenbasis is multiplied by gamma.
// arg(gamma) is realized as a deterministic unitary phase about the axis,
// |gamma| as a two-operator dephasing.
ChiMatrix dephasing_channel(cd gamma, PauliAxis axis);

ChiMatrix mix_channels(const std::vector<std::pair<double, ChiMatrix>>& parts);

struct FiberParams {
    double length_m = 0.0;
    double delta_n = 0.0;
    // Residual common-mode group delay (seconds) left after the
    // interferometer lock; applies to both polarizations. Zero means a
    // perfect lock.
    double common_delay_s = 0.0;

    void validate() const;
};

// kappa = L * delta_n / c, seconds.
double kappa(const FiberParams& f);

// Delta L = lambda^2 / delta_lambda, result in micrometres.
double coherence_length_um(double lambda_nm, double delta_lambda_nm);

// L = Delta L / delta_n, result in metres.
double decoherence_fiber_length_m(double coherence_length_um, double delta_n);

// f(omega) = 2/(sqrt(pi) sigma) exp(-4 (omega-omega0)^2 / sigma^2)
struct SpectralProfile {
    double omega0 = 0.0;  // rad/s
    double sigma = 0.0;   // rad/s

    // sigma chosen so the intensity FWHM equals the filter width
    // converted to angular frequency: sigma = (2 pi c dl / l^2) / sqrt(ln 2).
    static SpectralProfile from_filter(double lambda_nm, double delta_lambda_nm);

    double density(double omega) const;
    void validate() const;
};

struct CoherenceFactor {
    cd gamma{1.0, 0.0};
};

// Spectral average of e^{i k omega}: exp(-k^2 sigma^2/16 + i k omega0).
cd gaussian_coherence(double kappa_s, const SpectralProfile& s);

// Single-fiber coherence factor for the birefringent delay of f.
CoherenceFactor single_fiber_gamma(const FiberParams& f, const SpectralProfile& s);

// ChiMatrix JSON adds "basis": ["I","X","Y","Z"] to the matrix document.
nlohmann::json chi_to_json(const ChiMatrix& chi);
ChiMatrix chi_from_json(const nlohmann::json& j, bool require_tp = true);

}  // namespace fiberchan
