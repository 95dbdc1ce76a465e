#include "fiberchan/channel.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace fiberchan {

namespace {

constexpr double kChiTraceTol = 1e-9;
constexpr double kTpTol = 1e-8;
constexpr double kHardTol = 1e-6;

}  // namespace

const std::array<Matrix2, 4>& pauli_basis() {
    static const std::array<Matrix2, 4> basis = [] {
        std::array<Matrix2, 4> b;
        b[0] << 1, 0, 0, 1;
        b[1] << 0, 1, 1, 0;
        b[2] << 0, cd(0, -1), cd(0, 1), 0;
        b[3] << 1, 0, 0, -1;
        return b;
    }();
    return basis;
}

CptpReport is_cptp(const Matrix4& chi) {
    CptpReport r;
    r.hermiticity_defect = hermiticity_defect(chi);
    r.min_eigenvalue = hermitian_eigenvalues(chi).minCoeff();
    r.trace_defect = std::abs(chi.trace() - cd(1.0, 0.0));
    const auto& e = pauli_basis();
    Matrix2 acc = Matrix2::Zero();
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) acc += chi(m, n) * (e[n].adjoint() * e[m]);
    r.tp_defect = (acc - Matrix2::Identity()).cwiseAbs().maxCoeff();
    r.pass = r.hermiticity_defect <= kHermTol && r.min_eigenvalue >= kPsdTol &&
             r.trace_defect <= kChiTraceTol && r.tp_defect <= kTpTol;
    r.warn = !r.pass && r.hermiticity_defect <= kHardTol && r.min_eigenvalue >= -kHardTol &&
             r.trace_defect <= kHardTol && r.tp_defect <= kHardTol;
    return r;
}

ChiMatrix::ChiMatrix(Matrix4 m, bool require_tp) : m_(std::move(m)) {
    CptpReport r = is_cptp(m_);
    if (r.hermiticity_defect > kHardTol)
        throw InvalidChannel("ChiMatrix: Hermiticity defect " +
                             std::to_string(r.hermiticity_defect));
    if (r.min_eigenvalue < -kHardTol)
        throw InvalidChannel("ChiMatrix: negative eigenvalue " +
                             std::to_string(r.min_eigenvalue));
    if (r.trace_defect > kHardTol)
        throw InvalidChannel("ChiMatrix: trace defect " + std::to_string(r.trace_defect));
    if (require_tp && r.tp_defect > kHardTol)
        throw InvalidChannel("ChiMatrix: trace-preservation defect " +
                             std::to_string(r.tp_defect));
}

ChiMatrix ChiMatrix::identity() {
    Matrix4 m = Matrix4::Zero();
    m(0, 0) = 1.0;
    return ChiMatrix(m);
}

double KrausSet::completeness_defect() const {
    Matrix2 acc = Matrix2::Zero();
    for (const auto& k : operators) acc += k.adjoint() * k;
    return (acc - Matrix2::Identity()).cwiseAbs().maxCoeff();
}

void KrausSet::validate(double tol) const {
    if (operators.empty()) throw InvalidChannel("KrausSet: empty");
    if (completeness_defect() > tol)
        throw InvalidChannel("KrausSet: completeness defect " +
                             std::to_string(completeness_defect()));
}

Matrix2 apply_chi(const ChiMatrix& chi, const Matrix2& rho) {
    const auto& e = pauli_basis();
    Matrix2 out = Matrix2::Zero();
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) out += chi.mat()(m, n) * (e[m] * rho * e[n].adjoint());
    return out;
}

DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho) {
    if (rho.dim() != 2) throw DimensionError("apply_chi: expected a qubit state");
    Matrix2 out = apply_chi(chi, Matrix2(rho.mat()));
    return DensityMatrix(0.5 * (Matrix(out) + Matrix(out).adjoint()));
}

ChiMatrix chi_from_kraus(const KrausSet& k) {
    k.validate();
    const auto& e = pauli_basis();
    Matrix4 chi = Matrix4::Zero();
    for (const auto& op : k.operators) {
        // K = sum_m a_m E_m with a_m = Tr(E_m+ K)/2
        Vector4 a;
        for (int m = 0; m < 4; ++m) a[m] = (e[m].adjoint() * op).trace() / 2.0;
        chi += a * a.adjoint();
    }
    chi = 0.5 * (chi + Matrix4(chi.adjoint()));
    return ChiMatrix(chi);
}

KrausSet kraus_from_chi(const ChiMatrix& chi, double tol) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(chi.mat());
    const auto& e = pauli_basis();
    KrausSet out;
    for (int i = 0; i < 4; ++i) {
        const double l = es.eigenvalues()[i];
        if (l < tol) continue;
        Vector4 v = std::sqrt(l) * es.eigenvectors().col(i);
        Matrix2 k = Matrix2::Zero();
        for (int m = 0; m < 4; ++m) k += v[m] * e[m];
        out.operators.push_back(k);
    }
    return out;
}

ChiMatrix compose_channels(const ChiMatrix& first, const ChiMatrix& then) {
    KrausSet a = kraus_from_chi(first);
    KrausSet b = kraus_from_chi(then);
    KrausSet prod;
    for (const auto& kb : b.operators)
        for (const auto& ka : a.operators) prod.operators.push_back(kb * ka);
    return chi_from_kraus(prod);
}

ChiMatrix dephasing_channel(cd gamma, PauliAxis axis) {
    const double g = std::abs(gamma);
    if (g > 1.0 + 1e-12)
        throw InvalidChannel("dephasing_channel: |gamma| = " + std::to_string(g) + " > 1");
    const double phase = std::arg(gamma);
    const Matrix2& a = pauli_basis()[static_cast<int>(axis)];
    // Unitary phase rotation about the axis, then real dephasing with |gamma|.
    Matrix2 u = std::cos(phase / 2.0) * Matrix2::Identity() + cd(0, 1) * std::sin(phase / 2.0) * a;
    KrausSet k;
    const double p0 = (1.0 + std::min(g, 1.0)) / 2.0;
    k.operators.push_back(std::sqrt(p0) * u);
    if (p0 < 1.0) k.operators.push_back(std::sqrt(1.0 - p0) * (a * u));
    return chi_from_kraus(k);
}

ChiMatrix mix_channels(const std::vector<std::pair<double, ChiMatrix>>& parts) {
    if (parts.empty()) throw InvalidChannel("mix_channels: empty mixture");
    double total = 0.0;
    Matrix4 acc = Matrix4::Zero();
    for (const auto& [p, chi] : parts) {
        if (p < 0.0) throw InvalidChannel("mix_channels: negative probability");
        total += p;
        acc += p * chi.mat();
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidChannel("mix_channels: probabilities sum to " + std::to_string(total));
    return ChiMatrix(acc);
}

void FiberParams::validate() const {
    if (!(length_m > 0.0)) throw InvalidChannel("FiberParams: length must be positive");
    if (!(delta_n > 0.0 && delta_n < 1.0))
        throw InvalidChannel("FiberParams: delta_n must lie in (0,1)");
    if (!std::isfinite(common_delay_s))
        throw InvalidChannel("FiberParams: non-finite common delay");
}

double kappa(const FiberParams& f) {
    f.validate();
    return f.length_m * f.delta_n / kSpeedOfLight;
}

double coherence_length_um(double lambda_nm, double delta_lambda_nm) {
    if (!(lambda_nm > 0.0) || !(delta_lambda_nm > 0.0))
        throw InvalidChannel("coherence_length: inputs must be positive");
    return lambda_nm * lambda_nm / delta_lambda_nm * 1e-3;  // nm^2/nm -> um
}

double decoherence_fiber_length_m(double coherence_length_um, double delta_n) {
    if (!(coherence_length_um > 0.0) || !(delta_n > 0.0))
        throw InvalidChannel("decoherence_fiber_length: inputs must be positive");
    return coherence_length_um * 1e-6 / delta_n;
}

SpectralProfile SpectralProfile::from_filter(double lambda_nm, double delta_lambda_nm) {
    if (!(lambda_nm > 0.0) || !(delta_lambda_nm > 0.0))
        throw InvalidChannel("SpectralProfile: filter parameters must be positive");
    const double lambda_m = lambda_nm * 1e-9;
    const double delta_omega = 2.0 * std::numbers::pi * kSpeedOfLight * delta_lambda_nm * 1e-9 /
                               (lambda_m * lambda_m);
    SpectralProfile s;
    s.omega0 = 2.0 * std::numbers::pi * kSpeedOfLight / lambda_m;
    s.sigma = delta_omega / std::sqrt(std::numbers::ln2);
    s.validate();
    return s;
}

double SpectralProfile::density(double omega) const {
    const double x = omega - omega0;
    return 2.0 / (std::sqrt(std::numbers::pi) * sigma) * std::exp(-4.0 * x * x / (sigma * sigma));
}

void SpectralProfile::validate() const {
    if (!(sigma > 0.0) || !(omega0 > 0.0))
        throw InvalidChannel("SpectralProfile: omega0 and sigma must be positive");
}

cd gaussian_coherence(double kappa_s, const SpectralProfile& s) {
    s.validate();
    const double ks = kappa_s * s.sigma;
    return std::polar(std::exp(-ks * ks / 16.0), kappa_s * s.omega0);
}

CoherenceFactor single_fiber_gamma(const FiberParams& f, const SpectralProfile& s) {
    return CoherenceFactor{gaussian_coherence(kappa(f), s)};
}

nlohmann::json chi_to_json(const ChiMatrix& chi) {
    nlohmann::json j = matrix_to_json(chi.mat());
    j["basis"] = {"I", "X", "Y", "Z"};
    return j;
}

ChiMatrix chi_from_json(const nlohmann::json& j, bool require_tp) {
    Matrix m = matrix_from_json(j);
    if (m.rows() != 4) throw DimensionError("chi_from_json: dim must be 4");
    return ChiMatrix(Matrix4(m), require_tp);
}

}  // namespace fiberchan
