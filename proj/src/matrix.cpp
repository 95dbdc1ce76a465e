#include "fiberchan/matrix.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace fiberchan {

double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

Matrix sqrtm_psd(const Matrix& m, double psd_tol) {
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < psd_tol)
            throw InvalidState("sqrtm_psd: eigenvalue " + std::to_string(ev[i]) +
                               " below PSD tolerance");
        ev[i] = std::sqrt(std::max(ev[i], 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double uhlmann_fidelity(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("uhlmann_fidelity: dimension mismatch");
    Matrix sa = sqrtm_psd(a);
    Matrix inner = sa * b * sa;
    Eigen::VectorXd ev = hermitian_eigenvalues(inner);
    double tr = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        tr += std::sqrt(std::max(ev[i], 0.0));
    double f = tr * tr;
    return std::clamp(f, 0.0, 1.0);
}

double entropy_bits(std::span<const double> eigenvalues, double psd_tol) {
    double s = 0.0;
    for (double l : eigenvalues) {
        if (l < psd_tol)
            throw InvalidState("entropy_bits: negative eigenvalue " + std::to_string(l));
        if (l < kEntropyClamp) continue;
        s -= l * std::log2(l);
    }
    return s;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["dim"] = m.rows();
    std::vector<double> re, im;
    re.reserve(static_cast<size_t>(m.size()));
    im.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto dim = j.at("dim").get<Eigen::Index>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != static_cast<size_t>(dim * dim) || im.size() != re.size())
        throw DimensionError("matrix_from_json: entry count does not match dim^2");
    Matrix m(dim, dim);
    size_t k = 0;
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c, ++k) m(r, c) = cd(re[k], im[k]);
    return m;
}

}  // namespace fiberchan
