#include "fiberchan/tomography.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fiberchan/stats.hpp"

namespace fiberchan {

namespace {

// u vectors with p_s = u_s^+ chi u_s, s = 4*i + j over (input, projector).
const std::array<Vector4, 16>& setting_vectors() {
    static const std::array<Vector4, 16> vs = [] {
        std::array<Vector4, 16> out;
        const auto& probes = probe_states();
        const auto& e = pauli_basis();
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                Vector4 u;
                for (int m = 0; m < 4; ++m)
                    u[m] = std::conj(cd(probes[j].adjoint() * e[m] * probes[i]));
                out[4 * i + j] = u;
            }
        }
        return out;
    }();
    return vs;
}

Matrix4 chi_unnormalized(const TParams& p, double& trace_out) {
    Eigen::Matrix4cd t = t_matrix(p);
    Matrix4 g = t.adjoint() * t;
    trace_out = g.trace().real();
    return g;
}

// Entry map of the triangular T: (row, col) -> (re index, im index or -1).
struct TEntry {
    int row, col, re, im;
};
constexpr std::array<TEntry, 10> kTLayout = {{
    {0, 0, 0, -1},
    {1, 1, 1, -1},
    {2, 2, 2, -1},
    {3, 3, 3, -1},
    {1, 0, 4, 5},
    {2, 1, 6, 7},
    {3, 2, 8, 9},
    {2, 0, 10, 11},
    {3, 1, 12, 13},
    {3, 0, 14, 15},
}};

// W of df = Tr(W dchi): sum_s 2 (C p_s - c_s) u_s u_s^+
Matrix4 cost_weight(const Matrix4& chi, const CountsTable& counts) {
    const auto& us = setting_vectors();
    Matrix4 w = Matrix4::Zero();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const Vector4& u = us[4 * i + j];
            const double p = (u.adjoint() * chi * u).real()(0, 0);
            const double r = 2.0 * (counts.total * p - static_cast<double>(counts.c(i, j)));
            w += r * (u * u.adjoint());
        }
    }
    return w;
}

struct BfgsResult {
    TParams t;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

BfgsResult bfgs_minimize(TParams t, const CountsTable& counts, int max_iter = 2000) {
    using Vec = Eigen::Matrix<double, 16, 1>;
    using Mat = Eigen::Matrix<double, 16, 16>;
    auto pack = [](const TParams& p) { return Eigen::Map<const Vec>(p.t.data()); };
    auto unpack = [](const Vec& v) {
        TParams p;
        Eigen::Map<Vec>(p.t.data()) = v;
        return p;
    };

    Vec x = pack(t);
    double f = likelihood_cost(unpack(x), counts);
    Vec g = Eigen::Map<const Vec>(likelihood_gradient(unpack(x), counts).data());
    Mat h = Mat::Identity();

    BfgsResult res;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
            res.converged = true;
            break;
        }
        Vec dir = -h * g;
        if (dir.dot(g) >= 0.0) {  // not a descent direction, reset
            h = Mat::Identity();
            dir = -g;
        }
        double step = 1.0;
        const double slope = g.dot(dir);
        double fn = f;
        Vec xn = x;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + step * dir;
            fn = likelihood_cost(unpack(xn), counts);
            if (fn <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        Vec gn = Eigen::Map<const Vec>(likelihood_gradient(unpack(xn), counts).data());
        const Vec s = xn - x;
        const Vec y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-14) {
            const double rho = 1.0 / sy;
            const Mat i = Mat::Identity();
            h = (i - rho * s * y.transpose()) * h * (i - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
        const double improvement = f - fn;
        x = xn;
        f = fn;
        g = gn;
        if (improvement >= 0.0 && improvement < 1e-12) {
            res.converged = true;
            ++it;
            break;
        }
    }
    res.t = unpack(x);
    res.cost = f;
    res.iterations = it;
    return res;
}

}  // namespace

const std::array<Vector2, 4>& probe_states() {
    static const std::array<Vector2, 4> probes = [] {
        const double r = std::numbers::sqrt2 / 2.0;
        std::array<Vector2, 4> p;
        p[0] << 1.0, 0.0;
        p[1] << 0.0, 1.0;
        p[2] << r, r;
        p[3] << r, cd(0.0, -r);
        return p;
    }();
    return probes;
}

ProbTable ideal_probabilities(const ChiMatrix& chi) {
    const auto& us = setting_vectors();
    ProbTable p;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            p(i, j) = (us[4 * i + j].adjoint() * chi.mat() * us[4 * i + j]).real()(0, 0);
    return p;
}

void CountsTable::validate() const {
    if (!(total > 0.0)) throw InvalidState("CountsTable: total C must be positive");
    if ((c.array() < 0).any()) throw InvalidState("CountsTable: negative count");
}

CountsTable simulate_counts(const ChiMatrix& chi, std::int64_t shots_per_setting,
                            std::uint64_t seed) {
    if (shots_per_setting < 1)
        throw InvalidState("simulate_counts: shots_per_setting must be >= 1");
    ProbTable p = ideal_probabilities(chi);
    CountsTable t;
    t.total = static_cast<double>(shots_per_setting);
    t.seed = seed;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            t.c(i, j) = poisson_sample(shots_per_setting * std::max(p(i, j), 0.0), rng);
    return t;
}

void counts_to_csv(const CountsTable& t, std::ostream& os) {
    os << "# C=" << t.total << " seed=" << t.seed << "\n";
    os << "input,projector,count\n";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) os << i << "," << j << "," << t.c(i, j) << "\n";
}

CountsTable counts_from_csv(std::istream& is) {
    CountsTable t;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# C=", 0) != 0)
        throw InvalidState("counts_from_csv: missing metadata line");
    {
        std::istringstream meta(line.substr(4));
        meta >> t.total;
        std::string seed_field;
        meta >> seed_field;
        if (seed_field.rfind("seed=", 0) == 0) t.seed = std::stoull(seed_field.substr(5));
    }
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int i, j;
        std::int64_t count;
        char comma;
        std::istringstream row(line);
        row >> i >> comma >> j >> comma >> count;
        if (i < 0 || i > 3 || j < 0 || j > 3)
            throw InvalidState("counts_from_csv: index out of range");
        t.c(i, j) = count;
    }
    t.validate();
    return t;
}

Eigen::Matrix4cd t_matrix(const TParams& p) {
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (const auto& e : kTLayout)
        t(e.row, e.col) = cd(p.t[e.re], e.im >= 0 ? p.t[e.im] : 0.0);
    return t;
}

ChiMatrix t_to_chi(const TParams& p) {
    double tr = 0.0;
    Matrix4 g = chi_unnormalized(p, tr);
    if (tr <= 0.0) throw InvalidChannel("t_to_chi: degenerate all-zero parameters");
    return ChiMatrix(Matrix4(g / tr), false);
}

double likelihood_cost(const TParams& p, const CountsTable& counts) {
    counts.validate();
    double tr = 0.0;
    Matrix4 g = chi_unnormalized(p, tr);
    if (tr <= 0.0) throw InvalidChannel("likelihood_cost: degenerate all-zero parameters");
    Matrix4 chi = g / tr;
    const auto& us = setting_vectors();
    double f = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double pij = (us[4 * i + j].adjoint() * chi * us[4 * i + j]).real()(0, 0);
            const double d = static_cast<double>(counts.c(i, j)) - counts.total * pij;
            f += d * d / counts.total;
        }
    }
    return f;
}

std::array<double, 16> likelihood_gradient(const TParams& p, const CountsTable& counts) {
    counts.validate();
    double tr = 0.0;
    Matrix4 g = chi_unnormalized(p, tr);
    if (tr <= 0.0) throw InvalidChannel("likelihood_gradient: degenerate all-zero parameters");
    Matrix4 chi = g / tr;
    Matrix4 w = cost_weight(chi, counts);
    const double wc = (w * chi).trace().real();
    Eigen::Matrix4cd b = t_matrix(p) * (w - wc * Matrix4::Identity());
    std::array<double, 16> grad{};
    for (const auto& e : kTLayout) {
        const cd bij = b(e.row, e.col);
        grad[e.re] = 2.0 / tr * bij.real();
        if (e.im >= 0) grad[e.im] = 2.0 / tr * bij.imag();
    }
    return grad;
}

Matrix4 linear_inversion_chi(const ProbTable& p) {
    // Hermitian basis: 4 diagonal units, then (sym, antisym) pairs.
    std::vector<Matrix4> basis;
    for (int d = 0; d < 4; ++d) {
        Matrix4 m = Matrix4::Zero();
        m(d, d) = 1.0;
        basis.push_back(m);
    }
    for (int r = 0; r < 4; ++r) {
        for (int c = r + 1; c < 4; ++c) {
            Matrix4 m = Matrix4::Zero();
            m(r, c) = 1.0;
            m(c, r) = 1.0;
            basis.push_back(m);
            m(r, c) = cd(0, 1);
            m(c, r) = cd(0, -1);
            basis.push_back(m);
        }
    }
    const auto& us = setting_vectors();
    Eigen::MatrixXd a(16, 16);
    Eigen::VectorXd rhs(16);
    for (int s = 0; s < 16; ++s) {
        for (int k = 0; k < 16; ++k)
            a(s, k) = (us[s].adjoint() * basis[k] * us[s]).real()(0, 0);
        rhs[s] = p(s / 4, s % 4);
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(rhs);
    Matrix4 chi = Matrix4::Zero();
    for (int k = 0; k < 16; ++k) chi += x[k] * basis[k];

    // Project to PSD and renormalize.
    Eigen::SelfAdjointEigenSolver<Matrix4> es(chi);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (tr <= 0.0) return Matrix4::Identity() / 4.0;
    return es.eigenvectors() * (ev / tr).asDiagonal() * es.eigenvectors().adjoint();
}

TParams t_from_chi(const Matrix4& chi) {
    // chi = T^+ T with T lower triangular: reverse-permute, Cholesky, undo.
    Matrix4 r = Matrix4::Zero();
    for (int i = 0; i < 4; ++i) r(i, 3 - i) = 1.0;
    Matrix4 jitter = Matrix4::Identity() * 1e-12;
    Eigen::LLT<Eigen::Matrix4cd> llt(Matrix4(r * (chi + jitter) * r));
    if (llt.info() != Eigen::Success) {
        jitter *= 1e4;
        llt.compute(Matrix4(r * (chi + jitter) * r));
        if (llt.info() != Eigen::Success)
            throw NonConvergence("t_from_chi: Cholesky factorization failed");
    }
    Eigen::Matrix4cd t = (r * Eigen::Matrix4cd(llt.matrixL()) * r).adjoint();
    TParams p;
    for (const auto& e : kTLayout) {
        p.t[e.re] = t(e.row, e.col).real();
        if (e.im >= 0) p.t[e.im] = t(e.row, e.col).imag();
    }
    return p;
}

ReconstructedProcess reconstruct_ml(const CountsTable& counts, int restarts, std::uint64_t seed) {
    counts.validate();
    if (restarts < 1) throw InvalidState("reconstruct_ml: need at least one restart");

    ProbTable observed;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            observed(i, j) = static_cast<double>(counts.c(i, j)) / counts.total;
    TParams init = t_from_chi(linear_inversion_chi(observed));

    bool any_converged = false;
    bool have_best = false;
    BfgsResult best;
    for (int r = 0; r < restarts; ++r) {
        TParams t0 = init;
        if (r > 0) {
            std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            std::normal_distribution<double> noise(0.0, 0.05);
            for (auto& v : t0.t) v += noise(rng) * (std::abs(v) + 0.1);
        }
        BfgsResult res = bfgs_minimize(t0, counts);
        any_converged = any_converged || res.converged;
        if (!have_best || res.cost < best.cost) {
            best = res;
            have_best = true;
        }
    }
    if (!any_converged && best.cost > 1e-6 * counts.total)
        throw NonConvergence("reconstruct_ml: optimizer failed to converge, best cost " +
                             std::to_string(best.cost));
    return ReconstructedProcess{t_to_chi(best.t), best.cost, best.iterations, any_converged};
}

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
    return uhlmann_fidelity(a.mat(), b.mat());
}

}  // namespace fiberchan
