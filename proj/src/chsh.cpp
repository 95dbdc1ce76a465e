#include "fiberchan/chsh.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fiberchan/qstate.hpp"
#include "fiberchan/stats.hpp"

namespace fiberchan {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::Vector4cd polarizer_pair(double t1_deg, double t2_deg) {
    const double t1 = t1_deg * kDeg, t2 = t2_deg * kDeg;
    const Vector2 a(std::cos(t1), std::sin(t1));
    const Vector2 b(std::cos(t2), std::sin(t2));
    Eigen::Vector4cd v;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) v[2 * i + j] = a[i] * b[j];
    return v;
}

}  // namespace

DensityMatrix entangled_input(double alpha_sq) {
    if (alpha_sq < 0.0 || alpha_sq > 1.0)
        throw InvalidState("entangled_input: alpha^2 outside [0,1]");
    Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
    psi[0] = std::sqrt(alpha_sq);        // |HH>
    psi[3] = std::sqrt(1.0 - alpha_sq);  // |VV>
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix channel_on_A(const ChiMatrix& chi, const DensityMatrix& rho_ab) {
    if (rho_ab.dim() != 4) throw DimensionError("channel_on_A: expected a two-qubit state");
    Matrix4 out = Matrix4::Zero();
    for (const auto& k : kraus_from_chi(chi).operators) {
        Matrix4 big = Matrix4::Zero();
        big.block<2, 2>(0, 0) = k(0, 0) * Matrix2::Identity();
        big.block<2, 2>(0, 2) = k(0, 1) * Matrix2::Identity();
        big.block<2, 2>(2, 0) = k(1, 0) * Matrix2::Identity();
        big.block<2, 2>(2, 2) = k(1, 1) * Matrix2::Identity();
        out += big * rho_ab.mat() * big.adjoint();
    }
    return DensityMatrix(0.5 * (Matrix(out) + Matrix(out).adjoint()));
}

double coincidence_probability(const DensityMatrix& rho_ab, double theta1_deg,
                               double theta2_deg) {
    if (rho_ab.dim() != 4)
        throw DimensionError("coincidence_probability: expected a two-qubit state");
    Eigen::Vector4cd v = polarizer_pair(theta1_deg, theta2_deg);
    const double p = (v.adjoint() * rho_ab.mat() * v).real()(0, 0);
    return std::clamp(p, 0.0, 1.0);
}

double correlation_E(const DensityMatrix& rho_ab, double theta1_deg, double theta2_deg) {
    const double c00 = coincidence_probability(rho_ab, theta1_deg, theta2_deg);
    const double c11 = coincidence_probability(rho_ab, theta1_deg + 90.0, theta2_deg + 90.0);
    const double c01 = coincidence_probability(rho_ab, theta1_deg, theta2_deg + 90.0);
    const double c10 = coincidence_probability(rho_ab, theta1_deg + 90.0, theta2_deg);
    const double denom = c00 + c11 + c01 + c10;
    if (denom < 1e-15)
        throw InvalidState("correlation_E: all four coincidence probabilities vanish");
    return (c00 + c11 - c01 - c10) / denom;
}

double chsh_S(const DensityMatrix& rho_ab, const AngleSet& a) {
    return correlation_E(rho_ab, a.theta1, a.theta2) +
           correlation_E(rho_ab, a.theta1, a.theta2p) +
           correlation_E(rho_ab, a.theta1p, a.theta2) -
           correlation_E(rho_ab, a.theta1p, a.theta2p);
}

std::pair<AngleSet, double> optimize_angles(const DensityMatrix& rho_ab, int restarts,
                                            std::uint64_t seed) {
    auto eval = [&](const AngleSet& a) { return chsh_S(rho_ab, a); };

    auto polish = [&](AngleSet a) {
        double s = eval(a);
        double step = 30.0;
        while (step > 1e-7) {
            bool improved = false;
            double* angles[4] = {&a.theta1, &a.theta1p, &a.theta2, &a.theta2p};
            for (double* ang : angles) {
                for (double delta : {+step, -step}) {
                    const double saved = *ang;
                    *ang = saved + delta;
                    const double sn = eval(a);
                    if (sn > s) {
                        s = sn;
                        improved = true;
                    } else {
                        *ang = saved;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        return std::make_pair(a, s);
    };

    auto [best_a, best_s] = polish(AngleSet{});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 180.0);
    for (int r = 1; r < restarts; ++r) {
        AngleSet start{angle(rng), angle(rng), angle(rng), angle(rng)};
        auto [a, s] = polish(start);
        if (s > best_s) {
            best_s = s;
            best_a = a;
        }
    }
    return {best_a, best_s};
}

double joint_coherent_info(const ChiMatrix& chi, double alpha_sq) {
    DensityMatrix out = channel_on_A(chi, entangled_input(alpha_sq));
    DensityMatrix out_a = partial_trace(out, Subsystem::Second);
    return von_neumann_entropy(out_a) - von_neumann_entropy(out);
}

}  // namespace fiberchan
