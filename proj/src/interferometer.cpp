#include "fiberchan/interferometer.hpp"

#include <cmath>
#include <numbers>

namespace fiberchan {

namespace {

constexpr double kDarkPortTol = 1e-12;

// index = 2*pol + path, pol 0 = H, 1 = V
inline int idx(int pol, int path) { return 2 * pol + path; }

}  // namespace

const char* to_string(NetworkMode mode) {
    switch (mode) {
        case NetworkMode::Unidirectional: return "unidirectional";
        case NetworkMode::BidirectionalAB: return "bidirectional-ab";
        case NetworkMode::BidirectionalBA: return "bidirectional-ba";
    }
    return "?";
}

void PureState::validate() const {
    const double n = std::norm(alpha) + std::norm(beta);
    if (std::abs(n - 1.0) > kHermTol)
        throw InvalidState("PureState: squared norm " + std::to_string(n) + " differs from 1");
}

double PolPathState::total_norm() const {
    double n = 0.0;
    for (size_t k = 0; k < amp.size(); ++k) n += grid.weight[k] * amp[k].squaredNorm();
    return n;
}

PolPathState PolPathState::from_input(const PureState& in, FrequencyGrid grid) {
    in.validate();
    PolPathState s;
    s.amp.assign(grid.omega.size(), Vector4::Zero());
    for (auto& a : s.amp) {
        a[idx(0, 0)] = in.alpha;
        a[idx(1, 0)] = in.beta;
    }
    s.grid = std::move(grid);
    return s;
}

void pbs_apply(PolPathState& s) {
    for (auto& a : s.amp) std::swap(a[idx(1, 0)], a[idx(1, 1)]);
}

void hwp_apply(PolPathState& s, double angle_deg, int path) {
    const double two_a = 2.0 * angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(two_a), sn = std::sin(two_a);
    for (auto& a : s.amp) {
        for (int p = 0; p < 2; ++p) {
            if (path != kBothPaths && p != path) continue;
            const cd h = a[idx(0, p)], v = a[idx(1, p)];
            a[idx(0, p)] = c * h + sn * v;
            a[idx(1, p)] = sn * h - c * v;
        }
    }
}

void fiber_apply(PolPathState& s, int path, const FiberParams& f) {
    const double k = kappa(f);
    const double d = f.common_delay_s;
    for (size_t n = 0; n < s.amp.size(); ++n) {
        const double w = s.grid.omega[n];
        s.amp[n][idx(0, path)] *= std::polar(1.0, d * w);
        s.amp[n][idx(1, path)] *= std::polar(1.0, (d + k) * w);
    }
}

NetworkResult run_network(NetworkMode mode, const PureState& input, const FiberParams& fiber1,
                          const FiberParams& fiber2, const SpectralProfile& s, int nodes) {
    if (nodes < 16) throw InvalidChannel("run_network: need at least 16 quadrature nodes");
    fiber1.validate();
    fiber2.validate();
    PolPathState st = PolPathState::from_input(input, FrequencyGrid::gauss_hermite(s, nodes));

    switch (mode) {
        case NetworkMode::Unidirectional:
            pbs_apply(st);
            hwp_apply(st, 22.5, 0);
            hwp_apply(st, 22.5, 1);
            fiber_apply(st, 0, fiber1);
            fiber_apply(st, 1, fiber2);
            hwp_apply(st, 22.5, 0);
            hwp_apply(st, 22.5, 1);
            pbs_apply(st);
            hwp_apply(st, 45.0, 1);  // output-port flip
            break;
        case NetworkMode::BidirectionalAB:
            pbs_apply(st);
            hwp_apply(st, 0.0, 0);
            hwp_apply(st, 45.0, 1);
            fiber_apply(st, 0, fiber1);
            fiber_apply(st, 1, fiber2);
            hwp_apply(st, 0.0, 0);
            hwp_apply(st, 45.0, 1);
            pbs_apply(st);
            break;
        case NetworkMode::BidirectionalBA:
            // Same elements traversed from the B side: the fiber-2 arm is
            // now the transmitted path.
            pbs_apply(st);
            hwp_apply(st, 45.0, 0);
            hwp_apply(st, 0.0, 1);
            fiber_apply(st, 0, fiber2);
            fiber_apply(st, 1, fiber1);
            hwp_apply(st, 45.0, 0);
            hwp_apply(st, 0.0, 1);
            pbs_apply(st);
            break;
    }

    NetworkResult out;
    Matrix2 combined = Matrix2::Zero();
    for (int port = 0; port < 2; ++port) {
        Matrix2 acc = Matrix2::Zero();
        for (size_t k = 0; k < st.amp.size(); ++k) {
            Vector2 v(st.amp[k][idx(0, port)], st.amp[k][idx(1, port)]);
            acc += st.grid.weight[k] * (v * v.adjoint());
        }
        acc = 0.5 * (acc + Matrix2(acc.adjoint()));
        const double p = acc.trace().real();
        out.ports[port].port = port;
        out.ports[port].probability = p;
        out.ports[port].state = p > kDarkPortTol ? Matrix2(acc / p) : Matrix2::Zero();
        combined += acc;
    }
    out.combined = combined;
    return out;
}

Matrix2 closed_form_output(NetworkMode mode, const PureState& input, const FiberParams& fiber1,
                           const FiberParams& fiber2, const SpectralProfile& s) {
    input.validate();
    s.validate();
    const double k1 = kappa(fiber1), k2 = kappa(fiber2);
    const double d1 = fiber1.common_delay_s, d2 = fiber2.common_delay_s;
    cd gamma;
    switch (mode) {
        case NetworkMode::Unidirectional: {
            const double dd = d1 - d2;
            const double dk = k1 - k2;
            // Gamma = int f(w) e^{i dd w} eta(dk w) dw, eta(t) = (1 + e^{it})/2,
            // evaluated in the scaled variable x = (w - w0)/sigma.
            const double w0 = s.omega0, sg = s.sigma;
            auto integrand = [&](double x) {
                const double w = w0 + sg * x;
                const double env = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-4.0 * x * x);
                return env * std::polar(1.0, dd * w) *
                       0.5 * (1.0 + std::polar(1.0, dk * w));
            };
            gamma = adaptive_simpson(integrand, -5.0, 5.0, 1e-12);
            break;
        }
        case NetworkMode::BidirectionalAB:
            gamma = gaussian_coherence(d1 - d2, s);
            break;
        case NetworkMode::BidirectionalBA:
            gamma = gaussian_coherence((d2 + k2) - (d1 + k1), s);
            break;
    }
    Matrix2 rho;
    const cd a = input.alpha, b = input.beta;
    rho(0, 0) = std::norm(a);
    rho(1, 1) = std::norm(b);
    rho(0, 1) = a * std::conj(b) * gamma;
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

Matrix4 chi_from_probe_outputs(const std::array<Matrix2, 4>& outputs) {
    const Matrix2& fh = outputs[0];
    const Matrix2& fv = outputs[1];
    const Matrix2 a = 2.0 * outputs[2] - fh - fv;              // E(|H><V|) + E(|V><H|)
    const Matrix2 b = 2.0 * outputs[3] - fh - fv;              // i (E(|H><V|) - E(|V><H|))
    const Matrix2 ehv = 0.5 * (a - cd(0, 1) * b);
    const Matrix2 evh = 0.5 * (a + cd(0, 1) * b);

    // Superoperator in column-major vec convention; vec(|i><j|) index i+2j.
    Eigen::Matrix4cd sup;
    auto put = [&](int i, int j, const Matrix2& m) {
        sup.col(i + 2 * j) = Eigen::Map<const Eigen::Vector4cd>(m.data());
    };
    put(0, 0, fh);
    put(1, 1, fv);
    put(0, 1, ehv);
    put(1, 0, evh);

    // sup = sum_mn chi_mn conj(E_n) (x) E_m; solve the 16x16 system.
    const auto& e = pauli_basis();
    Eigen::MatrixXcd m(16, 16);
    for (int mm = 0; mm < 4; ++mm) {
        for (int nn = 0; nn < 4; ++nn) {
            Eigen::Matrix4cd kron;
            const Matrix2 en = e[nn].conjugate();
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    kron.block<2, 2>(2 * i, 2 * j) = en(i, j) * e[mm];
            m.col(mm + 4 * nn) = Eigen::Map<const Eigen::VectorXcd>(kron.data(), 16);
        }
    }
    Eigen::VectorXcd x =
        m.colPivHouseholderQr().solve(Eigen::Map<const Eigen::VectorXcd>(sup.data(), 16));
    Matrix4 chi;
    for (int mm = 0; mm < 4; ++mm)
        for (int nn = 0; nn < 4; ++nn) chi(mm, nn) = x[mm + 4 * nn];
    return 0.5 * (chi + Matrix4(chi.adjoint()));
}

const PortChannel& PortChannels::port(int which) const {
    for (const auto& p : ports)
        if (p.port == which) return p;
    throw InvalidChannel("PortChannels: conditional channel undefined for dark port " +
                         std::to_string(which));
}

PortChannels extract_port_channels(NetworkMode mode, const FiberParams& fiber1,
                                   const FiberParams& fiber2, const SpectralProfile& s,
                                   int nodes) {
    const std::array<PureState, 4> probes = {
        PureState{1.0, 0.0},
        PureState{0.0, 1.0},
        PureState{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0},
        PureState{std::numbers::sqrt2 / 2.0, cd(0.0, -std::numbers::sqrt2 / 2.0)}};

    std::array<NetworkResult, 4> runs;
    for (int i = 0; i < 4; ++i) runs[i] = run_network(mode, probes[i], fiber1, fiber2, s, nodes);

    std::vector<PortChannel> found;
    Matrix4 mean = Matrix4::Zero();
    for (int port = 0; port < 2; ++port) {
        std::array<Matrix2, 4> unnorm;
        for (int i = 0; i < 4; ++i)
            unnorm[i] = runs[i].ports[port].probability * runs[i].ports[port].state;
        Matrix4 chi_tilde = chi_from_probe_outputs(unnorm);
        const double p = chi_tilde.trace().real();
        if (p < kDarkPortTol) continue;
        mean += chi_tilde;
        found.push_back(PortChannel{port, p, ChiMatrix(Matrix4(chi_tilde / p), false)});
    }
    return PortChannels{std::move(found), ChiMatrix(mean)};
}

}  // namespace fiberchan
