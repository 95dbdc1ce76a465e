#include "fiberchan/capacity.hpp"

#include <cmath>
#include <thread>

#include "fiberchan/qstate.hpp"

namespace fiberchan {

namespace {

double entropy_2x2(const Matrix2& rho) {
    const double a = rho(0, 0).real(), b = rho(1, 1).real();
    const double c2 = std::norm(rho(0, 1));
    const double disc = std::sqrt((a - b) * (a - b) + 4.0 * c2);
    const double l0 = 0.5 * ((a + b) + disc), l1 = 0.5 * ((a + b) - disc);
    const double ev[2] = {l0, l1};
    return entropy_bits({ev, 2});
}

struct ScanContext {
    std::vector<Matrix2> kraus;

    explicit ScanContext(const ChiMatrix& chi) {
        for (const auto& k : kraus_from_chi(chi).operators) kraus.push_back(k);
    }

    double output_entropy(const StateParam& p) const {
        const Vector2 psi = family_ket(p);
        const Vector2 perp = family_ket_perp(p);
        Matrix2 rho = p.lambda0 * (psi * psi.adjoint()) +
                      (1.0 - p.lambda0) * (perp * perp.adjoint());
        Matrix2 out = Matrix2::Zero();
        for (const auto& k : kraus) out += k * rho * k.adjoint();
        return entropy_2x2(out);
    }

    double exchange_entropy(const StateParam& p) const {
        const Vector2 psi = family_ket(p);
        const Vector2 perp = family_ket_perp(p);
        const double l0 = p.lambda0, l1 = 1.0 - p.lambda0;

        // (E (x) I) on the purification, system index major.
        Vector4 big;
        const double a = std::sqrt(l0), b = std::sqrt(l1);
        big[0] = a * psi[0];
        big[1] = b * perp[0];
        big[2] = a * psi[1];
        big[3] = b * perp[1];
        Matrix4 joint = Matrix4::Zero();
        for (const auto& k : kraus) {
            Vector4 w;
            w[0] = k(0, 0) * big[0] + k(0, 1) * big[2];
            w[1] = k(0, 0) * big[1] + k(0, 1) * big[3];
            w[2] = k(1, 0) * big[0] + k(1, 1) * big[2];
            w[3] = k(1, 0) * big[1] + k(1, 1) * big[3];
            joint += w * w.adjoint();
        }
        Eigen::SelfAdjointEigenSolver<Matrix4> es(joint, Eigen::EigenvaluesOnly);
        const Eigen::Vector4d ev = es.eigenvalues();
        return entropy_bits({ev.data(), 4});
    }

    double coherent_info(const StateParam& p) const {
        return output_entropy(p) - exchange_entropy(p);
    }
};

}  // namespace

void ScanGrid::validate() const {
    if (!(lambda0_step > 0.0) || !(theta_step > 0.0) || !(phi_step > 0.0))
        throw InvalidState("ScanGrid: steps must be positive");
}

int ScanGrid::lambda0_points() const {
    return static_cast<int>(std::floor(1.0 / lambda0_step + 0.5)) + 1;
}
int ScanGrid::theta_points() const {
    return static_cast<int>(std::ceil(std::numbers::pi / theta_step - 1e-12));
}
int ScanGrid::phi_points() const {
    return static_cast<int>(std::ceil(2.0 * std::numbers::pi / phi_step - 1e-12));
}

double entropy_exchange(const ChiMatrix& chi, const StateParam& p) {
    p.validate();
    return ScanContext(chi).exchange_entropy(p);
}

double coherent_information(const ChiMatrix& chi, const StateParam& p) {
    p.validate();
    return ScanContext(chi).coherent_info(p);
}

CapacityResult q1_scan(const ChiMatrix& chi, const ScanGrid& g, bool keep_surface, int jobs) {
    g.validate();
    const ScanContext ctx(chi);
    const int nl = g.lambda0_points(), nt = g.theta_points(), np = g.phi_points();
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::clamp(jobs, 1, nl);

    struct Best {
        double ic = -1e300;
        StateParam p;
    };
    std::vector<Best> bests(jobs);
    std::vector<std::vector<SurfaceRow>> surfaces(keep_surface ? jobs : 0);

    auto worker = [&](int w) {
        Best& best = bests[w];
        for (int il = w; il < nl; il += jobs) {
            StateParam p;
            p.lambda0 = std::min(il * g.lambda0_step, 1.0);
            for (int it = 0; it < nt; ++it) {
                p.theta = it * g.theta_step;
                for (int ip = 0; ip < np; ++ip) {
                    p.phi = ip * g.phi_step;
                    const double ic = ctx.coherent_info(p);
                    if (ic > best.ic) {
                        best.ic = ic;
                        best.p = p;
                    }
                    if (keep_surface)
                        surfaces[w].push_back(SurfaceRow{p.lambda0, p.theta, p.phi, ic});
                }
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }

    // Deterministic reduction: strict lexicographic tie-break on (l0, theta, phi).
    auto lex_before = [](const StateParam& a, const StateParam& b) {
        if (a.lambda0 != b.lambda0) return a.lambda0 < b.lambda0;
        if (a.theta != b.theta) return a.theta < b.theta;
        return a.phi < b.phi;
    };
    Best best = bests[0];
    for (int w = 1; w < jobs; ++w) {
        if (bests[w].ic > best.ic ||
            (bests[w].ic == best.ic && lex_before(bests[w].p, best.p)))
            best = bests[w];
    }

    CapacityResult res;
    res.q1 = best.ic;
    res.argmax = best.p;
    if (keep_surface) {
        std::vector<SurfaceRow> all;
        for (auto& s : surfaces) all.insert(all.end(), s.begin(), s.end());
        std::sort(all.begin(), all.end(), [](const SurfaceRow& a, const SurfaceRow& b) {
            if (a.lambda0 != b.lambda0) return a.lambda0 < b.lambda0;
            if (a.theta != b.theta) return a.theta < b.theta;
            return a.phi < b.phi;
        });
        res.surface = std::move(all);
    }
    return res;
}

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw InvalidState("binary_entropy: argument outside [0,1]");
    const double ev[2] = {p, 1.0 - p};
    return entropy_bits({ev, 2});
}

double dephasing_capacity_oracle(double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        throw InvalidState("dephasing_capacity_oracle: gamma outside [0,1]");
    return 1.0 - binary_entropy((1.0 - gamma) / 2.0);
}

DataProcessingResult data_processing_check(const ChiMatrix& chi1, const ChiMatrix& chi2,
                                           const StateParam& p) {
    DataProcessingResult r;
    r.input_entropy = von_neumann_entropy(state_from_params(p));
    r.ic_first = coherent_information(chi1, p);
    r.ic_composed = coherent_information(compose_channels(chi1, chi2), p);
    const double slack = 1e-9;
    r.pass = r.input_entropy + slack >= r.ic_first && r.ic_first + slack >= r.ic_composed;
    return r;
}

}  // namespace fiberchan
