#include <doctest.h>

#include <random>

#include "fiberchan/capacity.hpp"
#include "fiberchan/qstate.hpp"
#include "test_util.hpp"

using namespace fiberchan;

namespace {

// Independent 4x4 oracle: build (E (x) I)|Psi><Psi| from the Kraus set.
double exchange_entropy_oracle(const ChiMatrix& chi, const StateParam& p) {
    Vector4 psi = purify(p);
    Matrix joint = Matrix::Zero(4, 4);
    for (const Matrix2& k : kraus_from_chi(chi).operators) {
        Matrix big = Matrix::Zero(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                big.block(2 * i, 2 * j, 2, 2) = k(i, j) * Matrix::Identity(2, 2);
        Matrix w = big * psi;
        joint += w * w.adjoint();
    }
    return von_neumann_entropy(DensityMatrix(joint));
}

const ScanGrid kCoarse{0.05, std::numbers::pi / 10.0, std::numbers::pi / 10.0};

}  // namespace

TEST_CASE("scan grid point counts") {
    ScanGrid g;
    CHECK(g.lambda0_points() == 101);
    CHECK(g.theta_points() == 50);
    CHECK(g.phi_points() == 100);
    CHECK_THROWS_AS((ScanGrid{0.0, 0.1, 0.1}.validate()), InvalidState);
}

TEST_CASE("identity channel: zero exchange entropy, Ic equals input entropy") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        StateParam p{u(rng), u(rng) * std::numbers::pi, u(rng) * 2.0 * std::numbers::pi};
        CHECK(entropy_exchange(ChiMatrix::identity(), p) ==
              doctest::Approx(0.0).epsilon(1e-9));
        const double s_in = von_neumann_entropy(state_from_params(p));
        CHECK(coherent_information(ChiMatrix::identity(), p) ==
              doctest::Approx(s_in).epsilon(1e-9));
    }
}

TEST_CASE("entropy exchange matches the 4x4 oracle on random channels") {
    std::mt19937_64 rng(72);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        ChiMatrix chi = test::random_cptp_chi(rng);
        StateParam p{u(rng), u(rng) * std::numbers::pi, u(rng) * 2.0 * std::numbers::pi};
        CHECK(entropy_exchange(chi, p) ==
              doctest::Approx(exchange_entropy_oracle(chi, p)).epsilon(1e-8));
    }
}

TEST_CASE("binary entropy and the dephasing oracle") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binary_entropy(0.0) == doctest::Approx(0.0));
    CHECK(binary_entropy(0.25) == doctest::Approx(0.81127812445913).epsilon(1e-10));
    CHECK(dephasing_capacity_oracle(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dephasing_capacity_oracle(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dephasing_capacity_oracle(0.5) ==
          doctest::Approx(0.18872187554086).epsilon(1e-10));
    CHECK_THROWS_AS(dephasing_capacity_oracle(1.5), InvalidState);
}

TEST_CASE("coarse scan brackets the dephasing capacity") {
    for (double gamma : {0.0, 0.5, 1.0}) {
        ChiMatrix chi = dephasing_channel(gamma, PauliAxis::Z);
        CapacityResult r = q1_scan(chi, kCoarse);
        const double oracle = dephasing_capacity_oracle(gamma);
        // grid maximum can only undershoot, and not by much on this channel
        CHECK(r.q1 <= oracle + 1e-9);
        CHECK(r.q1 >= oracle - 0.01);
    }
    // identity: the maximum sits exactly on a grid point (lambda0 = 0.5)
    CapacityResult id = q1_scan(ChiMatrix::identity(), kCoarse);
    CHECK(id.q1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(id.argmax.lambda0 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scan is deterministic and job-count independent") {
    std::mt19937_64 rng(73);
    ChiMatrix chi = test::random_cptp_chi(rng);
    CapacityResult a = q1_scan(chi, kCoarse, true, 1);
    CapacityResult b = q1_scan(chi, kCoarse, true, 3);
    CHECK(a.q1 == b.q1);
    CHECK(a.argmax.lambda0 == b.argmax.lambda0);
    CHECK(a.argmax.theta == b.argmax.theta);
    CHECK(a.argmax.phi == b.argmax.phi);
    REQUIRE(a.surface);
    REQUIRE(b.surface);
    REQUIRE(a.surface->size() == b.surface->size());
    CHECK(a.surface->size() ==
          static_cast<std::size_t>(kCoarse.lambda0_points()) * kCoarse.theta_points() *
              kCoarse.phi_points());
    for (std::size_t i = 0; i < a.surface->size(); ++i)
        CHECK((*a.surface)[i].ic == (*b.surface)[i].ic);
}

TEST_CASE("data processing inequality on random draws") {
    std::mt19937_64 rng(74);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        ChiMatrix c1 = test::random_cptp_chi(rng);
        ChiMatrix c2 = test::random_cptp_chi(rng);
        StateParam p{u(rng), u(rng) * std::numbers::pi, u(rng) * 2.0 * std::numbers::pi};
        DataProcessingResult r = data_processing_check(c1, c2, p);
        CHECK(r.pass);
        CHECK(r.input_entropy + 1e-9 >= r.ic_first);
        CHECK(r.ic_first + 1e-9 >= r.ic_composed);
    }
}
