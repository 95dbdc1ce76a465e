#include <doctest.h>

#include <limits>
#include <numbers>
#include <random>

#include "fiberchan/qstate.hpp"
#include "test_util.hpp"

using namespace fiberchan;

TEST_CASE("density matrix validation") {
    CHECK_NOTHROW(DensityMatrix(0.5 * Matrix::Identity(2, 2)));
    Matrix bad = Matrix::Identity(2, 2);  // trace 2
    CHECK_THROWS_AS((DensityMatrix{bad}), InvalidState);
    Matrix neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS((DensityMatrix{neg}), InvalidState);
    Matrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.2, 0.5;
    CHECK_THROWS_AS((DensityMatrix{nonherm}), InvalidState);
}

TEST_CASE("state family orthogonality and parameterization") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        StateParam p{u(rng), u(rng) * std::numbers::pi,
                     u(rng) * 2.0 * std::numbers::pi};
        const Vector2 psi = family_ket(p), perp = family_ket_perp(p);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
        CHECK(std::abs(perp.norm() - 1.0) < 1e-12);
        CHECK(std::abs(psi.dot(perp)) < 1e-12);  // orthogonal
        DensityMatrix rho = state_from_params(p);
        // eigenvalues are {lambda0, 1 - lambda0}
        auto ev = hermitian_eigenvalues(rho.mat());
        const double lo = std::min(p.lambda0, 1.0 - p.lambda0);
        CHECK(ev[0] == doctest::Approx(lo).epsilon(1e-9));
    }
    CHECK_THROWS_AS((StateParam{1.5, 0.0, 0.0}.validate()), InvalidState);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((StateParam{0.5, inf, 0.0}.validate()), InvalidState);
}

TEST_CASE("purification reduces to the state") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        StateParam p{u(rng), u(rng) * std::numbers::pi,
                     u(rng) * 2.0 * std::numbers::pi};
        Vector4 psi = purify(p);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
        Matrix joint = Matrix(psi * psi.adjoint());
        Matrix2 sys = partial_trace(joint, Subsystem::Second);
        CHECK((Matrix(sys) - state_from_params(p).mat()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("partial trace of a Bell state") {
    Vector4 bell;
    bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    Matrix rho = Matrix(bell * bell.adjoint());
    Matrix2 a = partial_trace(rho, Subsystem::Second);
    Matrix2 b = partial_trace(rho, Subsystem::First);
    CHECK((Matrix(a) - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((Matrix(b) - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(von_neumann_entropy(DensityMatrix(rho)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(von_neumann_entropy(DensityMatrix(Matrix(a))) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("state fidelity") {
    std::mt19937_64 rng(9);
    DensityMatrix a = test::random_density(2, rng);
    CHECK(state_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    DensityMatrix h{(Matrix(2, 2) << 1, 0, 0, 0).finished()};
    DensityMatrix v{(Matrix(2, 2) << 0, 0, 0, 1).finished()};
    CHECK(state_fidelity(h, v) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("closed-form 2x2 eigenvalues") {
    auto [hi, lo] = eigvals_hermitian_2x2(0.7, 0.3, 0.1);
    CHECK(hi == doctest::Approx(0.72360679775).epsilon(1e-10));
    CHECK(lo == doctest::Approx(0.27639320225).epsilon(1e-10));
    std::mt19937_64 rng(12);
    for (int i = 0; i < 30; ++i) {
        DensityMatrix r = test::random_density(2, rng);
        auto [a, b] = eigvals_hermitian_2x2(r.mat()(0, 0).real(), r.mat()(1, 1).real(),
                                            std::abs(r.mat()(0, 1)));
        auto ev = hermitian_eigenvalues(r.mat());
        CHECK(a == doctest::Approx(ev[1]).epsilon(1e-9));
        CHECK(b == doctest::Approx(ev[0]).epsilon(1e-9));
    }
}
