#include <doctest.h>

#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "fiberchan/channel.hpp"
#include "test_util.hpp"

using namespace fiberchan;

namespace {

// Independent fixed-step Simpson oracle for the spectral average of
// e^{i k omega}.
cd spectral_average_oracle(double k, const SpectralProfile& s) {
    const int n = 20000;  // even
    const double a = s.omega0 - 6.0 * s.sigma, b = s.omega0 + 6.0 * s.sigma;
    const double h = (b - a) / n;
    cd acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = a + i * h;
        const double coeff = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += coeff * s.density(w) * std::exp(cd(0.0, k * w));
    }
    return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("pauli basis") {
    const auto& p = pauli_basis();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const cd tr = (p[i].adjoint() * p[j]).trace();
            CHECK(std::abs(tr - (i == j ? cd(2.0) : cd(0.0))) < 1e-14);
        }
}

TEST_CASE("chi validation ladder") {
    CHECK_NOTHROW(ChiMatrix::identity());
    Matrix4 m = Matrix4::Zero();
    m(0, 0) = 2.0;  // trace 2
    CHECK_THROWS_AS((ChiMatrix{m}), InvalidChannel);
    m.setZero();
    m(0, 0) = 1.5;
    m(3, 3) = -0.5;  // negative eigenvalue
    CHECK_THROWS_AS((ChiMatrix{m}), InvalidChannel);
    // Hermitian PSD unit trace but not TP: chi = |X><X| mixed asymmetrically
    m.setZero();
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = 0.5;
    m(1, 0) = 0.5;  // (I + X)/sqrt(2) direction, not TP
    CHECK_THROWS_AS((ChiMatrix{m}), InvalidChannel);
    CHECK_NOTHROW(ChiMatrix(m, /*require_tp=*/false));
}

TEST_CASE("kraus round trips on random channels") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 25; ++i) {
        ChiMatrix chi = test::random_cptp_chi(rng);
        CHECK(is_cptp(chi).pass);
        KrausSet k = kraus_from_chi(chi);
        CHECK(k.completeness_defect() < 1e-9);
        ChiMatrix back = chi_from_kraus(k);
        CHECK((back.mat() - chi.mat()).cwiseAbs().maxCoeff() < 1e-9);
        // apply_chi agrees with direct Kraus application
        DensityMatrix rho = test::random_density(2, rng);
        Matrix2 via_chi = apply_chi(chi, Matrix2(rho.mat()));
        Matrix2 via_kraus = test::apply_kraus(k, Matrix2(rho.mat()));
        CHECK((via_chi - via_kraus).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("composition equals sequential application") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 10; ++i) {
        ChiMatrix e1 = test::random_cptp_chi(rng);
        ChiMatrix e2 = test::random_cptp_chi(rng);
        ChiMatrix both = compose_channels(e1, e2);
        DensityMatrix rho = test::random_density(2, rng);
        Matrix2 seq = apply_chi(e2, apply_chi(e1, Matrix2(rho.mat())));
        Matrix2 once = apply_chi(both, Matrix2(rho.mat()));
        CHECK((seq - once).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("dephasing channel shrinks the off-diagonal by gamma") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const cd gamma = std::polar(u(rng), 2.0 * std::numbers::pi * u(rng));
        ChiMatrix chi = dephasing_channel(gamma, PauliAxis::Z);
        CHECK(is_cptp(chi).pass);
        DensityMatrix rho = test::random_density(2, rng);
        Matrix2 out = apply_chi(chi, Matrix2(rho.mat()));
        CHECK(std::abs(out(0, 0) - rho.mat()(0, 0)) < 1e-12);
        CHECK(std::abs(out(1, 1) - rho.mat()(1, 1)) < 1e-12);
        CHECK(std::abs(out(0, 1) - gamma * rho.mat()(0, 1)) < 1e-12);
    }
    // X axis: |D>,|A| basis off-diagonal scales; Z populations mix
    ChiMatrix x = dephasing_channel(0.0, PauliAxis::X);
    Matrix2 h;
    h << 1, 0, 0, 0;
    Matrix2 out = apply_chi(x, h);
    CHECK(std::abs(out(0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(out(1, 1) - 0.5) < 1e-12);
    CHECK_THROWS_AS(dephasing_channel(cd(1.5, 0.0), PauliAxis::Z), InvalidChannel);
}

TEST_CASE("channel mixing") {
    ChiMatrix id = ChiMatrix::identity();
    ChiMatrix deph = dephasing_channel(0.0, PauliAxis::Z);
    ChiMatrix mix = mix_channels({{0.5, id}, {0.5, deph}});
    // Mixture of identity and complete dephasing = gamma 0.5 dephasing
    ChiMatrix expect = dephasing_channel(0.5, PauliAxis::Z);
    CHECK((mix.mat() - expect.mat()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(mix_channels({{0.7, id}, {0.7, deph}}), InvalidChannel);
}

TEST_CASE("fiber arithmetic matches the published scales") {
    FiberParams f{120.0, 3.5e-4};
    CHECK(kappa(f) == doctest::Approx(1.40097e-10).epsilon(1e-4));
    const double coh = coherence_length_um(800.0, 3.0);
    CHECK(coh == doctest::Approx(213.333).epsilon(1e-3));
    CHECK(decoherence_fiber_length_m(coh, 3.5e-4) ==
          doctest::Approx(0.60952).epsilon(1e-3));
    FiberParams dec{0.6095, 3.5e-4};
    CHECK(kappa(dec) == doctest::Approx(7.115e-13).epsilon(1e-3));
    CHECK_THROWS_AS(FiberParams(-1.0, 3.5e-4).validate(), InvalidChannel);
}

TEST_CASE("spectral profile normalization and moments") {
    SpectralProfile s = SpectralProfile::from_filter(800.0, 3.0);
    CHECK(s.omega0 == doctest::Approx(2.0 * std::numbers::pi * kSpeedOfLight / 800e-9)
                          .epsilon(1e-12));
    // sigma reproduces the intensity FWHM = filter bandwidth
    const double dw = 2.0 * std::numbers::pi * kSpeedOfLight * 3e-9 / (800e-9 * 800e-9);
    CHECK(s.density(s.omega0 + dw / 2.0) / s.density(s.omega0) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // unit integral
    CHECK(std::abs(spectral_average_oracle(0.0, s) - cd(1.0)) < 1e-10);
}

TEST_CASE("gaussian coherence matches quadrature") {
    SpectralProfile s = SpectralProfile::from_filter(800.0, 3.0);
    for (double k : {0.0, 1e-16, 5e-15, 2e-14, 1e-13, 5e-13}) {
        const cd closed = gaussian_coherence(k, s);
        const cd numeric = spectral_average_oracle(k, s);
        CHECK(std::abs(closed - numeric) < 1e-8);
    }
}

TEST_CASE("single fiber gamma magnitude and decoherence point") {
    SpectralProfile s = SpectralProfile::from_filter(800.0, 3.0);
    // At the decoherence length the magnitude is substantially suppressed
    CoherenceFactor dec = single_fiber_gamma(FiberParams{0.6095, 3.5e-4}, s);
    CHECK(std::abs(dec.gamma) < 0.12);
    CHECK(std::abs(dec.gamma) > 1e-4);
    // 120 m is completely dephased
    CoherenceFactor lng = single_fiber_gamma(FiberParams{120.0, 3.5e-4}, s);
    CHECK(std::abs(lng.gamma) < 1e-6);
    // short fiber keeps coherence
    CoherenceFactor shrt = single_fiber_gamma(FiberParams{0.05, 3.5e-4}, s);
    CHECK(std::abs(shrt.gamma) > 0.9);
    // matches the quadrature oracle
    const cd oracle = spectral_average_oracle(kappa(FiberParams{0.3, 3.5e-4}), s);
    CoherenceFactor mid = single_fiber_gamma(FiberParams{0.3, 3.5e-4}, s);
    CHECK(std::abs(mid.gamma - oracle) < 1e-8);
}

TEST_CASE("chi json round trip") {
    std::mt19937_64 rng(31);
    ChiMatrix chi = test::random_cptp_chi(rng);
    nlohmann::json j = chi_to_json(chi);
    CHECK(j.at("basis") == nlohmann::json::array({"I", "X", "Y", "Z"}));
    ChiMatrix back = chi_from_json(j);
    CHECK((back.mat() - chi.mat()).cwiseAbs().maxCoeff() < 1e-12);
}
