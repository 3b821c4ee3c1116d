#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lab/oscillator.hpp"

using namespace lab;

namespace {
const SpectralData& quartic_mu2() {
    static SpectralData sd = build_spectrum({2.0, 6.0, 1200, 64});
    return sd;
}
}  // namespace

TEST_CASE("harmonic test hook reproduces the integers") {
    OscillatorSpec spec{0.0, 8.0, 800, 12};
    spec.harmonic_test_potential = true;
    SpectralData sd = build_spectrum(spec);
    for (int k = 0; k < 10; ++k)
        CHECK(std::fabs(sd.lambdas[k] - k) < 1e-6);
}

TEST_CASE("constant shift of V is absorbed by v_shift") {
    OscillatorSpec a{1.0, 6.0, 400, 8};
    OscillatorSpec b = a;
    b.extra_constant = 2.5;
    SpectralData sa = build_spectrum(a);
    SpectralData sb = build_spectrum(b);
    CHECK(sb.v_shift == doctest::Approx(sa.v_shift - 2.5).epsilon(1e-10));
    for (int k = 0; k < 8; ++k)
        CHECK(sb.lambdas[k] == doctest::Approx(sa.lambdas[k]).epsilon(1e-10));
    CHECK(std::fabs(sa.lambdas[0]) < 1e-9);
    CHECK(std::fabs(sb.lambdas[0]) < 1e-9);
}

TEST_CASE("mu=0 quartic lambda_1 regression") {
    // frozen from an independent doubled-resolution solve (y_max 7, m 2400)
    SpectralData sd = build_spectrum({0.0, 6.0, 1200, 4});
    CHECK(std::fabs(sd.lambdas[1] - 1.369655469666) < 1e-8);
}

TEST_CASE("orthonormality and simplicity") {
    const SpectralData& sd = quartic_mu2();
    const int K = sd.n_eigs();
    double worst = 0.0;
    for (int j = 0; j < K; ++j)
        for (int k = j; k < K; ++k) {
            double ip = sd.grid.h * sd.psis.col(j).dot(sd.psis.col(k));
            worst = std::max(worst, std::fabs(ip - (j == k ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-8);
    for (int k = 0; k + 1 < K; ++k) CHECK(sd.lambdas[k + 1] > sd.lambdas[k]);
    CHECK(sd.lambdas[1] > 0.0);
    // psi_0 strictly positive wherever it is above the underflow floor;
    // boundary entries are eigensolver noise at the ~1e-13 level
    const double mx = sd.psis.col(0).maxCoeff();
    for (int i = 0; i < sd.grid.m; ++i)
        if (std::fabs(sd.psis(i, 0)) > 1e-13 * mx) CHECK(sd.psis(i, 0) > 0.0);
    CHECK(sd.psis.col(0).minCoeff() > -1e-10 * mx);
}

TEST_CASE("heat kernel: eigenrelation, symmetry, semigroup, positivity") {
    const SpectralData& sd = quartic_mu2();
    const double h = sd.grid.h;
    Eigen::VectorXd psi0 = sd.psis.col(0);

    for (double t : {0.05, 1.0, 20.0}) {
        Eigen::MatrixXd K = heat_kernel(sd, t);
        CHECK(std::fabs(h * h * psi0.dot(K * psi0) - 1.0) < 1e-10);
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    }

    Eigen::MatrixXd Ks = heat_kernel(sd, 0.4), Kt = heat_kernel(sd, 0.7);
    Eigen::MatrixXd Kst = heat_kernel(sd, 1.1);
    CHECK((Kst - Ks * h * Kt).cwiseAbs().maxCoeff() < 1e-8);

    for (double t = 0.01; t <= 100.0; t *= 4.6416) {  // log sweep [1e-2, 1e2]
        Eigen::MatrixXd K = heat_kernel(sd, t);
        double tau = heat_kernel_truncation(sd, t);
        CHECK(K.minCoeff() >= -(3.0 * tau + 1e-10));
    }
}

TEST_CASE("long-time rank-one collapse at rate lambda_1") {
    const SpectralData& sd = quartic_mu2();
    Eigen::MatrixXd P0 = sd.psis.col(0) * sd.psis.col(0).transpose();
    // Frobenius distance decays like e^{-lambda_1 t}; fit the log slope
    std::vector<double> ts = {1.0, 1.5, 2.0, 2.5, 3.0};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : ts) {
        double d = (heat_kernel(sd, t) - P0).norm() * sd.grid.h;
        sx += t;
        sy += std::log(d);
        sxx += t * t;
        sxy += t * std::log(d);
    }
    double n = (double)ts.size();
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::fabs(-slope - sd.lambda1()) / sd.lambda1() < 0.05);
}

TEST_CASE("drift: odd, zero at origin, matches the doubled-resolution oracle") {
    const SpectralData& sd = quartic_mu2();
    DriftData d = drift(sd);
    CHECK(std::fabs(drift_series(sd, 0.0)) < 1e-8);
    for (double y : {0.3, 0.9, 1.7})
        CHECK(std::fabs(drift_series(sd, y) + drift_series(sd, -y)) < 1e-8);
    // trend b(y) + y^2 - mu/2 -> 0 within the trusted window (the residual
    // carries a -1/y WKB tail, so only the monotone decay is asserted)
    double prev = 1e9;
    for (double y : {1.0, 2.0, 3.0, 4.0}) {
        double r = std::fabs(drift_series(sd, y) + y * y - 1.0);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 0.3);
    // frozen doubled-resolution oracle value (y_max 6, m 2400): b(0.7)
    CHECK(std::fabs(drift_series(sd, 0.7) - (-0.303945018868)) < 1e-6);
    // tabulated drift agrees with the series evaluation to interpolation error
    CHECK(std::fabs(d.at(sd.grid, 0.7) - drift_series(sd, 0.7)) < 5e-5);
}

TEST_CASE("covariance oracle consistency at x = 0") {
    const SpectralData& sd = quartic_mu2();
    // sum_k <y psi0, psi_k>^2 at x=0 is Var q(0) up to mode truncation
    CHECK(covariance_oracle(sd, 0.0) ==
          doctest::Approx(stationary_variance(sd)).epsilon(1e-6));
    CHECK(covariance_oracle(sd, 2.0) < covariance_oracle(sd, 1.0));
}

TEST_CASE("spectrum serialization round trip") {
    SpectralData sd = build_spectrum({1.5, 6.0, 300, 12});
    auto dir = std::filesystem::temp_directory_path() / "lab_spec_io";
    std::filesystem::create_directories(dir);
    std::string prefix = (dir / "spec").string();
    save_spectrum(sd, prefix);
    SpectralData back = load_spectrum(prefix);
    CHECK(back.spec.mu == sd.spec.mu);
    CHECK(back.lambdas.size() == sd.lambdas.size());
    CHECK((back.psis - sd.psis).cwiseAbs().maxCoeff() == 0.0);  // bit-exact
    CHECK(back.v_shift == sd.v_shift);
}

TEST_CASE("boundary leakage guard triggers on a too-small box") {
    OscillatorSpec bad{0.0, 2.0, 200, 8};  // quartic ground state leaks at |y|=2
    CHECK_THROWS(build_spectrum(bad));
}
