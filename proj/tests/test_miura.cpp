#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lab/gibbs.hpp"
#include "lab/miura.hpp"

using namespace lab;
using lab::testing::constant_field;
using lab::testing::random_band_limited;

TEST_CASE("miura map on constants and the mean identity") {
    TorusGrid grid(M_PI, 256);
    {
        KdvField w = miura(LatticeField(grid, 0.0));
        for (double v : w.values) CHECK(v == 0.0);
    }
    {
        const double c = 1.3;
        KdvField w = miura(constant_field(grid, c));
        for (double v : w.values) CHECK(v == doctest::Approx(c * c).epsilon(1e-14));
    }
    Rng rng(41);
    LatticeField q = random_band_limited(grid, 20, 1.5, rng);
    KdvField w = miura(q);
    double sw = 0.0, sq2 = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        sw += w.values[i];
        sq2 += q.v[i] * q.v[i];
    }
    CHECK(std::fabs(sw - sq2) * grid.dx() < 1e-12 * (1.0 + sq2));
}

TEST_CASE("miura of a windowed kink is flat away from the seam") {
    const double a = 1.0;
    TorusGrid grid(60.0, 2048);
    LatticeField q(grid);
    for (int j = 0; j < grid.n; ++j) {
        double x = grid.x(j);
        double window = 0.5 * (std::tanh((x + 40.0) / 3.0) - std::tanh((x - 40.0) / 3.0));
        q.v[j] = a * std::tanh(a * x) * window;
    }
    KdvField w = miura(q);
    double worst = 0.0;
    for (int j = 0; j < grid.n; ++j)
        if (std::fabs(grid.x(j)) < 6.0)
            worst = std::max(worst, std::fabs(w.values[j] - a * a));
    CHECK(worst < 1e-8);
}

TEST_CASE("schrodinger diagonal: free, constant, definitional identity") {
    TorusGrid grid(M_PI, 256);
    const double kappa = 8.0;
    {
        DiagGreens dg = diag_greens_fixed_point(LatticeField(grid, 0.0), kappa);
        SchrodingerDiag s = schrodinger_diag(dg);
        for (int i = 0; i < grid.n; ++i) {
            CHECK(s.gs_plus[i] == doctest::Approx(1.0 / (2.0 * kappa)).epsilon(1e-12));
            CHECK(s.gs_minus[i] == doctest::Approx(1.0 / (2.0 * kappa)).epsilon(1e-12));
        }
    }
    {
        const double c = 1.4, srt = std::sqrt(kappa * kappa + c * c);
        DiagGreens dg = diag_greens_fixed_point(constant_field(grid, c), kappa);
        SchrodingerDiag s = schrodinger_diag(dg);
        for (int i = 0; i < grid.n; i += 17) {
            CHECK(std::fabs(s.gs_plus[i] - 1.0 / (2.0 * srt)) < 1e-9);
            CHECK(std::fabs(s.gs_minus[i] - 1.0 / (2.0 * srt)) < 1e-9);
        }
    }
    Rng rng(43);
    LatticeField q = random_band_limited(grid, 16, 1.5, rng);
    DiagGreens dg = diag_greens_fixed_point(q, kappa);
    SchrodingerDiag s = schrodinger_diag(dg);
    double worst = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        worst = std::max(worst, std::fabs(2.0 * kappa * s.gs_plus[i] - 1.0 - dg.gamma[i] -
                                          dg.gplus[i]));
        CHECK(s.gs_plus[i] > 0.0);
    }
    CHECK(worst < 1e-14);
}

TEST_CASE("H+ ground energy: free, constant, Miura images") {
    TorusGrid grid(2.0, 128);
    {
        KdvField w;
        w.grid = grid;
        w.values.assign(grid.n, 0.0);
        CHECK(std::fabs(hplus_ground_energy(w)) < 1e-10);
    }
    {
        const double c = 1.1;
        KdvField w = miura(constant_field(grid, c));
        CHECK(hplus_ground_energy(w) == doctest::Approx(c * c).epsilon(1e-10));
    }
    Rng rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        LatticeField q = random_band_limited(grid, 20, 2.0, rng);
        KdvField w = miura(q);
        double winf = 0.0;
        for (double v : w.values) winf = std::max(winf, std::fabs(v));
        CHECK(hplus_ground_energy(w) >= -1e-6 * (1.0 + winf));
    }
}

TEST_CASE("kdv green residual: constant trajectory exact, smooth mkdv small") {
    TorusGrid grid(M_PI, 256);
    std::vector<std::vector<double>> testfns;
    LatticeField bump(grid);
    for (int j = 0; j < grid.n; ++j) bump.v[j] = std::exp(-2.0 * grid.x(j) * grid.x(j));
    testfns.push_back(fft::band_limit(bump.v, 40));

    FlowOptions fo;
    fo.ledger_stride = 1 << 20;
    {
        FlowTrajectory tr = run_mkdv_flow(constant_field(grid, 0.8), 1e-3, 20, fo);
        GreenResidualReport rep = kdv_green_residual(tr, 8.0, testfns);
        CHECK(rep.residual_gminus < 1e-12);
    }
    Rng rng(49);
    LatticeField q0 = random_band_limited(grid, 10, 0.8, rng);
    FlowTrajectory tr = run_mkdv_flow(q0, 1e-3, 50, fo);
    GreenResidualReport rep = kdv_green_residual(tr, 8.0, testfns);
    CHECK(rep.residual_gminus < 1e-5);
}

TEST_CASE("white-noise discrimination on smooth-field Miura images") {
    // a wide gentle bump keeps ||phi'||^2 inside the Gaussian bulk, so the
    // matched white noise violates the certificate while Miura images cannot
    TorusGrid grid(8.0, 256);
    Rng rng(51);
    std::vector<KdvField> ws;
    for (int i = 0; i < 4000; ++i)
        ws.push_back(miura(random_band_limited(grid, 24, 1.8, rng)));
    LatticeField bump(grid);
    for (int j = 0; j < grid.n; ++j) {
        double x = grid.x(j);
        bump.v[j] = std::exp(-x * x / (2.0 * 1.2 * 1.2));
    }
    std::vector<double> phi = fft::band_limit(bump.v, 24);
    Rng wn(52);
    WhitenoiseReport rep = whitenoise_discriminator(ws, phi, 1.5, wn);
    CHECK(rep.certificate_violations == 0);
    CHECK(rep.wn_certificate_violations > 100);  // Gaussians cross the bound freely
    CHECK(std::fabs(rep.wn_log_avg - rep.wn_log_predicted) < 3.0 * rep.wn_log_se);
    CHECK(rep.separated);
    CHECK(rep.miura_log_avg <= rep.miura_log_bound + 1e-12);

    // phi == 0 is the vacuous case: both exponential averages are exactly 1
    WhitenoiseReport zero = whitenoise_discriminator(ws, std::vector<double>(grid.n, 0.0), 1.5, wn);
    CHECK(zero.miura_log_avg == 0.0);
    CHECK(zero.wn_log_avg == 0.0);
}

TEST_CASE("injectivity probe: equality case and exponential asymmetry") {
    TorusGrid grid;
    {
        LatticeField z;
        z.periodic = false;
        z.grid.L = 16.0;
        z.grid.n = 512;  // dx = 1/16
        z.v.assign(512, 0.0);
        InjectivityReport rep = injectivity_probe(z, 8.0);
        CHECK(std::fabs(rep.log_i_plus - std::log(8.0)) < 1e-12);
        CHECK(std::fabs(rep.log_i_minus - std::log(8.0)) < 1e-12);
        CHECK(rep.cauchy_schwarz_ok);
        CHECK(std::fabs(rep.log_i_plus + rep.log_i_minus - rep.log_cs_floor) < 1e-12);
    }
    {
        const double c = 0.5, X = 8.0;
        LatticeField f;
        f.periodic = false;
        f.grid.L = 16.0;
        f.grid.n = 2048;  // dx = 1/64
        f.v.assign(2048, c);
        InjectivityReport rep = injectivity_probe(f, X);
        double iplus_exact = (1.0 - std::exp(-2.0 * c * X)) / (2.0 * c);
        CHECK(std::fabs(std::exp(rep.log_i_plus) - iplus_exact) / iplus_exact < 1e-3);
        CHECK(rep.log_i_minus > 2.0 * c * X - std::log(2.0 * c) - 0.1);  // exponential growth
        CHECK(rep.cauchy_schwarz_ok);
    }
}

TEST_CASE("gibbs miura images: certificate and superlinear growth probe") {
    auto sd = std::make_shared<const SpectralData>(build_spectrum({2.0, 7.0, 600, 120}));
    InfiniteChainSampler chain(sd, 1.0 / 16.0);
    Rng master(57);
    // growth of max(I+, I-) across X in {8, 16, 32} on the same sample
    int grew = 0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        Rng rng = master.split(r);
        LatticeField line = chain.sample(32 * 16 + 1, rng);
        double prev = -1e300;
        bool mono = true;
        for (double X : {8.0, 16.0, 32.0}) {
            InjectivityReport rep = injectivity_probe(line, X);
            REQUIRE(rep.cauchy_schwarz_ok);
            double mx = std::max(rep.log_i_plus, rep.log_i_minus);
            mono = mono && (mx > prev + std::log(1.5));  // superlinear: more than ~X growth
            prev = mx;
        }
        if (mono) ++grew;
    }
    CHECK(grew > reps / 2);
}
