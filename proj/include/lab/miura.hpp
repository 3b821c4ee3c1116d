#pragma once

#include <vector>

#include "lab/dirac.hpp"
#include "lab/flows.hpp"
#include "lab/grid.hpp"
#include "lab/rng.hpp"

namespace lab {

/// w = q' + q^2 (spectral derivative, dealiased square).
struct KdvField {
    TorusGrid grid;
    std::vector<double> values;
};
KdvField miura(const LatticeField& q);

/// Diagonal Green's functions of the factored Schrodinger operators:
/// gs_pm = (1 + gamma +- g+) / (2 kappa); gs_plus > 0 pointwise.
struct SchrodingerDiag {
    double kappa = 0.0;
    std::vector<double> gs_plus, gs_minus;
};
SchrodingerDiag schrodinger_diag(const DiagGreens& dg);

/// Smallest eigenvalue of -d^2 + w on the torus (spectral Laplacian,
/// dense symmetric eigensolve).
double hplus_ground_energy(const KdvField& w);

/// Residual of the KdV green-solution identity along a trajectory:
///   gs(t2) - gs(t1) - int { 2 gs'' - 6 w gs - 12 k^2 gs }' dt,
/// with w*gs evaluated as (q gs)' - q gs' + q^2 gs so no rough field is
/// squared.  Paired against band-limited test functions in H^{-2} style.
GreenResidualReport kdv_green_residual(const FlowTrajectory& traj, double kappa,
                                       const std::vector<std::vector<double>>& testfns);

/// White-noise discrimination battery for an ensemble of Miura images.
struct WhitenoiseReport {
    int samples = 0;
    int certificate_violations = 0;  // < phi^2, w >  >=  -||phi'||^2 failures
    int wn_certificate_violations = 0;  // same event under matched white noise
    double grad_norm_sq = 0.0;       // ||phi'||_{L2}^2
    double phi4_norm = 0.0;          // ||phi||_{L4}^4
    double lambda = 0.0;
    double miura_log_avg = 0.0;      // log E exp(-lambda <phi^2, w>)
    double miura_log_se = 0.0;
    double miura_log_bound = 0.0;    // lambda ||phi'||^2 (certificate bound)
    double wn_log_avg = 0.0;         // matched white-noise ensemble
    double wn_log_se = 0.0;          // standard error of the log average
    double wn_log_predicted = 0.0;   // lambda^2 ||phi||_4^4 / 2
    bool separated = false;          // laws separate at 3 joint SE
};
WhitenoiseReport whitenoise_discriminator(const std::vector<KdvField>& ws,
                                          const std::vector<double>& phi, double lambda,
                                          Rng& rng);

/// Injectivity probe on a truncated-line sample: I+- integrals in log space,
/// Cauchy-Schwarz floor I+ I- >= X^2 exact by construction.
struct InjectivityReport {
    double X = 0.0;
    double log_i_plus = 0.0;
    double log_i_minus = 0.0;
    double log_cs_floor = 0.0;  // 2 log X
    bool cauchy_schwarz_ok = false;
};
InjectivityReport injectivity_probe(const LatticeField& line_sample, double X);

}  // namespace lab
