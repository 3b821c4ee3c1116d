#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lab {

/// Value grid for the oscillator: m interior points of [-y_max, y_max],
/// Dirichlet truncation, trapezoid weight h on every interior node.
struct ValueGrid {
    double y_max = 6.0;
    int m = 0;
    double h = 0.0;
    std::vector<double> y;

    static ValueGrid make(double y_max, int m);
    int locate(double yv) const;  // cell index i with y[i] <= yv < y[i+1], clamped
};

struct OscillatorSpec {
    double mu = 0.0;
    double y_max = 6.0;
    int m = 1200;
    int n_eigs = 64;
    /// Test hook: replace the quartic well by the shifted harmonic well.
    bool harmonic_test_potential = false;
    /// Constant added to V before the lambda_0 shift (gauge-shift tests).
    double extra_constant = 0.0;

    void validate() const;
    double potential(double y) const;  // V without the computed V0 shift
};

struct SpectralData {
    OscillatorSpec spec;
    ValueGrid grid;
    std::vector<double> lambdas;  // shifted: lambdas[0] == 0
    Eigen::MatrixXd psis;         // m x n_eigs, L^2(h)-normalized columns
    double v_shift = 0.0;         // computed V0 (= -lowest raw eigenvalue)
    double boundary_leak = 0.0;   // max |psi_k| at the outermost grid nodes

    int n_eigs() const { return (int)lambdas.size(); }
    double lambda1() const { return lambdas.at(1); }
    /// psi_0 evaluated by linear interpolation (0 outside the grid).
    double psi0(double yv) const;
};

/// Dense sine-collocation discretization of L = -1/2 d^2/dy^2 + V, shifted
/// so lambda_0 = 0.  Throws on boundary leakage or failed eigensolve.
SpectralData build_spectrum(const OscillatorSpec& spec);

/// K_t(y_i, y_j) = sum_k e^{-lambda_k t} psi_k(y_i) psi_k(y_j); values of the
/// continuum kernel, so operator composition is K_s * diag(h) * K_t.
Eigen::MatrixXd heat_kernel(const SpectralData& sd, double t);

/// Empirical truncation bound for heat_kernel at time t: sup-norm distance
/// between the full retention and half retention, geometrically extended.
double heat_kernel_truncation(const SpectralData& sd, double t);

/// Drift b = psi_0'/psi_0 on the trusted window (|psi_0| above underflow);
/// entries outside the window are NaN.
struct DriftData {
    std::vector<double> b;
    int window_lo = 0, window_hi = 0;  // inclusive index range of trusted values
    double at(const ValueGrid& g, double yv) const;  // linear interp, throws outside
};
DriftData drift(const SpectralData& sd);

/// Spectral (sine-series) evaluation of psi_0 and of b = psi_0'/psi_0 at an
/// arbitrary point; exact for the discrete eigenvector, no interpolation bias.
double psi0_series(const SpectralData& sd, double yv);
double drift_series(const SpectralData& sd, double yv);

/// Spectral-sum covariance oracle E[q(0)q(x)] = <y psi0, e^{-xL} y psi0>.
double covariance_oracle(const SpectralData& sd, double x);
/// Stationary variance  Var q(0) = int y^2 psi0^2 dy.
double stationary_variance(const SpectralData& sd);

/// Versioned JSON + little-endian binary sidecar (grid, lambdas, psis).
void save_spectrum(const SpectralData& sd, const std::string& path_prefix);
SpectralData load_spectrum(const std::string& path_prefix);

}  // namespace lab
