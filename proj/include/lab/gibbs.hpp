#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <memory>
#include <vector>

#include "lab/grid.hpp"
#include "lab/oscillator.hpp"
#include "lab/rng.hpp"

namespace lab {

struct ChainSpec {
    double spacing = 0.0;  // lattice step, used as heat-kernel time (<= 1)
    uint64_t seed = 0;
    int refinement_depth = 0;  // bridge bisection levels (periodic sampler)

    void validate() const;
};

/// Tabulated 1-D density on the oscillator value grid.  Sampling uses the
/// linearly interpolated CDF (piecewise-constant density on cells centered
/// at the nodes); value_at uses the same cell-constant convention so that
/// coupling probabilities are exact for the tabulated law.
class TabulatedDensity {
public:
    TabulatedDensity() = default;
    TabulatedDensity(const ValueGrid& grid, std::vector<double> node_values);

    double draw(Rng& rng) const;
    double value_at(double yv) const;
    double cdf_at(double yv) const;
    double total_mass() const { return mass_; }  // before normalization
    const std::vector<double>& node_values() const { return d_; }
    const ValueGrid& grid() const { return *grid_; }

private:
    const ValueGrid* grid_ = nullptr;
    std::vector<double> d_;    // normalized node densities
    std::vector<double> cdf_;  // cdf_[i] = h * sum_{j<=i} d_[j], ends at 1
    double mass_ = 0.0;
};

/// Markov chain with the exact finite marginals of the infinite-volume Gibbs
/// law: initial density psi_0^2, transition p(y,y') = K_d(y,y') psi0(y')/psi0(y).
class InfiniteChainSampler {
public:
    InfiniteChainSampler(std::shared_ptr<const SpectralData> sd, double spacing);

    /// Line sample (q(0), q(d), ..., q((n-1)d)); field.periodic = false.
    LatticeField sample(int n_sites, Rng& rng) const;

    double spacing() const { return spacing_; }
    /// Worst |signed row sum - 1| (grid-leakage check; exact to roundoff).
    double row_sum_defect() const { return row_defect_; }
    /// Worst clipped negative mass per row (retained-mode truncation).
    double clipped_mass() const { return clipped_mass_; }
    const SpectralData& spectral() const { return *sd_; }
    /// Stationary single-site density psi_0^2 (tabulated).
    const TabulatedDensity& stationary() const { return stationary_; }

private:
    double draw_transition(double y_from, Rng& rng) const;

    std::shared_ptr<const SpectralData> sd_;
    double spacing_;
    double row_defect_ = 0.0;
    double clipped_mass_ = 0.0;
    Eigen::MatrixXd row_cdf_;  // m x m, row i = CDF of p(y_i, .)
    TabulatedDensity stationary_;
    friend class SdeSampler;
};

/// Exact periodic sampler: endpoint from diag(K_{2L})/Z_L, interior by
/// recursive midpoint bridging with the dyadic heat-kernel stack.
class PeriodicSampler {
public:
    PeriodicSampler(std::shared_ptr<const SpectralData> sd, double L, int n_sites);

    LatticeField sample(Rng& rng) const;

    double truncation_bound() const { return trunc_bound_; }  // e^{-2L lambda_K}
    int retry_count() const { return retries_->load(); }
    const SpectralData& spectral() const { return *sd_; }
    const TorusGrid& grid() const { return grid_; }
    const ChainSpec& chain_spec() const { return chain_spec_; }
    /// Single-site marginal diag(K_{2L})/Z_L (transfer-operator evaluation).
    const TabulatedDensity& site_marginal() const { return endpoint_; }

private:
    bool bridge_fill(std::vector<double>& q, int lo, int hi, int level, Rng& rng) const;
    std::vector<double> kernel_row(int level, double ya) const;  // interp K_h(ya, .)

    std::shared_ptr<const SpectralData> sd_;
    TorusGrid grid_;
    int depth_;
    ChainSpec chain_spec_;
    std::vector<Eigen::MatrixXd> kernels_;  // K at widths L, L/2, ..., dx
    TabulatedDensity endpoint_;
    double trunc_bound_ = 0.0;
    // shared counter keeps the sampler movable and the tally thread safe
    std::shared_ptr<std::atomic<int>> retries_ = std::make_shared<std::atomic<int>>(0);
};

/// Euler-Maruyama path of dq = b(q) dx + dB started from psi_0^2.
struct SdePath {
    double dx = 0.0;
    std::vector<double> q;
    int reflections = 0;  // times the path left the trusted drift window
};
SdePath sample_sde(const SpectralData& sd, const DriftData& drift, double x_max,
                   double dx, Rng& rng);

/// Maximal coupling: given X = x_draw distributed as f_x, return Y with law
/// f_y such that P(X != Y) = 1/2 ||f_x - f_y||_1 and Y == X exactly whenever
/// the acceptance test u f_x(X) <= min(f_x, f_y)(X) passes.
struct CoupleResult {
    double y;
    bool identical;
};
CoupleResult maximal_couple(const TabulatedDensity& f_x, const TabulatedDensity& f_y,
                            double x_draw, Rng& rng);

/// 1/2 ||f_x - f_y||_1 for tabulated densities on a shared grid.
double total_variation(const TabulatedDensity& f_x, const TabulatedDensity& f_y);

}  // namespace lab
