#include "lab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lab {

void ChainSpec::validate() const {
    if (!(spacing > 0.0 && spacing <= 1.0))
        throw std::invalid_argument("ChainSpec: spacing in (0, 1] (short-time kernel regime)");
    if (refinement_depth < 0) throw std::invalid_argument("ChainSpec: refinement_depth >= 0");
}

// ---- TabulatedDensity ------------------------------------------------------

TabulatedDensity::TabulatedDensity(const ValueGrid& grid, std::vector<double> node_values)
    : grid_(&grid), d_(std::move(node_values)) {
    if ((int)d_.size() != grid.m) throw std::invalid_argument("TabulatedDensity: size mismatch");
    double s = 0.0;
    for (double v : d_) {
        if (v < 0.0) {
            if (v < -1e-12) throw std::invalid_argument("TabulatedDensity: negative density");
            v = 0.0;
        }
        s += v;
    }
    mass_ = s * grid.h;
    if (!(mass_ > 0.0)) throw std::invalid_argument("TabulatedDensity: zero mass");
    cdf_.resize(d_.size());
    double acc = 0.0;
    for (size_t i = 0; i < d_.size(); ++i) {
        d_[i] = std::max(0.0, d_[i]) / mass_;
        acc += d_[i] * grid.h;
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

double TabulatedDensity::draw(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    size_t i = it - cdf_.begin();
    if (i >= d_.size()) i = d_.size() - 1;
    double lo_cdf = (i == 0) ? 0.0 : cdf_[i - 1];
    double frac = (cdf_[i] > lo_cdf) ? (u - lo_cdf) / (cdf_[i] - lo_cdf) : 0.5;
    // cell i is (y_i - h/2, y_i + h/2]
    return grid_->y[i] - 0.5 * grid_->h + frac * grid_->h;
}

double TabulatedDensity::value_at(double yv) const {
    if (yv < grid_->y.front() - 0.5 * grid_->h || yv > grid_->y.back() + 0.5 * grid_->h)
        return 0.0;
    int i = (int)std::lround((yv - grid_->y.front()) / grid_->h);
    i = std::clamp(i, 0, grid_->m - 1);
    return d_[i];
}

double TabulatedDensity::cdf_at(double yv) const {
    if (yv < grid_->y.front() - 0.5 * grid_->h) return 0.0;
    if (yv > grid_->y.back() + 0.5 * grid_->h) return 1.0;
    int i = (int)std::floor((yv - (grid_->y.front() - 0.5 * grid_->h)) / grid_->h);
    i = std::clamp(i, 0, grid_->m - 1);
    double cell_lo = grid_->y[i] - 0.5 * grid_->h;
    double lo_cdf = (i == 0) ? 0.0 : cdf_[i - 1];
    return lo_cdf + d_[i] * std::clamp(yv - cell_lo, 0.0, grid_->h);
}

// ---- InfiniteChainSampler --------------------------------------------------

InfiniteChainSampler::InfiniteChainSampler(std::shared_ptr<const SpectralData> sd, double spacing)
    : sd_(std::move(sd)), spacing_(spacing) {
    ChainSpec cs;
    cs.spacing = spacing;
    cs.validate();  // short-time kernel regime: 0 < spacing <= 1
    const auto& g = sd_->grid;
    const int m = g.m;
    Eigen::MatrixXd K = heat_kernel(*sd_, spacing_);
    row_cdf_.resize(m, m);
    double worst = 0.0;
    // states with psi_0 below the roundoff floor of the spectral sum are
    // unreachable (stationary weight < 1e-12); the eigen-sum noise would
    // otherwise swamp their rows, so they simply hold the chain in place
    const double floor = 1e-6 * sd_->psis.col(0).maxCoeff();
    double clipped = 0.0;
    for (int i = 0; i < m; ++i) {
        double psi_i = sd_->psis(i, 0);
        if (psi_i <= floor) {
            for (int j = 0; j < m; ++j) row_cdf_(i, j) = (j >= i) ? 1.0 : 0.0;
            continue;
        }
        // Chapman-Kolmogorov normalization: the signed row sum is exactly 1
        // by discrete orthogonality; grid leakage would break it.
        double signed_sum = 0.0, pos_sum = 0.0;
        for (int j = 0; j < m; ++j) {
            double p = K(i, j) * sd_->psis(j, 0) * g.h / psi_i;
            signed_sum += p;
            pos_sum += std::max(0.0, p);
            row_cdf_(i, j) = pos_sum;
        }
        worst = std::max(worst, std::fabs(signed_sum - 1.0));
        if (std::fabs(signed_sum - 1.0) > 1e-6)
            throw std::runtime_error("InfiniteChainSampler: transition row off by > 1e-6 (grid leakage)");
        // negative truncation lobes are clipped and the row renormalized;
        // the removed mass is a retained-mode truncation artifact
        clipped = std::max(clipped, pos_sum - signed_sum);
        for (int j = 0; j < m; ++j) row_cdf_(i, j) /= pos_sum;
    }
    row_defect_ = worst;
    clipped_mass_ = clipped;
    std::vector<double> p0(m);
    for (int i = 0; i < m; ++i) p0[i] = sd_->psis(i, 0) * sd_->psis(i, 0);
    stationary_ = TabulatedDensity(sd_->grid, std::move(p0));
}

double InfiniteChainSampler::draw_transition(double y_from, Rng& rng) const {
    const auto& g = sd_->grid;
    // mixture over the two adjacent grid rows reproduces the linearly
    // interpolated kernel exactly
    int i = g.locate(y_from);
    double theta = std::clamp((y_from - g.y[i]) / g.h, 0.0, 1.0);
    int row = (rng.uniform() < theta) ? i + 1 : i;
    double u = rng.uniform();
    int lo = 0, hi = g.m - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (row_cdf_(row, mid) < u)
            lo = mid + 1;
        else
            hi = mid;
    }
    int j = lo;
    double lo_cdf = (j == 0) ? 0.0 : row_cdf_(row, j - 1);
    double cell = row_cdf_(row, j) - lo_cdf;
    double frac = (cell > 0.0) ? (u - lo_cdf) / cell : 0.5;
    return g.y[j] - 0.5 * g.h + frac * g.h;
}

LatticeField InfiniteChainSampler::sample(int n_sites, Rng& rng) const {
    if (n_sites < 1) throw std::invalid_argument("sample: n_sites >= 1");
    LatticeField f;
    f.grid.n = n_sites;  // line sample starting at x = 0; L carries the spacing
    f.grid.L = 0.5 * spacing_ * n_sites;
    f.periodic = false;
    f.v.resize(n_sites);
    f.v[0] = stationary_.draw(rng);
    for (int j = 1; j < n_sites; ++j) f.v[j] = draw_transition(f.v[j - 1], rng);
    return f;
}

// ---- PeriodicSampler --------------------------------------------------------

PeriodicSampler::PeriodicSampler(std::shared_ptr<const SpectralData> sd, double L, int n_sites)
    : sd_(std::move(sd)), grid_(L, n_sites) {
    if (n_sites < 4 || (n_sites & (n_sites - 1)) != 0)
        throw std::invalid_argument("PeriodicSampler: n_sites must be a power of two >= 4");
    depth_ = 0;
    while ((1 << (depth_ + 1)) < n_sites) ++depth_;  // widths L .. dx
    chain_spec_.spacing = grid_.dx();
    chain_spec_.refinement_depth = depth_;
    chain_spec_.validate();
    kernels_.reserve(depth_ + 1);
    double h = L;
    for (int l = 0; l <= depth_; ++l) {
        kernels_.push_back(heat_kernel(*sd_, h));
        h *= 0.5;
    }
    const int m = sd_->grid.m;
    Eigen::MatrixXd K2L = heat_kernel(*sd_, 2.0 * L);
    std::vector<double> diag(m);
    for (int i = 0; i < m; ++i) diag[i] = std::max(0.0, K2L(i, i));
    endpoint_ = TabulatedDensity(sd_->grid, std::move(diag));
    trunc_bound_ = std::exp(-2.0 * L * sd_->lambdas.back());
}

std::vector<double> PeriodicSampler::kernel_row(int level, double ya) const {
    const auto& g = sd_->grid;
    const Eigen::MatrixXd& K = kernels_[level];
    int i = g.locate(ya);
    double t = std::clamp((ya - g.y[i]) / g.h, 0.0, 1.0);
    std::vector<double> row(g.m);
    for (int j = 0; j < g.m; ++j) row[j] = (1.0 - t) * K(i, j) + t * K(i + 1, j);
    return row;
}

bool PeriodicSampler::bridge_fill(std::vector<double>& q, int lo, int hi, int level,
                                  Rng& rng) const {
    if (hi - lo < 2) return true;
    const auto& g = sd_->grid;
    int mid = (lo + hi) / 2;
    std::vector<double> left = kernel_row(level, q[lo]);
    std::vector<double> right = kernel_row(level, q[hi % grid_.n]);
    double total = 0.0;
    for (int j = 0; j < g.m; ++j) {
        left[j] = std::max(0.0, left[j]) * std::max(0.0, right[j]);
        total += left[j];
    }
    if (!(total * g.h > 1e-300)) return false;  // deep-tail endpoints
    TabulatedDensity dens(g, std::move(left));
    q[mid] = dens.draw(rng);
    return bridge_fill(q, lo, mid, level + 1, rng) &&
           bridge_fill(q, mid, hi, level + 1, rng);
}

LatticeField PeriodicSampler::sample(Rng& rng) const {
    const int n = grid_.n;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<double> q(n, 0.0);
        q[0] = endpoint_.draw(rng);
        if (bridge_fill(q, 0, n, 0, rng)) {
            LatticeField f;
            f.grid = grid_;
            f.v = std::move(q);
            f.periodic = true;
            return f;
        }
        ++(*retries_);
    }
    throw std::runtime_error("PeriodicSampler: bridge retry budget exhausted");
}

// ---- SDE --------------------------------------------------------------------

SdePath sample_sde(const SpectralData& sd, const DriftData& drift, double x_max,
                   double dx, Rng& rng) {
    if (!(dx > 0.0 && dx <= 1e-3))
        throw std::invalid_argument("sample_sde: dx <= 1e-3 (Euler-Maruyama bias regime)");
    const auto& g = sd.grid;
    const double y_lo = g.y[drift.window_lo + 1];
    const double y_hi = g.y[drift.window_hi - 1];
    int steps = (int)std::llround(x_max / dx);
    SdePath path;
    path.dx = dx;
    path.q.resize(steps + 1);
    std::vector<double> p0(g.m);
    for (int i = 0; i < g.m; ++i) p0[i] = sd.psis(i, 0) * sd.psis(i, 0);
    TabulatedDensity stat(g, std::move(p0));
    double q = stat.draw(rng);
    const double sq = std::sqrt(dx);
    path.q[0] = q;
    for (int s = 1; s <= steps; ++s) {
        q += drift.at(g, q) * dx + sq * rng.normal();
        if (q < y_lo || q > y_hi) {
            q = (q < y_lo) ? 2.0 * y_lo - q : 2.0 * y_hi - q;
            q = std::clamp(q, y_lo, y_hi);
            ++path.reflections;
        }
        path.q[s] = q;
    }
    return path;
}

// ---- maximal coupling ---------------------------------------------------------

CoupleResult maximal_couple(const TabulatedDensity& f_x, const TabulatedDensity& f_y,
                            double x_draw, Rng& rng) {
    if (&f_x.grid() != &f_y.grid() && !(f_x.grid().m == f_y.grid().m &&
                                        f_x.grid().y_max == f_y.grid().y_max))
        throw std::invalid_argument("maximal_couple: mismatched grids");
    const double fx = f_x.value_at(x_draw);
    const double fy = f_y.value_at(x_draw);
    const double u = rng.uniform();
    if (u * fx <= std::min(fx, fy)) return {x_draw, true};
    // residual density  f_y - f_x ∧ f_y  (normalized inside TabulatedDensity)
    const auto& g = f_x.grid();
    std::vector<double> resid(g.m);
    for (int i = 0; i < g.m; ++i)
        resid[i] = std::max(0.0, f_y.node_values()[i] -
                                     std::min(f_x.node_values()[i], f_y.node_values()[i]));
    TabulatedDensity w(g, std::move(resid));
    return {w.draw(rng), false};
}

double total_variation(const TabulatedDensity& f_x, const TabulatedDensity& f_y) {
    const auto& g = f_x.grid();
    double s = 0.0;
    for (int i = 0; i < g.m; ++i)
        s += std::fabs(f_x.node_values()[i] - f_y.node_values()[i]);
    return 0.5 * s * g.h;
}

}  // namespace lab
