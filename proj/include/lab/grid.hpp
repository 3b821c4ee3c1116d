#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lab {

/// Equispaced grid on the torus T_L = R / 2L Z, sites x_j = -L + j*dx.
struct TorusGrid {
    double L = 1.0;
    int n = 0;

    TorusGrid() = default;
    TorusGrid(double half_period, int sites) : L(half_period), n(sites) {
        if (!(L > 0.0) || n <= 0 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: need L > 0 and even n");
    }

    double dx() const { return 2.0 * L / n; }
    double x(int j) const { return -L + j * dx(); }
    /// Fourier wavenumber of mode k in FFT ordering (k = 0..n-1).
    double xi(int k) const {
        int kk = (k <= n / 2) ? k : k - n;
        return M_PI * kk / L;
    }
    bool operator==(const TorusGrid& o) const { return L == o.L && n == o.n; }
};

/// Real periodic field sampled on a TorusGrid.  A non-periodic variant
/// (half_period = inf) is used for truncated-line samples from the
/// infinite-volume law; those start at x = 0 with the same spacing.
struct LatticeField {
    TorusGrid grid;
    std::vector<double> v;
    bool periodic = true;

    LatticeField() = default;
    explicit LatticeField(const TorusGrid& g, double fill = 0.0)
        : grid(g), v(g.n, fill) {}

    int n() const { return (int)v.size(); }
    double dx() const { return grid.dx(); }
    double& operator[](int j) { return v[j]; }
    double operator[](int j) const { return v[j]; }

    double max_abs() const {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::fabs(a));
        return m;
    }
    double l2() const {  // discrete L^2(T_L) norm
        double s = 0.0;
        for (double a : v) s += a * a;
        return std::sqrt(s * dx());
    }
    bool all_finite() const {
        for (double a : v)
            if (!std::isfinite(a)) return false;
        return true;
    }
};

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace lab
