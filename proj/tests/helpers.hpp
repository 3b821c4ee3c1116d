#pragma once

#include <cmath>
#include <vector>

#include "lab/fft.hpp"
#include "lab/grid.hpp"
#include "lab/rng.hpp"

namespace lab::testing {

/// Smooth random field: Gaussian-decaying spectrum up to |k| <= kmax,
/// random phases, rescaled to the requested sup norm.
inline LatticeField random_band_limited(const TorusGrid& grid, int kmax, double sup_norm,
                                        Rng& rng) {
    const int n = grid.n;
    std::vector<cplx> spec(n / 2 + 1, 0.0);
    for (int k = 1; k <= kmax && k < n / 2; ++k) {
        double amp = std::exp(-2.0 * k * k / ((double)kmax * kmax));
        double ph = 2.0 * M_PI * rng.uniform();
        spec[k] = amp * cplx(std::cos(ph), std::sin(ph));
    }
    LatticeField f;
    f.grid = grid;
    f.v = fft::inverse(spec, n);
    double mx = f.max_abs();
    for (double& v : f.v) v *= sup_norm / mx;
    return f;
}

inline LatticeField constant_field(const TorusGrid& grid, double c) {
    LatticeField f(grid, c);
    return f;
}

}  // namespace lab::testing
