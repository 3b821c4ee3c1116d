#pragma once

#include <string>
#include <vector>

#include "lab/grid.hpp"

namespace lab {

/// Band-limited bump: a Gaussian window band-limited to |k| <= band, so the
/// sampled function is an exact trigonometric polynomial with numerically
/// compact support (both tails below ~1e-8).
struct TestFunction {
    std::string name;
    double center_frac = 0.0;  // center as a fraction of L, in [-1, 1)
    double width_frac = 0.0;   // Gaussian sigma as a fraction of L
    int band = 0;              // band limit in integer modes

    std::vector<double> sample(const TorusGrid& grid) const;
    std::vector<double> sample_derivative(const TorusGrid& grid, int order) const;
};

/// The library checked into data/test_functions.json.
std::vector<TestFunction> load_test_functions(const std::string& path);
std::vector<TestFunction> default_test_functions();

}  // namespace lab
