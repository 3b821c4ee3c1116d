#include "lab/testfunc.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "lab/fft.hpp"

namespace lab {

std::vector<double> TestFunction::sample(const TorusGrid& grid) const {
    return sample_derivative(grid, 0);
}

std::vector<double> TestFunction::sample_derivative(const TorusGrid& grid, int order) const {
    const int n = grid.n;
    const double c = center_frac * grid.L;
    const double s = width_frac * grid.L;
    std::vector<double> raw(n);
    for (int j = 0; j < n; ++j) {
        // nearest-image distance keeps the Gaussian smooth across the seam
        double d = grid.x(j) - c;
        d -= 2.0 * grid.L * std::round(d / (2.0 * grid.L));
        raw[j] = std::exp(-0.5 * d * d / (s * s));
    }
    auto spec = fft::forward(raw);
    for (int k = 0; k <= n / 2; ++k) {
        if (k > band) {
            spec[k] = 0.0;
            continue;
        }
        double xi = M_PI * k / grid.L;
        cplx mult = std::pow(cplx(0.0, xi), order);
        if (order % 2 == 1 && k == n / 2) mult = 0.0;
        spec[k] *= mult;
    }
    return fft::inverse(spec, n);
}

std::vector<TestFunction> load_test_functions(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_test_functions: cannot open " + path);
    nlohmann::json j;
    f >> j;
    std::vector<TestFunction> out;
    for (const auto& e : j.at("functions")) {
        TestFunction t;
        t.name = e.at("name");
        t.center_frac = e.at("center_frac");
        t.width_frac = e.at("width_frac");
        t.band = e.at("band");
        out.push_back(t);
    }
    return out;
}

std::vector<TestFunction> default_test_functions() {
    const std::string path = std::string(LAB_DATA_DIR) + "/test_functions.json";
    return load_test_functions(path);
}

}  // namespace lab
