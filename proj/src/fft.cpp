#include "lab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace lab {
namespace fft {

namespace {

// Plan creation is not thread safe and happens once per size under a lock;
// execution uses the new-array interface on thread-local fftw_malloc'd
// buffers (same alignment class as the buffers the plans were created on).
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanPair plans_for(int n) {
    static std::mutex mu;
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    double* re = fftw_alloc_real(n);
    fftw_complex* sp = fftw_alloc_complex(n / 2 + 1);
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_1d(n, re, sp, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r_1d(n, sp, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(sp);
    return cache.emplace(n, p).first->second;
}

struct Buffers {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
};

Buffers& buffers_for(int n) {
    thread_local std::map<int, Buffers> mine;
    auto it = mine.find(n);
    if (it != mine.end()) return it->second;
    Buffers b;
    b.real = fftw_alloc_real(n);
    b.spec = fftw_alloc_complex(n / 2 + 1);
    return mine.emplace(n, b).first->second;
}

}  // namespace

std::vector<cplx> forward(const std::vector<double>& f) {
    const int n = (int)f.size();
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("fft: need even n >= 2");
    PlanPair p = plans_for(n);
    Buffers& b = buffers_for(n);
    std::memcpy(b.real, f.data(), n * sizeof(double));
    fftw_execute_dft_r2c(p.fwd, b.real, b.spec);
    std::vector<cplx> out(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) out[k] = cplx(b.spec[k][0], b.spec[k][1]) / double(n);
    return out;
}

std::vector<double> inverse(const std::vector<cplx>& spec, int n) {
    if ((int)spec.size() != n / 2 + 1) throw std::invalid_argument("fft: bad spectrum size");
    PlanPair p = plans_for(n);
    Buffers& b = buffers_for(n);
    for (int k = 0; k <= n / 2; ++k) {
        b.spec[k][0] = spec[k].real();
        b.spec[k][1] = spec[k].imag();
    }
    fftw_execute_dft_c2r(p.bwd, b.spec, b.real);
    std::vector<double> out(n);
    std::memcpy(out.data(), b.real, n * sizeof(double));
    return out;
}

std::vector<double> derivative(const std::vector<double>& f, double L, int order) {
    const int n = (int)f.size();
    auto spec = forward(f);
    for (int k = 0; k <= n / 2; ++k) {
        double xi = M_PI * k / L;
        cplx mult = std::pow(cplx(0.0, xi), order);
        if (order % 2 == 1 && k == n / 2) mult = 0.0;  // no sine partner at Nyquist
        spec[k] *= mult;
    }
    return inverse(spec, n);
}

std::vector<double> shift(const std::vector<double>& f, double L, double delta) {
    const int n = (int)f.size();
    auto spec = forward(f);
    for (int k = 0; k <= n / 2; ++k) {
        double xi = M_PI * k / L;
        if (k == n / 2)
            spec[k] *= std::cos(xi * delta);
        else
            spec[k] *= std::exp(cplx(0.0, xi * delta));
    }
    return inverse(spec, n);
}

std::vector<double> multiply_even(const std::vector<double>& f, double L,
                                  double (*m)(double xi, double a), double a) {
    const int n = (int)f.size();
    auto spec = forward(f);
    for (int k = 0; k <= n / 2; ++k) spec[k] *= m(M_PI * k / L, a);
    return inverse(spec, n);
}

std::vector<double> helmholtz(const std::vector<double>& f, double L, double kappa) {
    return multiply_even(
        f, L, [](double xi, double k) { return 4.0 * k / (4.0 * k * k + xi * xi); }, kappa);
}

std::vector<double> helmholtz_deriv(const std::vector<double>& f, double L, double kappa) {
    const int n = (int)f.size();
    auto spec = forward(f);
    for (int k = 0; k <= n / 2; ++k) {
        double xi = M_PI * k / L;
        cplx mult = cplx(0.0, -2.0 * xi / (4.0 * kappa * kappa + xi * xi));
        if (k == n / 2) mult = 0.0;
        spec[k] *= mult;
    }
    return inverse(spec, n);
}

std::vector<double> band_limit(const std::vector<double>& f, int kmax) {
    const int n = (int)f.size();
    auto spec = forward(f);
    for (int k = kmax + 1; k <= n / 2; ++k) spec[k] = 0.0;
    return inverse(spec, n);
}

std::vector<double> upsample(const std::vector<double>& f, int factor) {
    const int n = (int)f.size();
    const int m = n * factor;
    auto spec = forward(f);
    std::vector<cplx> big(m / 2 + 1, 0.0);
    for (int k = 0; k < n / 2; ++k) big[k] = spec[k];
    // Nyquist cosine becomes an interior mode (counted twice by c2r).
    big[n / 2] = 0.5 * spec[n / 2].real();
    return inverse(big, m);
}

std::vector<double> dealiased_product(const std::vector<double>& f,
                                      const std::vector<double>& g) {
    const int n = (int)f.size();
    auto ff = upsample(f, 2);
    auto gg = upsample(g, 2);
    for (int j = 0; j < 2 * n; ++j) ff[j] *= gg[j];
    auto spec = forward(ff);
    std::vector<cplx> trunc(n / 2 + 1);
    for (int k = 0; k < n / 2; ++k) trunc[k] = spec[k];
    trunc[n / 2] = 0.0;  // projection keeps fields Nyquist-free
    return inverse(trunc, n);
}

}  // namespace fft
}  // namespace lab
