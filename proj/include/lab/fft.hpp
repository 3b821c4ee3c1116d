#pragma once

#include <complex>
#include <vector>

#include "lab/grid.hpp"

namespace lab {

using cplx = std::complex<double>;

/// Real-to-complex FFT helpers on the torus grid (FFTW behind a plan cache).
/// Spectra are length n/2+1, mode k has wavenumber xi_k = pi*k/L.
namespace fft {

std::vector<cplx> forward(const std::vector<double>& f);
std::vector<double> inverse(const std::vector<cplx>& spec, int n);

/// f -> d^m/dx^m f, spectral.  Odd orders zero the Nyquist mode.
std::vector<double> derivative(const std::vector<double>& f, double L, int order);

/// f(x) -> f(x + delta), exact phase shift (Nyquist kept as cosine pair).
std::vector<double> shift(const std::vector<double>& f, double L, double delta);

/// Apply a real even multiplier m(xi) in Fourier space.
std::vector<double> multiply_even(const std::vector<double>& f, double L,
                                  double (*m)(double xi, double a), double a);

/// g_minus multiplier 4k/(4k^2 + xi^2) applied to f.
std::vector<double> helmholtz(const std::vector<double>& f, double L, double kappa);
/// g_plus multiplier -2 d/dx (4k^2 - d^2)^{-1} applied to f.
std::vector<double> helmholtz_deriv(const std::vector<double>& f, double L, double kappa);

/// Zero all modes with |k| > kmax (band-limiting projector).
std::vector<double> band_limit(const std::vector<double>& f, int kmax);

/// Exact band-limited upsampling by an integer factor (zero padding).
std::vector<double> upsample(const std::vector<double>& f, int factor);

/// Pointwise product computed alias-free via 2x padded transforms,
/// truncated back to the grid band.
std::vector<double> dealiased_product(const std::vector<double>& f,
                                      const std::vector<double>& g);

}  // namespace fft
}  // namespace lab
