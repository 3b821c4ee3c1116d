#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace lab {

/// Kolmogorov-Smirnov distance of a sample against a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Two-sample rejection threshold at level alpha.
double ks_two_sample_threshold(double alpha, size_t n, size_t m);

/// Mean with standard error from batch means.
struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};
MeanSE batch_mean(const std::vector<double>& xs, int batches = 64);

struct ComplexMeanSE {
    std::complex<double> mean;
    double se = 0.0;  // joint: sqrt((Var Re + Var Im)/N)
};
ComplexMeanSE complex_mean(const std::vector<std::complex<double>>& xs);

/// Fixed-bin histogram; mass sums to 1.
struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> mass;
    void build(const std::vector<double>& xs, double lo, double hi, int bins);
};

/// Weighted least-squares slope of y against x.
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Monte Carlo summaries of a field ensemble.
struct EnsembleStats {
    Histogram marginal;                      // values at one site
    std::vector<std::complex<double>> char_fn;  // E e^{i<q, phi_k>}
    std::vector<double> char_fn_se;
    std::vector<double> covariance;          // C(x_j) = E[q(0) q(x_j)]
    std::vector<double> covariance_se;
};

}  // namespace lab
