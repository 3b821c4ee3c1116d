#include "lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lab {

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = (double)sample.size();
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double c = cdf(sample[i]);
        d = std::max(d, std::fabs((i + 1) / n - c));
        d = std::max(d, std::fabs(c - i / n));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double va = a[i], vb = b[j];
        if (va <= vb) ++i;
        if (vb <= va) ++j;
        d = std::max(d, std::fabs((double)i / a.size() - (double)j / b.size()));
    }
    return d;
}

double ks_two_sample_threshold(double alpha, size_t n, size_t m) {
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt((double)(n + m) / ((double)n * (double)m));
}

MeanSE batch_mean(const std::vector<double>& xs, int batches) {
    MeanSE r;
    const size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("batch_mean: empty");
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / n;
    int B = (int)std::min<size_t>((size_t)batches, n);
    if (B < 2) {
        r.se = 0.0;
        return r;
    }
    std::vector<double> bm(B, 0.0);
    std::vector<int> cnt(B, 0);
    for (size_t i = 0; i < n; ++i) {
        int b = (int)(i * B / n);
        bm[b] += xs[i];
        ++cnt[b];
    }
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
        bm[b] /= cnt[b];
        var += (bm[b] - r.mean) * (bm[b] - r.mean);
    }
    var /= (B - 1);
    r.se = std::sqrt(var / B);
    return r;
}

ComplexMeanSE complex_mean(const std::vector<std::complex<double>>& xs) {
    ComplexMeanSE r;
    const double n = (double)xs.size();
    if (xs.empty()) throw std::invalid_argument("complex_mean: empty");
    std::complex<double> s = 0.0;
    for (auto x : xs) s += x;
    r.mean = s / n;
    double var = 0.0;
    for (auto x : xs) var += std::norm(x - r.mean);
    var /= std::max(1.0, n - 1.0);
    r.se = std::sqrt(var / n);
    return r;
}

void Histogram::build(const std::vector<double>& xs, double l, double h, int bins) {
    lo = l;
    hi = h;
    mass.assign(bins, 0.0);
    double w = 1.0 / xs.size();
    for (double x : xs) {
        int b = (int)((x - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        mass[b] += w;
    }
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("lsq_slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = (double)x.size();
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lab
