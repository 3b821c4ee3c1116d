#include "lab/oscillator.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace lab {

namespace {
constexpr double kSpectralTol = 1e-9;   // |lambda_0| after the shift
constexpr double kBoundaryTol = 1e-8;   // |psi_k| at the outermost nodes
}  // namespace

ValueGrid ValueGrid::make(double y_max, int m) {
    ValueGrid g;
    g.y_max = y_max;
    g.m = m;
    g.h = 2.0 * y_max / (m + 1);
    g.y.resize(m);
    for (int i = 0; i < m; ++i) g.y[i] = -y_max + (i + 1) * g.h;
    return g;
}

int ValueGrid::locate(double yv) const {
    int i = (int)std::floor((yv + y_max) / h) - 1;
    if (i < 0) i = 0;
    if (i > m - 2) i = m - 2;
    return i;
}

void OscillatorSpec::validate() const {
    if (!(y_max > 0.0)) throw std::invalid_argument("OscillatorSpec: y_max > 0");
    if (m < 16) throw std::invalid_argument("OscillatorSpec: m >= 16");
    if (n_eigs < 2 || n_eigs > m) throw std::invalid_argument("OscillatorSpec: 2 <= n_eigs <= m");
}

double OscillatorSpec::potential(double y) const {
    double v = harmonic_test_potential ? 0.5 * y * y - 0.5
                                       : 0.5 * y * y * y * y - 0.5 * mu * y * y;
    return v + extra_constant;
}

SpectralData build_spectrum(const OscillatorSpec& spec) {
    spec.validate();
    const int m = spec.m;
    ValueGrid grid = ValueGrid::make(spec.y_max, m);

    // Sine collocation: H = F diag(xi_k^2/2) F + diag(V), F the orthogonal
    // symmetric DST-I matrix.  Dense symmetric, Dirichlet at +-y_max.
    Eigen::MatrixXd F(m, m);
    const double norm = std::sqrt(2.0 / (m + 1));
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            F(k, i) = norm * std::sin((double)(i + 1) * (k + 1) * M_PI / (m + 1));

    Eigen::VectorXd kin(m);
    for (int k = 0; k < m; ++k) {
        double xi = (k + 1) * M_PI / (2.0 * spec.y_max);
        kin[k] = 0.5 * xi * xi;
    }
    Eigen::MatrixXd H = F * kin.asDiagonal() * F;
    for (int i = 0; i < m; ++i) H(i, i) += spec.potential(grid.y[i]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("build_spectrum: eigensolve failed to converge");

    SpectralData sd;
    sd.spec = spec;
    sd.grid = grid;
    const int K = spec.n_eigs;
    sd.v_shift = -solver.eigenvalues()[0];
    sd.lambdas.resize(K);
    sd.psis.resize(m, K);
    const double scale = 1.0 / std::sqrt(grid.h);
    for (int k = 0; k < K; ++k) {
        sd.lambdas[k] = solver.eigenvalues()[k] + sd.v_shift;
        Eigen::VectorXd v = solver.eigenvectors().col(k) * scale;
        // Fix sign: make the first nonzero-at-scale entry from the center positive.
        if (v[m / 2] < 0.0 || (v[m / 2] == 0.0 && v[m / 2 + 1] < 0.0)) v = -v;
        sd.psis.col(k) = v;
    }
    if (std::fabs(sd.lambdas[0]) > kSpectralTol)
        throw std::runtime_error("build_spectrum: lambda_0 shift exceeded tolerance");
    // Ground state is sign definite; allow eigensolver noise near the wall.
    if (sd.psis.col(0).minCoeff() < -1e-10 * sd.psis.col(0).maxCoeff())
        throw std::runtime_error("build_spectrum: psi_0 not positive");
    // Leakage policy: psi_0 must satisfy the 1e-8 boundary tolerance (grid too
    // small otherwise); the worst retained mode is recorded as metadata and
    // only a gross violation (unconfined mode) is an error.
    if (std::max(std::fabs(sd.psis(0, 0)), std::fabs(sd.psis(m - 1, 0))) > kBoundaryTol)
        throw std::runtime_error("build_spectrum: psi_0 boundary leakage, enlarge y_max");
    double leak = 0.0;
    for (int k = 0; k < K; ++k)
        leak = std::max(leak, std::max(std::fabs(sd.psis(0, k)), std::fabs(sd.psis(m - 1, k))));
    sd.boundary_leak = leak;
    if (leak > 1e-3)
        throw std::runtime_error("build_spectrum: retained mode unconfined, enlarge y_max or reduce n_eigs");
    return sd;
}

double SpectralData::psi0(double yv) const {
    if (yv <= grid.y.front() || yv >= grid.y.back()) return 0.0;
    int i = grid.locate(yv);
    double t = (yv - grid.y[i]) / grid.h;
    return (1.0 - t) * psis(i, 0) + t * psis(i + 1, 0);
}

Eigen::MatrixXd heat_kernel(const SpectralData& sd, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t > 0");
    const int K = sd.n_eigs();
    Eigen::VectorXd w(K);
    for (int k = 0; k < K; ++k) w[k] = std::exp(-sd.lambdas[k] * t);
    return sd.psis * w.asDiagonal() * sd.psis.transpose();
}

double heat_kernel_truncation(const SpectralData& sd, double t) {
    const int K = sd.n_eigs();
    const int Kh = K / 2;
    double tail = 0.0;
    // sup-norm of the dropped half, then extend the geometric decay.
    Eigen::VectorXd w(K - Kh);
    for (int k = Kh; k < K; ++k) w[k - Kh] = std::exp(-sd.lambdas[k] * t);
    Eigen::MatrixXd part = sd.psis.rightCols(K - Kh) * w.asDiagonal() *
                           sd.psis.rightCols(K - Kh).transpose();
    tail = part.cwiseAbs().maxCoeff();
    double ratio = std::exp(-(sd.lambdas[K - 1] - sd.lambdas[Kh - 1]) * t);
    return tail * (1.0 + ratio / std::max(1e-300, 1.0 - ratio));
}

DriftData drift(const SpectralData& sd) {
    const int m = sd.grid.m;
    // psi_0' through the sine series: psi0 = sum c_k s_k, s_k' = xi_k cos(.).
    const double norm = std::sqrt(2.0 / (m + 1));
    Eigen::VectorXd psi0 = sd.psis.col(0);
    Eigen::VectorXd c(m);
    for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            s += norm * std::sin((double)(i + 1) * (k + 1) * M_PI / (m + 1)) * psi0[i];
        c[k] = s;
    }
    DriftData d;
    d.b.assign(m, std::numeric_limits<double>::quiet_NaN());
    const double underflow = 1e-13 * psi0.maxCoeff();
    int lo = 0, hi = m - 1;
    while (lo < m && psi0[lo] <= underflow) ++lo;
    while (hi >= 0 && psi0[hi] <= underflow) --hi;
    d.window_lo = lo;
    d.window_hi = hi;
    for (int i = lo; i <= hi; ++i) {
        double dp = 0.0;
        for (int k = 0; k < m; ++k) {
            double xi = (k + 1) * M_PI / (2.0 * sd.grid.y_max);
            dp += c[k] * xi * norm * std::cos((double)(i + 1) * (k + 1) * M_PI / (m + 1));
        }
        d.b[i] = dp / psi0[i];
    }
    return d;
}

double DriftData::at(const ValueGrid& g, double yv) const {
    int i = g.locate(yv);
    if (i < window_lo || i + 1 > window_hi)
        throw std::domain_error("drift: evaluation outside the trusted window");
    double t = (yv - g.y[i]) / g.h;
    return (1.0 - t) * b[i] + t * b[i + 1];
}

namespace {
std::vector<double> sine_coefficients(const SpectralData& sd) {
    const int m = sd.grid.m;
    const double norm = std::sqrt(2.0 / (m + 1));
    std::vector<double> c(m, 0.0);
    for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            s += norm * std::sin((double)(i + 1) * (k + 1) * M_PI / (m + 1)) * sd.psis(i, 0);
        c[k] = s;
    }
    return c;
}
}  // namespace

double psi0_series(const SpectralData& sd, double yv) {
    auto c = sine_coefficients(sd);
    const int m = sd.grid.m;
    const double norm = std::sqrt(2.0 / (m + 1));
    double s = 0.0;
    for (int k = 0; k < m; ++k)
        s += c[k] * norm * std::sin((k + 1) * M_PI * (yv + sd.grid.y_max) / (2.0 * sd.grid.y_max));
    return s;
}

double drift_series(const SpectralData& sd, double yv) {
    auto c = sine_coefficients(sd);
    const int m = sd.grid.m;
    const double norm = std::sqrt(2.0 / (m + 1));
    double s = 0.0, ds = 0.0;
    for (int k = 0; k < m; ++k) {
        double xi = (k + 1) * M_PI / (2.0 * sd.grid.y_max);
        double arg = xi * (yv + sd.grid.y_max);
        s += c[k] * norm * std::sin(arg);
        ds += c[k] * norm * xi * std::cos(arg);
    }
    if (!(std::fabs(s) > 1e-13 * sd.psis.col(0).maxCoeff()))
        throw std::domain_error("drift_series: psi_0 underflow at evaluation point");
    return ds / s;
}

double covariance_oracle(const SpectralData& sd, double x) {
    const int K = sd.n_eigs();
    Eigen::VectorXd ypsi0 = sd.psis.col(0);
    for (int i = 0; i < sd.grid.m; ++i) ypsi0[i] *= sd.grid.y[i];
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
        double a = sd.grid.h * sd.psis.col(k).dot(ypsi0);
        s += std::exp(-sd.lambdas[k] * x) * a * a;
    }
    return s;
}

double stationary_variance(const SpectralData& sd) {
    double s = 0.0;
    for (int i = 0; i < sd.grid.m; ++i)
        s += sd.grid.y[i] * sd.grid.y[i] * sd.psis(i, 0) * sd.psis(i, 0);
    return s * sd.grid.h;
}

// ---- serialization --------------------------------------------------------

namespace {
void write_doubles(std::ofstream& f, const double* p, size_t count) {
    static_assert(sizeof(double) == 8);
    f.write(reinterpret_cast<const char*>(p), count * 8);  // little-endian hosts
}
void read_doubles(std::ifstream& f, double* p, size_t count) {
    f.read(reinterpret_cast<char*>(p), count * 8);
    if (!f) throw std::runtime_error("load_spectrum: truncated binary sidecar");
}
}  // namespace

void save_spectrum(const SpectralData& sd, const std::string& prefix) {
    nlohmann::json j;
    j["format"] = "mkdvlab-spectrum";
    j["version"] = 1;
    j["mu"] = sd.spec.mu;
    j["y_max"] = sd.spec.y_max;
    j["m"] = sd.spec.m;
    j["n_eigs"] = (int)sd.lambdas.size();
    j["harmonic_test_potential"] = sd.spec.harmonic_test_potential;
    j["v_shift"] = sd.v_shift;
    j["boundary_leak"] = sd.boundary_leak;
    j["layout"] = "grid, lambdas, psis row-major (m x n_eigs), float64 little-endian";
    std::ofstream jf(prefix + ".json");
    jf << j.dump(2) << "\n";
    std::ofstream bf(prefix + ".bin", std::ios::binary);
    write_doubles(bf, sd.grid.y.data(), sd.grid.m);
    write_doubles(bf, sd.lambdas.data(), sd.lambdas.size());
    Eigen::MatrixXd rowmajor = sd.psis;  // Eigen default is column-major; emit rows
    for (int i = 0; i < rowmajor.rows(); ++i)
        for (int k = 0; k < rowmajor.cols(); ++k) {
            double v = rowmajor(i, k);
            write_doubles(bf, &v, 1);
        }
}

SpectralData load_spectrum(const std::string& prefix) {
    std::ifstream jf(prefix + ".json");
    if (!jf) throw std::runtime_error("load_spectrum: missing " + prefix + ".json");
    nlohmann::json j;
    jf >> j;
    if (j.value("format", "") != "mkdvlab-spectrum" || j.value("version", 0) != 1)
        throw std::runtime_error("load_spectrum: unsupported format/version");
    SpectralData sd;
    sd.spec.mu = j["mu"];
    sd.spec.y_max = j["y_max"];
    sd.spec.m = j["m"];
    sd.spec.n_eigs = j["n_eigs"];
    sd.spec.harmonic_test_potential = j["harmonic_test_potential"];
    sd.v_shift = j["v_shift"];
    sd.boundary_leak = j["boundary_leak"];
    sd.grid = ValueGrid::make(sd.spec.y_max, sd.spec.m);
    std::ifstream bf(prefix + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("load_spectrum: missing " + prefix + ".bin");
    std::vector<double> y(sd.spec.m);
    read_doubles(bf, y.data(), y.size());
    sd.lambdas.resize(sd.spec.n_eigs);
    read_doubles(bf, sd.lambdas.data(), sd.lambdas.size());
    sd.psis.resize(sd.spec.m, sd.spec.n_eigs);
    for (int i = 0; i < sd.spec.m; ++i)
        for (int k = 0; k < sd.spec.n_eigs; ++k) read_doubles(bf, &sd.psis(i, k), 1);
    return sd;
}

}  // namespace lab
