#include "lab/dirac.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <complex>
#include <stdexcept>

#include "lab/fft.hpp"

namespace lab {

// ---- DiagGreens -------------------------------------------------------------

double DiagGreens::quad_residual() const {
    double r = 0.0;
    for (int i = 0; i < n(); ++i) {
        double lhs = gamma[i] + 0.5 * gamma[i] * gamma[i];
        double rhs = 0.5 * (gplus[i] * gplus[i] - gminus[i] * gminus[i]);
        r = std::max(r, std::fabs(lhs - rhs));
    }
    return r;
}

bool DiagGreens::pointwise_bounds() const {
    for (int i = 0; i < n(); ++i) {
        if (!(std::fabs(gminus[i]) < 1.0)) return false;
        if (!(std::fabs(gplus[i]) < 1.0 + gamma[i])) return false;
        if (!(1.0 + gamma[i] > 0.0)) return false;
    }
    return true;
}

// ---- fixed point -------------------------------------------------------------

DiagGreens diag_greens_fixed_point(const LatticeField& q, double kappa, double tol,
                                   int max_iter, const std::vector<double>* gamma_warm) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("diag_greens: kappa >= 1");
    const int n = q.n();
    const double L = q.grid.L;
    DiagGreens dg;
    dg.kappa = kappa;
    dg.gamma = gamma_warm ? *gamma_warm : std::vector<double>(n, 0.0);
    dg.gplus.assign(n, 0.0);
    dg.gminus.assign(n, 0.0);

    std::vector<double> u(n), gnew(n);
    double prev_delta = std::numeric_limits<double>::infinity();
    double relax = 1.0;
    int rises = 0;
    for (int it = 1; it <= max_iter; ++it) {
        for (int i = 0; i < n; ++i) u[i] = q.v[i] * (1.0 + dg.gamma[i]);
        dg.gminus = fft::helmholtz(u, L, kappa);
        dg.gplus = fft::helmholtz_deriv(u, L, kappa);
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            double rad = 1.0 + dg.gplus[i] * dg.gplus[i] - dg.gminus[i] * dg.gminus[i];
            if (!(rad > 0.0))
                throw std::runtime_error("diag_greens_fixed_point: kappa below contraction regime");
            gnew[i] = -1.0 + std::sqrt(rad);
            delta = std::max(delta, std::fabs(gnew[i] - dg.gamma[i]));
        }
        if (delta > prev_delta) {
            if (++rises >= 2) relax = 0.5;  // oscillation: halve the update
        }
        prev_delta = delta;
        for (int i = 0; i < n; ++i) dg.gamma[i] += relax * (gnew[i] - dg.gamma[i]);
        dg.iterations = it;
        if (delta < tol) {
            dg.converged = true;
            break;
        }
    }
    return dg;
}

// ---- Floquet oracle -----------------------------------------------------------

namespace {

struct Mat2 {
    double a11, a12, a21, a22;
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    double norm_inf() const {
        return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                        std::max(std::fabs(a21), std::fabs(a22)));
    }
};

/// exp of a traceless 2x2 matrix, closed form.
Mat2 exp_traceless(const Mat2& m) {
    double mu2 = m.a11 * m.a11 + m.a12 * m.a21;
    double ch, shm;  // cosh(mu), sinh(mu)/mu
    if (mu2 >= 0.0) {
        double mu = std::sqrt(mu2);
        ch = std::cosh(mu);
        shm = (mu > 1e-8) ? std::sinh(mu) / mu : 1.0 + mu2 / 6.0;
    } else {
        double mu = std::sqrt(-mu2);
        ch = std::cos(mu);
        shm = (mu > 1e-8) ? std::sin(mu) / mu : 1.0 - (-mu2) / 6.0;
    }
    return {ch + shm * m.a11, shm * m.a12, shm * m.a21, ch + shm * m.a22};
}

/// q(x) at sequences x0 + j*step, j = 0..count-1, by phasor recurrence on
/// the exact Fourier series of the lattice field.  FFT coefficients are
/// relative to the origin x = -L, hence the x0 + L phase.
std::vector<double> eval_series(const std::vector<cplx>& spec, double L, double x0,
                                double step, int count) {
    const int half = (int)spec.size() - 1;  // n/2
    std::vector<cplx> phase(half + 1), rot(half + 1);
    for (int k = 0; k <= half; ++k) {
        double xi = M_PI * k / L;
        phase[k] = std::exp(cplx(0.0, xi * (x0 + L)));
        rot[k] = std::exp(cplx(0.0, xi * step));
    }
    std::vector<double> out(count);
    for (int j = 0; j < count; ++j) {
        double s = spec[0].real();
        for (int k = 1; k < half; ++k) s += 2.0 * (spec[k] * phase[k]).real();
        s += (spec[half] * phase[half]).real();  // Nyquist as cosine
        out[j] = s;
        for (int k = 0; k <= half; ++k) phase[k] *= rot[k];
    }
    return out;
}

constexpr double GAUSS_OFF = 0.28867513459481287;  // 1/(2 sqrt 3)

}  // namespace

LineGreensOracle::LineGreensOracle(const LatticeField& q, double kappa, int substeps)
    : grid_(q.grid), kappa_(kappa) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("LineGreensOracle: kappa >= 1");
    const int n = grid_.n;
    const int r = std::max(2, substeps);
    const double h = grid_.dx() / r;
    const double L = grid_.L;
    auto spec = fft::forward(q.v);

    // q at the two Gauss nodes of every substep of [-L, L]
    const int total = n * r;
    auto q1 = eval_series(spec, L, -L + h * (0.5 - GAUSS_OFF), h, total);
    auto q2 = eval_series(spec, L, -L + h * (0.5 + GAUSS_OFF), h, total);

    auto omega = [&](int s) -> Mat2 {
        // Magnus 4th order on substep s with Gauss nodes
        double qa = q1[s], qb = q2[s];
        double avg = 0.5 * h * (qa + qb);
        double comm = std::sqrt(3.0) * h * h / 12.0;
        // A = [[k, q],[q, -k]];  [A2, A1] = 2k (q1 - q2) [[0,1],[-1,0]]
        double w = comm * 2.0 * kappa * (qa - qb);
        return {h * kappa, avg + w, avg - w, -h * kappa};
    };

    // one full loop for the monodromy
    Mat2 T{1, 0, 0, 1};
    double logT = 0.0;
    for (int s = 0; s < total; ++s) {
        T = exp_traceless(omega(s)) * T;
        double sc = T.norm_inf();
        T = {T.a11 / sc, T.a12 / sc, T.a21 / sc, T.a22 / sc};
        logT += std::log(sc);
    }
    // eigenvectors of the (scaled) monodromy; det M = 1 so det T = e^{-2 logT}
    const double t = T.a11 + T.a22;
    const double d = T.a11 * T.a22 - T.a12 * T.a21;
    const double disc = t * t - 4.0 * d;
    if (!(disc > 0.0))
        throw std::runtime_error("LineGreensOracle: elliptic monodromy (kappa too small)");
    double lp = 0.5 * (t + ((t >= 0.0) ? std::sqrt(disc) : -std::sqrt(disc)));
    double lm = d / lp;
    auto eigvec = [&](double lam) {
        // rows of (T - lam): pick the better conditioned one
        double r1n = std::hypot(T.a11 - lam, T.a12);
        double r2n = std::hypot(T.a21, T.a22 - lam);
        double vx, vy;
        if (r1n >= r2n) {
            vx = -T.a12;
            vy = T.a11 - lam;
        } else {
            vx = -(T.a22 - lam);
            vy = T.a21;
        }
        double nn = std::max(std::fabs(vx), std::fabs(vy));
        return std::pair<double, double>(vx / nn, vy / nn);
    };
    auto [vpx, vpy] = eigvec(lp);
    auto [vmx, vmy] = eigvec(lm);

    // phi_plus forward from -L, phi_minus backward from +L
    phi_plus_.resize(n);
    phi_minus_.resize(n);
    {
        Scaled v{vpx, vpy, 0.0};
        phi_plus_[0] = v;
        for (int i = 0; i < n - 1; ++i) {
            for (int s = i * r; s < (i + 1) * r; ++s) {
                Mat2 E = exp_traceless(omega(s));
                double na = E.a11 * v.a + E.a12 * v.b;
                double nb = E.a21 * v.a + E.a22 * v.b;
                double sc = std::max(std::fabs(na), std::fabs(nb));
                v.a = na / sc;
                v.b = nb / sc;
                v.loge += std::log(sc);
            }
            phi_plus_[i + 1] = v;
        }
    }
    {
        Scaled v{vmx, vmy, 0.0};
        for (int i = n - 1; i >= 0; --i) {
            for (int s = (i + 1) * r - 1; s >= i * r; --s) {
                Mat2 E = exp_traceless(omega(s));
                // inverse of a unimodular exponential: exp(-Omega)
                Mat2 Einv{E.a22, -E.a12, -E.a21, E.a11};
                double det = E.a11 * E.a22 - E.a12 * E.a21;
                double na = (Einv.a11 * v.a + Einv.a12 * v.b) / det;
                double nb = (Einv.a21 * v.a + Einv.a22 * v.b) / det;
                double sc = std::max(std::fabs(na), std::fabs(nb));
                v.a = na / sc;
                v.b = nb / sc;
                v.loge += std::log(sc);
            }
            phi_minus_[i] = v;
        }
    }

    // Wronskian det[phi-, phi+]: constant; record value and defect
    double best = -std::numeric_limits<double>::infinity();
    double worst_dev = 0.0;
    std::vector<double> logs(n);
    std::vector<double> signs(n);
    for (int i = 0; i < n; ++i) {
        double det = phi_minus_[i].a * phi_plus_[i].b - phi_minus_[i].b * phi_plus_[i].a;
        logs[i] = std::log(std::fabs(det)) + phi_minus_[i].loge + phi_plus_[i].loge;
        signs[i] = (det >= 0.0) ? 1.0 : -1.0;
        if (logs[i] > best) best = logs[i];
    }
    logdetw_ = logs[0];
    detw_sign_ = signs[0];
    for (int i = 1; i < n; ++i) {
        worst_dev = std::max(worst_dev, std::fabs(logs[i] - logs[0]));
        if (signs[i] != signs[0]) worst_dev = std::numeric_limits<double>::infinity();
    }
    wronskian_defect_ = worst_dev;
    if (!(worst_dev < 1e-3))
        throw std::runtime_error("LineGreensOracle: Wronskian drift, increase substeps");
}

Eigen::Matrix2d LineGreensOracle::block(int i, int j) const {
    Eigen::Matrix2d G;
    if (i >= j) {
        // G(x,y) = -phi_-(x) (sigma1 phi_+(y))^T / det W
        const Scaled& f = phi_minus_[i];
        const Scaled& g = phi_plus_[j];
        double amp = -detw_sign_ * std::exp(f.loge + g.loge - logdetw_);
        G(0, 0) = amp * f.a * g.b;
        G(0, 1) = amp * f.a * g.a;
        G(1, 0) = amp * f.b * g.b;
        G(1, 1) = amp * f.b * g.a;
    } else {
        // G(x,y) = -phi_+(x) (sigma1 phi_-(y))^T / det W
        const Scaled& f = phi_plus_[i];
        const Scaled& g = phi_minus_[j];
        double amp = -detw_sign_ * std::exp(f.loge + g.loge - logdetw_);
        G(0, 0) = amp * f.a * g.b;
        G(0, 1) = amp * f.a * g.a;
        G(1, 0) = amp * f.b * g.b;
        G(1, 1) = amp * f.b * g.a;
    }
    return G;
}

DiagGreens LineGreensOracle::diagonal() const {
    const int n = grid_.n;
    DiagGreens dg;
    dg.kappa = kappa_;
    dg.gamma.resize(n);
    dg.gplus.resize(n);
    dg.gminus.resize(n);
    for (int i = 0; i < n; ++i) {
        Eigen::Matrix2d G = block(i, i);  // the x = y+ branch
        double g12 = G(0, 1), g21 = G(1, 0);
        dg.gplus[i] = g21 + g12;
        dg.gminus[i] = g21 - g12;
        double rad = 1.0 + dg.gplus[i] * dg.gplus[i] - dg.gminus[i] * dg.gminus[i];
        if (!(rad > 0.0))
            throw std::runtime_error("diag_greens_oracle: nonpositive radicand at site " +
                                     std::to_string(i));
        dg.gamma[i] = -1.0 + std::sqrt(rad);
    }
    dg.converged = true;
    dg.iterations = 0;
    return dg;
}

std::vector<double> LineGreensOracle::gamma_direct() const {
    const int n = grid_.n;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        Eigen::Matrix2d G = block(i, i);
        g[i] = G(0, 0) + G(1, 1) - 1.0;  // tr G0(y+,y) = 1 for kappa > 0
    }
    return g;
}

DiagGreens diag_greens_oracle(const LineGreensOracle& oracle) { return oracle.diagonal(); }

namespace {
std::atomic<long> fallback_count{0};
}

long greens_fallback_count() { return fallback_count.load(); }

DiagGreens diag_greens_robust(const LatticeField& q, double kappa, double tol, int max_iter,
                              const std::vector<double>* gamma_warm) {
    try {
        DiagGreens dg = diag_greens_fixed_point(q, kappa, tol, max_iter, gamma_warm);
        if (dg.converged) return dg;
    } catch (const std::runtime_error&) {
        // radicand left the branch: below the contraction regime
    }
    long n = ++fallback_count;
    if (n == 1)
        std::fprintf(stderr,
                     "lab: greens fixed point outside its contraction regime "
                     "(kappa=%.3g, |q|_inf=%.3g); falling back to the Floquet oracle\n",
                     kappa, q.max_abs());
    return LineGreensOracle(q, kappa, 16).diagonal();
}

// ---- dense spectral resolvent (test-only) --------------------------------------

ResolventMatrix resolvent_matrix(const LatticeField& q, double kappa) {
    if (!(std::fabs(kappa) >= 1.0)) throw std::invalid_argument("resolvent_matrix: |kappa| >= 1");
    const int n = q.n();
    ResolventMatrix rm;
    rm.kappa = kappa;
    rm.n = n;
    rm.dx = q.dx();
    // spectral derivative matrix via FFT columns
    Eigen::MatrixXd D(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        auto col = fft::derivative(e, q.grid.L, 1);
        for (int i = 0; i < n; ++i) D(i, j) = col[i];
    }
    rm.op.setZero(2 * n, 2 * n);
    rm.op.topLeftCorner(n, n) = -D;
    rm.op.bottomRightCorner(n, n) = D;
    for (int i = 0; i < n; ++i) {
        rm.op(i, n + i) = q.v[i];
        rm.op(n + i, i) = -q.v[i];
        rm.op(i, i) += kappa;
        rm.op(n + i, n + i) += kappa;
    }
    rm.inv = rm.op.partialPivLu().inverse();
    rm.residual = (rm.op * rm.inv - Eigen::MatrixXd::Identity(2 * n, 2 * n))
                      .cwiseAbs()
                      .maxCoeff();
    if (rm.residual > 1e-8)
        throw std::runtime_error("resolvent_matrix: ill-conditioned inverse (residual check failed)");
    return rm;
}

// ---- identities -----------------------------------------------------------------

IdentityReport check_identities(const DiagGreens& dg, const LatticeField& q) {
    const int n = q.n();
    const double L = q.grid.L;
    auto dgamma = fft::derivative(dg.gamma, L, 1);
    auto dgp = fft::derivative(dg.gplus, L, 1);
    auto dgm = fft::derivative(dg.gminus, L, 1);
    IdentityReport rep;
    auto accum = [&](int which, double v) {
        rep.l2[which] += v * v;
        rep.sup[which] = std::max(rep.sup[which], std::fabs(v));
    };
    for (int i = 0; i < n; ++i) {
        accum(0, dgamma[i] - 2.0 * q.v[i] * dg.gplus[i]);
        accum(1, dgp[i] + 2.0 * dg.kappa * dg.gminus[i] - 2.0 * q.v[i] * (1.0 + dg.gamma[i]));
        accum(2, dgm[i] + 2.0 * dg.kappa * dg.gplus[i]);
        accum(3, dg.gamma[i] + 0.5 * dg.gamma[i] * dg.gamma[i] -
                     0.5 * (dg.gplus[i] * dg.gplus[i] - dg.gminus[i] * dg.gminus[i]));
    }
    for (int k = 0; k < 4; ++k) rep.l2[k] = std::sqrt(rep.l2[k] * q.dx());
    return rep;
}

// ---- off-diagonal decay -----------------------------------------------------------

DecayFit offdiag_decay(const LineGreensOracle& oracle) {
    const auto& g = oracle.grid();
    const double kappa = oracle.kappa();
    DecayFit fit;
    fit.threshold = -kappa / 6.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int j = 1; j < g.n; ++j) {
        double u = j * g.dx();
        if (u < 2.0 / kappa || u > 0.5 * g.L) continue;
        double mag = oracle.block(j, 0).norm();  // Frobenius of the 2x2 block
        if (!(mag > 1e-290)) break;              // floating point floor
        double lx = u, ly = std::log(mag);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 4) throw std::runtime_error("offdiag_decay: insufficient dynamic range");
    fit.points = cnt;
    fit.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    fit.pass = fit.slope <= fit.threshold;
    return fit;
}

}  // namespace lab
