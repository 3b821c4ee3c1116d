#include "lab/miura.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lab/fft.hpp"

namespace lab {

KdvField miura(const LatticeField& q) {
    KdvField w;
    w.grid = q.grid;
    auto dq = fft::derivative(q.v, q.grid.L, 1);
    auto q2 = fft::dealiased_product(q.v, q.v);
    w.values.resize(q.n());
    for (int i = 0; i < q.n(); ++i) w.values[i] = dq[i] + q2[i];
    return w;
}

SchrodingerDiag schrodinger_diag(const DiagGreens& dg) {
    if (!dg.converged) throw std::runtime_error("schrodinger_diag: greens not converged");
    SchrodingerDiag s;
    s.kappa = dg.kappa;
    s.gs_plus.resize(dg.n());
    s.gs_minus.resize(dg.n());
    for (int i = 0; i < dg.n(); ++i) {
        s.gs_plus[i] = (1.0 + dg.gamma[i] + dg.gplus[i]) / (2.0 * dg.kappa);
        s.gs_minus[i] = (1.0 + dg.gamma[i] - dg.gplus[i]) / (2.0 * dg.kappa);
        if (!(s.gs_plus[i] > 0.0))
            throw std::runtime_error("schrodinger_diag: gs_plus positivity violated upstream");
    }
    return s;
}

double hplus_ground_energy(const KdvField& w) {
    const int n = w.grid.n;
    Eigen::MatrixXd H(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        auto col = fft::derivative(e, w.grid.L, 2);
        for (int i = 0; i < n; ++i) H(i, j) = -col[i];
    }
    for (int i = 0; i < n; ++i) H(i, i) += w.values[i];
    H = 0.5 * (H + H.transpose().eval());  // symmetrize roundoff
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("hplus_ground_energy: eigensolve failed");
    return solver.eigenvalues()[0];
}

namespace {
double h2_pairing(const std::vector<double>& resid, const std::vector<double>& phi, double L) {
    const int n = (int)resid.size();
    double inner = 0.0;
    for (int i = 0; i < n; ++i) inner += resid[i] * phi[i];
    inner *= 2.0 * L / n;
    auto spec = fft::forward(phi);
    double nrm = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        double xi = M_PI * k / L;
        double wgt = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        nrm += wgt * std::norm(spec[k]) * std::pow(1.0 + xi * xi, 2);
    }
    return std::fabs(inner) / std::sqrt(nrm * 2.0 * L);
}
}  // namespace

GreenResidualReport kdv_green_residual(const FlowTrajectory& traj, double kappa,
                                       const std::vector<std::vector<double>>& testfns) {
    const int S = (int)traj.snapshots.size();
    if (S < 2) throw std::invalid_argument("kdv_green_residual: need >= 2 snapshots");
    const double L = traj.snapshots[0].grid.L;
    const int n = traj.snapshots[0].n();
    const double dt_snap = traj.times[1] - traj.times[0];
    std::vector<double> accum(n, 0.0);
    std::vector<double> gs_first, gs_last;
    for (int s = 0; s < S; ++s) {
        const LatticeField& q = traj.snapshots[s];
        DiagGreens dg = diag_greens_fixed_point(q, kappa);
        SchrodingerDiag sg = schrodinger_diag(dg);
        const std::vector<double>& gs = sg.gs_plus;
        if (s == 0) gs_first = gs;
        if (s == S - 1) gs_last = gs;
        // w gs = (q gs)' - q gs' + q^2 gs : derivative moved onto the smooth factor
        std::vector<double> qgs(n), q2gs(n);
        auto dgs = fft::derivative(gs, L, 1);
        for (int i = 0; i < n; ++i) qgs[i] = q.v[i] * gs[i];
        auto dqgs = fft::derivative(qgs, L, 1);
        for (int i = 0; i < n; ++i) q2gs[i] = q.v[i] * q.v[i] * gs[i];
        auto d2gs = fft::derivative(gs, L, 2);
        std::vector<double> flux(n);
        for (int i = 0; i < n; ++i) {
            double wgs = dqgs[i] - q.v[i] * dgs[i] + q2gs[i];
            flux[i] = 2.0 * d2gs[i] - 6.0 * wgs - 12.0 * kappa * kappa * gs[i];
        }
        auto dflux = fft::derivative(flux, L, 1);
        double w = (s == 0 || s == S - 1) ? 0.5 * dt_snap : dt_snap;
        for (int i = 0; i < n; ++i) accum[i] += w * dflux[i];
    }
    std::vector<double> resid(n);
    for (int i = 0; i < n; ++i) resid[i] = gs_last[i] - gs_first[i] - accum[i];
    GreenResidualReport rep;
    rep.vk = kappa;
    rep.t0 = traj.times.front();
    rep.t1 = traj.times.back();
    for (const auto& phi : testfns)
        rep.residual_gminus = std::max(rep.residual_gminus, h2_pairing(resid, phi, L));
    rep.residual_gamma = rep.residual_gminus;
    return rep;
}

WhitenoiseReport whitenoise_discriminator(const std::vector<KdvField>& ws,
                                          const std::vector<double>& phi, double lambda,
                                          Rng& rng) {
    if (ws.empty()) throw std::invalid_argument("whitenoise_discriminator: empty ensemble");
    const auto& grid = ws[0].grid;
    const int n = grid.n;
    if ((int)phi.size() != n) throw std::invalid_argument("whitenoise_discriminator: phi size");
    const double dx = grid.dx();
    double phin = 0.0;
    for (double p : phi) phin = std::max(phin, std::fabs(p));

    WhitenoiseReport rep;
    rep.lambda = lambda;
    rep.samples = (int)ws.size();
    if (!(phin > 0.0)) return rep;  // phi == 0: both exponential averages are 1
    auto dphi = fft::derivative(phi, grid.L, 1);
    for (int i = 0; i < n; ++i) {
        rep.grad_norm_sq += dphi[i] * dphi[i];
        rep.phi4_norm += std::pow(phi[i], 4);
    }
    rep.grad_norm_sq *= dx;
    rep.phi4_norm *= dx;

    // (i) pointwise certificate and lambda-exponential average, Miura side
    double m1 = 0.0, m2 = 0.0;
    for (const auto& w : ws) {
        double inner = 0.0;
        for (int i = 0; i < n; ++i) inner += phi[i] * phi[i] * w.values[i];
        inner *= dx;
        if (inner < -rep.grad_norm_sq - 1e-10) ++rep.certificate_violations;
        double v = std::exp(-lambda * inner);
        m1 += v;
        m2 += v * v;
    }
    double mmean = m1 / ws.size();
    double mvar = std::max(0.0, m2 / ws.size() - mmean * mmean);
    rep.miura_log_avg = std::log(mmean);
    rep.miura_log_se = std::sqrt(mvar / ws.size()) / mmean;  // delta method
    rep.miura_log_bound = lambda * rep.grad_norm_sq;

    // (ii) matched white-noise ensemble: <phi^2, wn> ~ N(0, ||phi||_4^4)
    const double sd = std::sqrt(rep.phi4_norm);
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < rep.samples; ++k) {
        double x = sd * rng.normal();
        if (x < -rep.grad_norm_sq) ++rep.wn_certificate_violations;
        double v = std::exp(-lambda * x);
        s1 += v;
        s2 += v * v;
    }
    double mean = s1 / rep.samples;
    double var = std::max(0.0, s2 / rep.samples - mean * mean);
    rep.wn_log_avg = std::log(mean);
    rep.wn_log_se = std::sqrt(var / rep.samples) / mean;
    rep.wn_log_predicted = 0.5 * lambda * lambda * rep.phi4_norm;
    rep.separated =
        (rep.wn_log_avg - 3.0 * rep.wn_log_se > rep.miura_log_avg + 3.0 * rep.miura_log_se) &&
        (rep.miura_log_avg <= rep.miura_log_bound + 1e-12) &&
        (rep.certificate_violations == 0);
    return rep;
}

InjectivityReport injectivity_probe(const LatticeField& line, double X) {
    if (line.periodic) throw std::invalid_argument("injectivity_probe: line sample expected");
    const double dx = line.dx();
    const int need = (int)std::llround(X / dx);
    if (need + 1 > line.n()) throw std::invalid_argument("injectivity_probe: sample shorter than X");
    // c(s) = 2 int_0^s q, trapezoid on the chain lattice
    std::vector<double> c(need + 1, 0.0);
    for (int j = 1; j <= need; ++j)
        c[j] = c[j - 1] + dx * (line.v[j - 1] + line.v[j]);  // 2 * trapezoid
    // I+- = sum_j w_j e^{-+ c_j} with trapezoid weights; log-sum-exp
    auto logsum = [&](double sign) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j <= need; ++j) mx = std::max(mx, sign * c[j]);
        double s = 0.0;
        for (int j = 0; j <= need; ++j) {
            double w = (j == 0 || j == need) ? 0.5 : 1.0;
            s += w * std::exp(sign * c[j] - mx);
        }
        return mx + std::log(s * dx);
    };
    InjectivityReport rep;
    rep.X = X;
    rep.log_i_plus = logsum(-1.0);
    rep.log_i_minus = logsum(+1.0);
    rep.log_cs_floor = 2.0 * std::log(X);
    rep.cauchy_schwarz_ok = rep.log_i_plus + rep.log_i_minus >= rep.log_cs_floor - 1e-12;
    return rep;
}

}  // namespace lab
