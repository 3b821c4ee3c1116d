#include "lab/flows.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lab/fft.hpp"

namespace lab {

namespace {

constexpr double GAUSS_C1 = 0.5 - 0.28867513459481287;  // 1/2 - sqrt(3)/6
constexpr double GAUSS_C2 = 0.5 + 0.28867513459481287;
constexpr double GAUSS_A11 = 0.25;
constexpr double GAUSS_A12 = 0.25 - 0.28867513459481287;
constexpr double GAUSS_A21 = 0.25 + 0.28867513459481287;
constexpr double GAUSS_A22 = 0.25;

struct StageWork {
    std::vector<double> K;      // stage derivative (co-moving frame)
    std::vector<double> gamma;  // warm start for the greens fixed point
};

/// One Gauss-2 collocation step of length dt in the co-moving frame.
/// Returns false if the Picard iteration failed to contract.
bool gauss_step(std::vector<double>& v, double kappa, double dt, double L,
                const HkStepOptions& opts, StageWork st[2], int& picard_used) {
    const int n = (int)v.size();
    const double speed = 4.0 * kappa * kappa;
    const double amp = 8.0 * std::pow(kappa, 4) * opts.nonlinearity_scale;
    const double c[2] = {GAUSS_C1, GAUSS_C2};

    if (st[0].K.empty()) {
        // cold start: K_i = F(0, v)
        LatticeField q0;
        q0.grid = TorusGrid(L, n);
        q0.v = v;
        DiagGreens dg = diag_greens_fixed_point(q0, kappa, opts.greens_tol, opts.greens_max_iter);
        if (!dg.converged) return false;
        st[0].gamma = dg.gamma;
        st[1].gamma = dg.gamma;
        st[0].K.resize(n);
        st[1].K.resize(n);
        for (int i = 0; i < n; ++i) st[0].K[i] = st[1].K[i] = amp * dg.gplus[i];
    }

    std::vector<double> Y(n), Knew;
    double prev_inc = std::numeric_limits<double>::infinity();
    int grow = 0;
    for (int it = 1; it <= opts.max_picard; ++it) {
        double inc = 0.0;
        for (int stage = 0; stage < 2; ++stage) {
            const double a0 = (stage == 0) ? GAUSS_A11 : GAUSS_A21;
            const double a1 = (stage == 0) ? GAUSS_A12 : GAUSS_A22;
            for (int i = 0; i < n; ++i)
                Y[i] = v[i] + dt * (a0 * st[0].K[i] + a1 * st[1].K[i]);
            // physical field at the stage time
            double delta = speed * c[stage] * dt;
            LatticeField p;
            p.grid = TorusGrid(L, n);
            p.v = fft::shift(Y, L, delta);
            DiagGreens dg;
            try {
                dg = diag_greens_fixed_point(p, kappa, opts.greens_tol, opts.greens_max_iter,
                                             &st[stage].gamma);
            } catch (const std::runtime_error&) {
                return false;
            }
            if (!dg.converged) return false;
            st[stage].gamma = dg.gamma;
            for (int i = 0; i < n; ++i) dg.gplus[i] *= amp;
            Knew = fft::shift(dg.gplus, L, -delta);
            for (int i = 0; i < n; ++i) {
                inc = std::max(inc, std::fabs(Knew[i] - st[stage].K[i]) * std::fabs(dt));
                st[stage].K[i] = Knew[i];
            }
        }
        picard_used = it;
        if (inc < opts.picard_tol) {
            for (int i = 0; i < n; ++i)
                v[i] += 0.5 * dt * (st[0].K[i] + st[1].K[i]);
            return true;
        }
        if (inc > prev_inc) {
            if (++grow >= 3) return false;  // no contraction at this dt
        } else {
            grow = 0;
        }
        prev_inc = inc;
    }
    return false;
}

}  // namespace

int hk_substeps_for_accuracy(double kappa, double dt, double h_scale) {
    // the co-moving integrand advects the g_+ profile (width ~ 1/2 kappa) at
    // speed 4 kappa^2, so the substep must resolve frequency ~ 8 kappa^3
    double h_max = h_scale / (kappa * kappa * kappa);
    int s = (int)std::ceil(std::fabs(dt) / h_max);
    int pow2 = 1;
    while (pow2 < s) pow2 *= 2;
    return pow2;
}

LatticeField hk_step(const LatticeField& q, double kappa, double dt,
                     const HkStepOptions& opts, HkStepStats* stats) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("hk_step: kappa >= 1");
    if (!q.periodic) throw std::invalid_argument("hk_step: periodic fields only");
    const double L = q.grid.L;
    const double speed = 4.0 * kappa * kappa;
    int substeps = (opts.min_substeps > 0)
                       ? opts.min_substeps
                       : hk_substeps_for_accuracy(kappa, dt, opts.substep_h_scale);
    for (int halve = 0; halve <= opts.max_halvings; ++halve, substeps *= 2) {
        std::vector<double> v = q.v;  // co-moving frame starts at the initial field
        StageWork st[2];
        double h = dt / substeps;
        bool ok = true;
        int picard_total = 0;
        for (int s = 0; s < substeps && ok; ++s) {
            // each substep works in a frame anchored at its own start time
            int used = 0;
            ok = gauss_step(v, kappa, h, L, opts, st, used);
            picard_total += used;
            if (ok) {
                v = fft::shift(v, L, speed * h);  // back to the physical frame
                if (opts.viscosity > 0.0) {
                    auto spec = fft::forward(v);
                    for (int k = 0; k <= (int)v.size() / 2; ++k) {
                        double xi = M_PI * k / L;
                        spec[k] *= std::exp(-opts.viscosity * (1.0 + xi * xi) * std::fabs(h));
                    }
                    v = fft::inverse(spec, (int)v.size());
                }
                // carry the stage data into the next frame as warm starts
                for (int i = 0; i < 2; ++i) {
                    st[i].K = fft::shift(st[i].K, L, speed * h);
                    st[i].gamma = fft::shift(st[i].gamma, L, speed * h);
                }
            }
        }
        if (ok) {
            LatticeField out;
            out.grid = q.grid;
            out.periodic = true;
            out.v = std::move(v);
            if (stats) {
                stats->picard_iterations = picard_total;
                stats->halvings = halve;
                stats->substeps = substeps;
            }
            return out;
        }
    }
    throw std::runtime_error("hk_step: Picard non-contraction persisted after dt halvings");
}

LatticeField mkdv_step(const LatticeField& q, double dt) {
    const int n = q.n();
    const double L = q.grid.L;
    auto nonlin = [&](const std::vector<cplx>& spec) {
        // 2/3-rule dealiasing of the cubic term 6 q^2 q_x = d/dx (2 q^3)
        std::vector<cplx> s = spec;
        const int cut = n / 3;
        for (int k = cut + 1; k <= n / 2; ++k) s[k] = 0.0;
        auto u = fft::inverse(s, n);
        for (int i = 0; i < n; ++i) u[i] = 2.0 * u[i] * u[i] * u[i];
        auto w = fft::forward(u);
        for (int k = 0; k <= n / 2; ++k) {
            double xi = M_PI * k / L;
            w[k] *= cplx(0.0, xi);
            if (k > cut) w[k] = 0.0;
        }
        return w;
    };
    auto espec = [&](double tau) {
        std::vector<cplx> e(n / 2 + 1);
        for (int k = 0; k <= n / 2; ++k) {
            double xi = M_PI * k / L;
            e[k] = std::exp(cplx(0.0, xi * xi * xi * tau));
        }
        return e;
    };
    auto v = fft::forward(q.v);
    v[n / 2] = 0.0;
    auto N1 = nonlin(v);
    double worst = 0.0;
    for (int k = 0; k <= n / 2; ++k) worst = std::max(worst, std::abs(N1[k]));
    if (!(std::isfinite(worst)) || worst * dt > 10.0)
        throw std::runtime_error("mkdv_step: nonlinear increment exceeds threshold (reduce dt)");

    auto E = espec(0.5 * dt), E2 = espec(dt);
    const int m = n / 2 + 1;
    std::vector<cplx> va(m), vb(m), vc(m), out(m);
    for (int k = 0; k < m; ++k) va[k] = E[k] * (v[k] + 0.5 * dt * N1[k]);
    auto N2 = nonlin(va);
    for (int k = 0; k < m; ++k) vb[k] = E[k] * v[k] + 0.5 * dt * N2[k];
    auto N3 = nonlin(vb);
    for (int k = 0; k < m; ++k) vc[k] = E2[k] * v[k] + dt * E[k] * N3[k];
    auto N4 = nonlin(vc);
    for (int k = 0; k < m; ++k)
        out[k] = E2[k] * v[k] +
                 dt / 6.0 * (E2[k] * N1[k] + 2.0 * E[k] * (N2[k] + N3[k]) + N4[k]);
    LatticeField next;
    next.grid = q.grid;
    next.periodic = true;
    next.v = fft::inverse(out, n);
    return next;
}

FlowTrajectory run_hk_flow(const LatticeField& q0, double kappa, double dt, int steps,
                           const FlowOptions& opts) {
    FlowTrajectory tr;
    tr.kind = FlowKind::Hk;
    tr.kappa = kappa;
    tr.dt = dt;
    tr.ledger.kappas = opts.ledger_kappas;
    tr.times.push_back(0.0);
    tr.snapshots.push_back(q0);
    tr.ledger.record(0.0, q0);
    LatticeField q = q0;
    for (int s = 1; s <= steps; ++s) {
        HkStepStats st;
        q = hk_step(q, kappa, dt, opts.hk, &st);
        tr.picard_counts.push_back(st.picard_iterations);
        tr.times.push_back(s * dt);
        tr.snapshots.push_back(q);
        if (s % opts.ledger_stride == 0 || s == steps) tr.ledger.record(s * dt, q);
    }
    tr.conservation_ok = tr.ledger.max_drift() < opts.conservation_tol;
    return tr;
}

FlowTrajectory run_mkdv_flow(const LatticeField& q0, double dt, int steps,
                             const FlowOptions& opts) {
    FlowTrajectory tr;
    tr.kind = FlowKind::MKdV;
    tr.dt = dt;
    tr.ledger.kappas = opts.ledger_kappas;
    tr.times.push_back(0.0);
    tr.snapshots.push_back(q0);
    tr.ledger.record(0.0, q0);
    LatticeField q = q0;
    for (int s = 1; s <= steps; ++s) {
        q = mkdv_step(q, dt);
        tr.times.push_back(s * dt);
        tr.snapshots.push_back(q);
        if (s % opts.ledger_stride == 0 || s == steps) tr.ledger.record(s * dt, q);
    }
    tr.conservation_ok = tr.ledger.max_drift() < opts.conservation_tol;
    return tr;
}

double flow_commutation(const LatticeField& q0, double kappa, double vk, double t,
                        double s, double dt, const HkStepOptions& opts) {
    auto evolve = [&](LatticeField q, double k, double T) {
        int steps = std::max(1, (int)std::llround(T / dt));
        double h = T / steps;
        for (int i = 0; i < steps; ++i) q = hk_step(q, k, h, opts);
        return q;
    };
    LatticeField a = evolve(evolve(q0, kappa, t), vk, s);
    LatticeField b = evolve(evolve(q0, vk, s), kappa, t);
    double acc = 0.0;
    for (int i = 0; i < q0.n(); ++i) acc += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
    return std::sqrt(acc * q0.dx());
}

bool ConvergenceCurve::decreasing() const {
    for (size_t i = 1; i < sup_errors.size(); ++i)
        if (!(sup_errors[i] < sup_errors[i - 1])) return false;
    return sup_errors.size() >= 2;
}

ConvergenceCurve kappa_convergence(const LatticeField& q0, double T,
                                   const std::vector<double>& kappas, double dt_mkdv,
                                   double dt_hk) {
    // reference trajectory with checkpoints
    const int checkpoints = 8;
    std::vector<LatticeField> ref;
    {
        LatticeField q = q0;
        int per = std::max(1, (int)std::llround(T / checkpoints / dt_mkdv));
        double h = T / (checkpoints * per);
        for (int c = 0; c < checkpoints; ++c) {
            for (int i = 0; i < per; ++i) q = mkdv_step(q, h);
            ref.push_back(q);
        }
    }
    ConvergenceCurve curve;
    curve.kappas = kappas;
    for (double kappa : kappas) {
        LatticeField q = q0;
        int per = std::max(1, (int)std::llround(T / checkpoints / dt_hk));
        double h = T / (checkpoints * per);
        double sup = 0.0;
        for (int c = 0; c < checkpoints; ++c) {
            for (int i = 0; i < per; ++i) q = hk_step(q, kappa, h);
            double acc = 0.0;
            for (int j = 0; j < q.n(); ++j)
                acc += (q.v[j] - ref[c].v[j]) * (q.v[j] - ref[c].v[j]);
            sup = std::max(sup, std::sqrt(acc * q.dx()));
        }
        curve.sup_errors.push_back(sup);
    }
    return curve;
}

// ---- green-solution residuals -------------------------------------------------

namespace {

double h2_pairing(const std::vector<double>& resid, const std::vector<double>& phi,
                  double L) {
    // |<phi, r>| / ||phi||_{H^2}
    const int n = (int)resid.size();
    double inner = 0.0;
    for (int i = 0; i < n; ++i) inner += resid[i] * phi[i];
    inner *= 2.0 * L / n;
    auto spec = fft::forward(phi);
    double nrm = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        double xi = M_PI * k / L;
        double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        nrm += w * std::norm(spec[k]) * std::pow(1.0 + xi * xi, 2);
    }
    nrm = std::sqrt(nrm * 2.0 * L);
    return std::fabs(inner) / nrm;
}

}  // namespace

GreenResidualReport green_residual_mkdv(const FlowTrajectory& traj, double vk,
                                        const std::vector<std::vector<double>>& testfns) {
    const int S = (int)traj.snapshots.size();
    if (S < 2) throw std::invalid_argument("green_residual: need >= 2 snapshots");
    const double L = traj.snapshots[0].grid.L;
    const int n = traj.snapshots[0].n();
    std::vector<double> rg(n, 0.0), rgam(n, 0.0);
    const double dt_snap = traj.times[1] - traj.times[0];
    DiagGreens first, last;
    for (int s = 0; s < S; ++s) {
        const LatticeField& q = traj.snapshots[s];
        DiagGreens dg = diag_greens_fixed_point(q, vk);
        if (s == 0) first = dg;
        if (s == S - 1) last = dg;
        auto gm3 = fft::derivative(dg.gminus, L, 3);
        auto gm1 = fft::derivative(dg.gminus, L, 1);
        std::vector<double> X(n), flux(n), Y(n);
        for (int i = 0; i < n; ++i) {
            double q2 = q.v[i] * q.v[i];
            X[i] = -gm3[i] + 6.0 * q2 * gm1[i];
            flux[i] = 6.0 * q2 * (1.0 + dg.gamma[i]) - 12.0 * vk * q.v[i] * dg.gminus[i] -
                      12.0 * vk * vk * dg.gamma[i];
        }
        auto ga3 = fft::derivative(dg.gamma, L, 3);
        auto dflux = fft::derivative(flux, L, 1);
        for (int i = 0; i < n; ++i) Y[i] = -ga3[i] + dflux[i];
        double w = (s == 0 || s == S - 1) ? 0.5 * dt_snap : dt_snap;
        for (int i = 0; i < n; ++i) {
            rg[i] += w * X[i];
            rgam[i] += w * Y[i];
        }
    }
    for (int i = 0; i < n; ++i) {
        rg[i] = last.gminus[i] - first.gminus[i] - rg[i];
        rgam[i] = last.gamma[i] - first.gamma[i] - rgam[i];
    }
    GreenResidualReport rep;
    rep.vk = vk;
    rep.t0 = traj.times.front();
    rep.t1 = traj.times.back();
    for (const auto& phi : testfns) {
        rep.residual_gminus = std::max(rep.residual_gminus, h2_pairing(rg, phi, L));
        rep.residual_gamma = std::max(rep.residual_gamma, h2_pairing(rgam, phi, L));
    }
    return rep;
}

GreenResidualReport green_residual_hk(const FlowTrajectory& traj, double vk,
                                      const std::vector<std::vector<double>>& testfns) {
    if (traj.kind != FlowKind::Hk) throw std::invalid_argument("green_residual_hk: Hk trajectory");
    const double kappa = traj.kappa;
    if (std::fabs(kappa - vk) < 1e-12)
        throw std::invalid_argument("green_residual_hk: probe vk must differ from flow kappa");
    const int S = (int)traj.snapshots.size();
    const double L = traj.snapshots[0].grid.L;
    const int n = traj.snapshots[0].n();
    const double k2 = kappa * kappa, v2 = vk * vk;
    const double denom = k2 - v2;
    std::vector<double> rg(n, 0.0), rgam(n, 0.0);
    DiagGreens first, last;
    for (int s = 0; s < S; ++s) {
        const LatticeField& q = traj.snapshots[s];
        DiagGreens dv = diag_greens_fixed_point(q, vk);
        DiagGreens dk = diag_greens_fixed_point(q, kappa);
        if (s == 0) first = dv;
        if (s == S - 1) last = dv;
        auto gm1 = fft::derivative(dv.gminus, L, 1);
        auto ga1 = fft::derivative(dv.gamma, L, 1);
        std::vector<double> X(n), Y(n), brace(n), prod_r(n), prod_p(n);
        for (int i = 0; i < n; ++i) {
            brace[i] = dk.gplus[i] * (1.0 + dv.gamma[i]) - (1.0 + dk.gamma[i]) * dv.gplus[i];
            X[i] = 4.0 * k2 * gm1[i] - 8.0 * k2 * k2 * vk / denom * brace[i];
            prod_r[i] = dk.gminus[i] * dv.gminus[i];
            prod_p[i] = dk.gplus[i] * dv.gplus[i] - dk.gamma[i] - dv.gamma[i] -
                        dk.gamma[i] * dv.gamma[i];
        }
        auto dr = fft::derivative(prod_r, L, 1);
        auto dp = fft::derivative(prod_p, L, 1);
        for (int i = 0; i < n; ++i)
            Y[i] = 4.0 * k2 * ga1[i] - 8.0 * std::pow(kappa, 5) * vk / (denom * denom) * dr[i] +
                   4.0 * k2 * k2 * (k2 + v2) / (denom * denom) * dp[i];
        double dt_snap = traj.times[1] - traj.times[0];
        double w = (s == 0 || s == S - 1) ? 0.5 * dt_snap : dt_snap;
        for (int i = 0; i < n; ++i) {
            rg[i] += w * X[i];
            rgam[i] += w * Y[i];
        }
    }
    for (int i = 0; i < n; ++i) {
        rg[i] = last.gminus[i] - first.gminus[i] - rg[i];
        rgam[i] = last.gamma[i] - first.gamma[i] - rgam[i];
    }
    GreenResidualReport rep;
    rep.vk = vk;
    rep.t0 = traj.times.front();
    rep.t1 = traj.times.back();
    for (const auto& phi : testfns) {
        rep.residual_gminus = std::max(rep.residual_gminus, h2_pairing(rg, phi, L));
        rep.residual_gamma = std::max(rep.residual_gamma, h2_pairing(rgam, phi, L));
    }
    return rep;
}

bool CancellationCurve::decreasing() const {
    for (size_t i = 1; i < means.size(); ++i)
        if (!(means[i] < means[i - 1])) return false;
    return means.size() >= 2;
}

CancellationCurve gamma_cancellation(const std::vector<LatticeField>& ensemble,
                                     const std::vector<double>& kappas) {
    if (ensemble.empty()) throw std::invalid_argument("gamma_cancellation: empty ensemble");
    CancellationCurve curve;
    curve.kappas = kappas;
    const int n = ensemble[0].n();
    std::vector<double> window(n);
    for (int i = 0; i < n; ++i) {
        double x = ensemble[0].grid.x(i);
        window[i] = std::pow(1.0 + x * x, -4.0);
    }
    for (double kappa : kappas) {
        double sum = 0.0, sum2 = 0.0;
        for (const auto& q : ensemble) {
            DiagGreens dg = diag_greens_fixed_point(q, kappa);
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                double t = window[i] * (kappa * kappa * dg.gamma[i] + 0.5 * q.v[i] * q.v[i]);
                acc += t * t;
            }
            double nrm = std::sqrt(acc * q.dx());
            sum += nrm;
            sum2 += nrm * nrm;
        }
        double N = (double)ensemble.size();
        double mean = sum / N;
        curve.means.push_back(mean);
        curve.std_errs.push_back(std::sqrt(std::max(0.0, sum2 / N - mean * mean) / N));
    }
    return curve;
}

}  // namespace lab
