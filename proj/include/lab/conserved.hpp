#pragma once

#include <string>
#include <vector>

#include "lab/dirac.hpp"
#include "lab/grid.hpp"

namespace lab {

/// M(q) = 1/2 int q^2 over one period.
double mass(const LatticeField& q);

/// A(kappa, q) = int q g_- / (2 + gamma); the denominator is >= 1 by the
/// pointwise bound gamma > -1.
double alpha(const LatticeField& q, const DiagGreens& dg);
double alpha(const LatticeField& q, double kappa);

/// H_kappa = 4 kappa^2 M - 4 kappa^3 A(kappa).
double hk_hamiltonian(const LatticeField& q, double kappa);

/// H_mKdV = int (q')^2/2 + q^4/2   (smooth fields only).
double hmkdv(const LatticeField& q);

/// Directional-derivative check of dA/dq = g_-: for each direction f,
/// [A(q+ef) - A(q-ef)]/(2e) vs <f, g_->, swept over epsilons, best agreement
/// reported per direction.
struct GradientCheck {
    struct Entry {
        double fd = 0.0;        // best finite-difference value
        double inner = 0.0;     // <f, g_->
        double best_err = 0.0;  // |fd - inner| at the best epsilon
        double epsilon = 0.0;
        bool pass = false;
    };
    std::vector<Entry> entries;
    bool all_pass() const;
};
GradientCheck alpha_gradient_check(const LatticeField& q, double kappa,
                                   const std::vector<std::vector<double>>& directions,
                                   double abs_tol = 1e-6, double rel_tol = 1e-4);

/// dA/dkappa vs int gamma, central finite difference in kappa.
struct KappaDerivCheck {
    double fd = 0.0;
    double integral_gamma = 0.0;
    double rel_err = 0.0;
};
KappaDerivCheck alpha_kappa_derivative(const LatticeField& q, double kappa,
                                       double eps = 1e-5);

/// Per-trajectory conservation records: times, M, A(kappa_i), H(kappa_i),
/// and relative drifts |v(t) - v(0)| / (1 + |v(0)|).
struct ConservationLedger {
    std::vector<double> kappas;            // tracked spectral parameters
    std::vector<double> times;
    std::vector<double> mass_values;
    std::vector<std::vector<double>> alpha_values;  // [kappa][step]
    std::vector<std::vector<double>> hk_values;     // [kappa][step]

    void record(double t, const LatticeField& q);
    double mass_drift() const;
    double alpha_drift(int which_kappa) const;
    double max_drift() const;
    std::string to_csv() const;
};

}  // namespace lab
