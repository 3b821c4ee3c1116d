#pragma once

#include <string>
#include <vector>

#include "lab/flows.hpp"
#include "lab/gibbs.hpp"
#include "lab/oscillator.hpp"
#include "lab/stats.hpp"
#include "lab/testfunc.hpp"

namespace lab {

struct ExperimentConfig {
    int version = 1;
    std::string subcommand;
    OscillatorSpec oscillator;
    double L = 2.0;
    int n = 256;
    std::string flow_kind = "hk";  // hk | mkdv
    double kappa = 8.0;
    double dt = 1e-3;
    double T = 0.1;
    double nonlinearity_scale = 1.0;  // true-null calibration hook
    double viscosity = 0.0;           // negative control: breaks invariance
    int ensemble_size = 1000;
    uint64_t seed = 1;
    std::string test_functions = "default";
    std::string out_dir = "runs/out";
    std::string field_csv;  // input field for greens/flow when given
    // tolerance overrides
    double picard_tol = 1e-12;
    double greens_tol = 1e-12;
    double conservation_tol = 1e-6;
    int threads = 1;

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json() const;
    void validate() const;
};

/// One statistic of a battery: value vs threshold, with effect size and SE.
struct StatisticResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

struct InvarianceReport {
    std::vector<StatisticResult> statistics;
    int flow_failures = 0;
    int ensemble_size = 0;
    bool aborted = false;  // failure rate above 1%
    bool pass = false;     // all statistics within threshold
    std::string to_json() const;
};
InvarianceReport invariance_test(const ExperimentConfig& cfg);

struct KmsReport {
    std::vector<StatisticResult> statistics;  // per (phi, psi) pair, Re and Im
    bool variance_flag = false;               // relative SE above 20%
    bool pass = false;
    std::string to_json() const;
};
KmsReport kms_check(const ExperimentConfig& cfg);

struct MixingReport {
    double fitted_rate = 0.0;
    double lambda1 = 0.0;
    double rel_error = 0.0;
    double var_q0 = 0.0;         // measured Var q(0)
    double var_q0_oracle = 0.0;  // int y^2 psi0^2
    int fit_points = 0;
    bool pass = false;  // within 15 percent of lambda1
    std::string to_json() const;
};
MixingReport mixing_rate(const ExperimentConfig& cfg);

/// Dispatch a subcommand; writes resolved config, outputs and summary.json
/// under cfg.out_dir.  Returns 0 when all enabled checks pass.
int run(const ExperimentConfig& cfg);

/// Shared helpers for tests and the CLI.
std::shared_ptr<const SpectralData> build_shared_spectrum(const OscillatorSpec& spec);
std::vector<std::vector<double>> sampled_test_functions(const ExperimentConfig& cfg,
                                                        const TorusGrid& grid);

/// Monte Carlo summaries of a periodic field ensemble: site-0 marginal
/// histogram, characteristic functionals over the test library, covariance
/// curve with batch-mean standard errors.
EnsembleStats collect_ensemble_stats(const std::vector<LatticeField>& fields,
                                     const std::vector<std::vector<double>>& phis,
                                     double hist_halfwidth = 3.0, int bins = 64);

}  // namespace lab
