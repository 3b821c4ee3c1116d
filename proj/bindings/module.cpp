#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lab/conserved.hpp"
#include "lab/dirac.hpp"
#include "lab/flows.hpp"
#include "lab/gibbs.hpp"
#include "lab/harness.hpp"
#include "lab/miura.hpp"
#include "lab/oscillator.hpp"
#include "lab/rng.hpp"

namespace py = pybind11;
using namespace lab;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gibbs measures for mKdV, H_kappa flows, and Miura/KdV diagnostics";

    py::class_<TorusGrid>(m, "TorusGrid")
        .def(py::init<double, int>(), py::arg("L"), py::arg("n"))
        .def_readonly("L", &TorusGrid::L)
        .def_readonly("n", &TorusGrid::n)
        .def("dx", &TorusGrid::dx)
        .def("x", &TorusGrid::x);

    py::class_<LatticeField>(m, "LatticeField")
        .def(py::init<>())
        .def(py::init([](const TorusGrid& g, const std::vector<double>& values) {
                 LatticeField f(g);
                 if ((int)values.size() != g.n) throw std::invalid_argument("size mismatch");
                 f.v = values;
                 return f;
             }),
             py::arg("grid"), py::arg("values"))
        .def_readwrite("values", &LatticeField::v)
        .def_readonly("periodic", &LatticeField::periodic)
        .def_property_readonly("grid", [](const LatticeField& f) { return f.grid; })
        .def("l2", &LatticeField::l2)
        .def("max_abs", &LatticeField::max_abs);

    py::class_<OscillatorSpec>(m, "OscillatorSpec")
        .def(py::init([](double mu, double y_max, int mm, int n_eigs) {
                 return OscillatorSpec{mu, y_max, mm, n_eigs};
             }),
             py::arg("mu"), py::arg("y_max") = 6.0, py::arg("m") = 1200,
             py::arg("n_eigs") = 64)
        .def_readwrite("mu", &OscillatorSpec::mu)
        .def_readwrite("y_max", &OscillatorSpec::y_max)
        .def_readwrite("m", &OscillatorSpec::m)
        .def_readwrite("n_eigs", &OscillatorSpec::n_eigs);

    py::class_<SpectralData, std::shared_ptr<SpectralData>>(m, "SpectralData")
        .def_property_readonly("lambdas",
                               [](const SpectralData& sd) { return sd.lambdas; })
        .def_property_readonly("v_shift", [](const SpectralData& sd) { return sd.v_shift; })
        .def("lambda1", &SpectralData::lambda1)
        .def("psi0", &SpectralData::psi0);

    m.def(
        "build_spectrum",
        [](const OscillatorSpec& spec) {
            return std::make_shared<SpectralData>(build_spectrum(spec));
        },
        py::arg("spec"));
    m.def("covariance_oracle", &covariance_oracle);
    m.def("stationary_variance", &stationary_variance);
    m.def("drift_series", &drift_series);

    py::class_<Rng>(m, "Rng")
        .def(py::init<uint64_t, uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
        .def("split", &Rng::split)
        .def("uniform", &Rng::uniform)
        .def("normal", &Rng::normal);

    py::class_<PeriodicSampler>(m, "PeriodicSampler")
        .def(py::init([](std::shared_ptr<SpectralData> sd, double L, int n) {
                 return PeriodicSampler(std::move(sd), L, n);
             }),
             py::arg("spectrum"), py::arg("L"), py::arg("n"))
        .def("sample", [](const PeriodicSampler& s, Rng& rng) { return s.sample(rng); })
        .def("truncation_bound", &PeriodicSampler::truncation_bound);

    py::class_<InfiniteChainSampler>(m, "InfiniteChainSampler")
        .def(py::init([](std::shared_ptr<SpectralData> sd, double spacing) {
                 return InfiniteChainSampler(std::move(sd), spacing);
             }),
             py::arg("spectrum"), py::arg("spacing"))
        .def("sample",
             [](const InfiniteChainSampler& s, int n, Rng& rng) { return s.sample(n, rng); })
        .def("row_sum_defect", &InfiniteChainSampler::row_sum_defect);

    py::class_<DiagGreens>(m, "DiagGreens")
        .def_readonly("kappa", &DiagGreens::kappa)
        .def_readonly("gamma", &DiagGreens::gamma)
        .def_readonly("gplus", &DiagGreens::gplus)
        .def_readonly("gminus", &DiagGreens::gminus)
        .def_readonly("converged", &DiagGreens::converged)
        .def_readonly("iterations", &DiagGreens::iterations)
        .def("quad_residual", &DiagGreens::quad_residual)
        .def("pointwise_bounds", &DiagGreens::pointwise_bounds);

    m.def(
        "diag_greens",
        [](const LatticeField& q, double kappa, double tol, int max_iter) {
            return diag_greens_fixed_point(q, kappa, tol, max_iter);
        },
        py::arg("q"), py::arg("kappa"), py::arg("tol") = 1e-12, py::arg("max_iter") = 200);
    m.def(
        "diag_greens_oracle",
        [](const LatticeField& q, double kappa, int substeps) {
            return LineGreensOracle(q, kappa, substeps).diagonal();
        },
        py::arg("q"), py::arg("kappa"), py::arg("substeps") = 8);

    m.def("mass", &mass);
    m.def("alpha", py::overload_cast<const LatticeField&, double>(&alpha));
    m.def("hk_hamiltonian", &hk_hamiltonian);
    m.def("hmkdv", &hmkdv);

    m.def(
        "hk_step",
        [](const LatticeField& q, double kappa, double dt) { return hk_step(q, kappa, dt); },
        py::arg("q"), py::arg("kappa"), py::arg("dt"));
    m.def("mkdv_step", &mkdv_step, py::arg("q"), py::arg("dt"));
    m.def(
        "flow_commutation",
        [](const LatticeField& q0, double kappa, double vk, double t, double s, double dt) {
            return flow_commutation(q0, kappa, vk, t, s, dt);
        },
        py::arg("q0"), py::arg("kappa"), py::arg("vk"), py::arg("t"), py::arg("s"),
        py::arg("dt"));

    py::class_<KdvField>(m, "KdvField")
        .def_readonly("values", &KdvField::values);
    m.def("miura", &miura);
    m.def("hplus_ground_energy", &hplus_ground_energy);
    py::class_<SchrodingerDiag>(m, "SchrodingerDiag")
        .def_readonly("gs_plus", &SchrodingerDiag::gs_plus)
        .def_readonly("gs_minus", &SchrodingerDiag::gs_minus);
    m.def("schrodinger_diag", &schrodinger_diag);

    py::class_<InjectivityReport>(m, "InjectivityReport")
        .def_readonly("X", &InjectivityReport::X)
        .def_readonly("log_i_plus", &InjectivityReport::log_i_plus)
        .def_readonly("log_i_minus", &InjectivityReport::log_i_minus)
        .def_readonly("cauchy_schwarz_ok", &InjectivityReport::cauchy_schwarz_ok);
    m.def("injectivity_probe", &injectivity_probe);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_static("from_json", &ExperimentConfig::from_json_text)
        .def("to_json", &ExperimentConfig::to_json);
    m.def("run", &run, "dispatch a subcommand on a config");
}
