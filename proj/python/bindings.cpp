#include "circadian/config.hpp"
#include "circadian/mfg.hpp"
#include "circadian/oracle.hpp"
#include "circadian/oracle_check.hpp"
#include "circadian/recovery.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace circadian;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array(const SliceMatrix& m) {
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())};
    return py::array_t<double>(shape, m.data().data());
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

RunConfig make_config(const py::dict& overrides) {
    RunConfig cfg;
    for (const auto& [k, v] : overrides) set_config_value(cfg, py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
    cfg.validate();
    return cfg;
}

py::dict report_dict(const RecoveryReport& r) {
    py::dict d;
    d["tau_w_hours"] = r.tau_w;
    d["tau_z_hours"] = r.tau_z;
    d["f_alpha"] = r.f_alpha;
    d["f_osc"] = r.f_osc;
    d["f_sun"] = r.f_sun;
    d["f_total"] = r.f_total;
    d["times"] = to_array(r.times);
    d["w2"] = to_array(r.w2_path);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mean-field-game model of circadian oscillators and jet-lag recovery.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<ErgodicSolution>(m, "ErgodicSolution")
        .def_property_readonly("mu", [](const ErgodicSolution& s) { return to_array(s.mu.values()); })
        .def_property_readonly("U", [](const ErgodicSolution& s) { return to_array(s.U.values()); })
        .def_property_readonly("beta", [](const ErgodicSolution& s) { return to_array(s.beta.values()); })
        .def_readonly("lambda_", &ErgodicSolution::lambda)
        .def_readonly("iterations", &ErgodicSolution::iterations)
        .def_property_readonly("n", [](const ErgodicSolution& s) { return s.grid.size(); })
        .def_property_readonly("outcome", [](const ErgodicSolution& s) { return std::string(to_string(s.outcome.kind)); })
        .def_property_readonly("reason", [](const ErgodicSolution& s) { return std::string(to_string(s.outcome.reason)); })
        .def("__repr__", [](const ErgodicSolution& s) {
            return "<ErgodicSolution " + std::string(to_string(s.outcome.kind)) + " n=" + std::to_string(s.grid.size()) +
                   ">";
        });

    m.def(
        "solve_ergodic",
        [](const py::dict& config) {
            const RunConfig cfg = make_config(config);
            py::gil_scoped_release release;
            return solve_ergodic(cfg.grid(), cfg.home(), {cfg.method, cfg.scheme, cfg.eps, cfg.max_iter});
        },
        py::arg("config") = py::dict(),
        "Stationary problem at the home zone. `config` holds config-file keys, values as strings or numbers.");

    m.def(
        "recover_ergodic",
        [](const ErgodicSolution& s, int p_hours, double horizon_hours) {
            RecoveryOptions o;
            o.horizon_hours = horizon_hours;
            auto [path, rep] = [&] {
                py::gil_scoped_release release;
                auto path = run_recovery(s, time_zone_angle(p_hours, s.params.omega_S), o);
                auto rep = report_recovery(path, s);
                return std::pair{std::move(path), std::move(rep)};
            }();
            py::dict d = report_dict(rep);
            d["densities"] = to_array(path.samples.densities);
            d["mass_drift"] = path.mass_drift;
            d["dt"] = path.dt;
            return d;
        },
        py::arg("solution"), py::arg("p_hours"), py::arg("horizon_hours") = 480.0,
        "Travellers keep the rotated ergodic control; hourly samples.");

    m.def(
        "recover_mfg",
        [](const ErgodicSolution& s, int p_hours, double T_hours, double eps, long max_iter) {
            MfgOptions o;
            o.T_hours = T_hours;
            o.eps = eps;
            o.max_iter = max_iter;
            auto [path, rep] = [&] {
                py::gil_scoped_release release;
                auto path = solve_recovery_mfg(s, time_zone_angle(p_hours, s.params.omega_S), o);
                auto rep = report_recovery(path, s);
                return std::pair{std::move(path), std::move(rep)};
            }();
            py::dict d = report_dict(rep);
            const auto sampled = path.sampled(1.0);
            d["densities"] = to_array(sampled.densities);
            d["controls"] = to_array(sampled.controls);
            d["converged"] = path.converged;
            d["iterations"] = path.iterations;
            d["bound"] = path.bound;
            return d;
        },
        py::arg("solution"), py::arg("p_hours"), py::arg("T_hours") = 2400.0, py::arg("eps") = 1e-5,
        py::arg("max_iter") = 500, "Finite-horizon forward-backward recovery.");

    m.def(
        "circular_w2",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            const auto va = from_array(a), vb = from_array(b);
            if (va.size() != vb.size() || va.size() < 3) throw std::invalid_argument("densities must share a length >= 3");
            return circular_w2(va, vb, PeriodicGrid(static_cast<int>(va.size())));
        },
        py::arg("a"), py::arg("b"), "W2 on the circle between two grid densities.");

    m.def(
        "order_parameter",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
            const auto v = from_array(a);
            if (v.size() < 3) throw std::invalid_argument("density needs at least 3 points");
            return order_parameter(v, PeriodicGrid(static_cast<int>(v.size())));
        },
        py::arg("mu"));

    m.def("mathieu_a0", &mathieu_char_value, py::arg("q"), "Characteristic value of the lowest even Mathieu mode.");

    m.def(
        "special_case",
        [](double F, double sigma, int n) {
            const auto s = special_case_solution(F, sigma, PeriodicGrid(n));
            py::dict d;
            d["q"] = s.q;
            d["mu"] = to_array(s.mu_K0.values());
            d["dV"] = to_array(s.dV_K0);
            d["lambda_"] = s.lambda_K0;
            return d;
        },
        py::arg("F"), py::arg("sigma"), py::arg("n") = 120, "Closed-form stationary solution for K = 0, omega_0 = omega_S.");

    m.def(
        "oracle_check",
        [](const py::dict& config) {
            const RunConfig cfg = make_config(config);
            OracleCheckReport rep;
            {
                py::gil_scoped_release release;
                rep = oracle_check(cfg);
            }
            return py::make_tuple(rep.all_pass(), rep.render());
        },
        py::arg("config") = py::dict());
}
