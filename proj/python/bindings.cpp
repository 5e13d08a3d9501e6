#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rtp/core/errors.hpp"
#include "rtp/core/fixed_points.hpp"
#include "rtp/hydro/magnetization.hpp"
#include "rtp/hydro/solver.hpp"
#include "rtp/io/formats.hpp"
#include "rtp/ldp/rate_function.hpp"
#include "rtp/sim/simulator.hpp"
#include "rtp/verify/criteria.hpp"

namespace py = pybind11;
using namespace rtp;

namespace {

py::object to_python(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

nlohmann::json from_python(const py::object& obj) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::optional<PerturbationField> field_arg(const py::object& obj) {
    if (obj.is_none()) return std::nullopt;
    return PerturbationField::from_json(from_python(obj));
}

/// (slices, 2, M) array; layer 0 is sigma = +1.
py::array_t<double> trajectory_array(const DensityTrajectory& traj) {
    const auto k = static_cast<py::ssize_t>(traj.size()), m = static_cast<py::ssize_t>(traj.grid_size());
    py::array_t<double> out({k, py::ssize_t{2}, m});
    auto view = out.mutable_unchecked<3>();
    for (py::ssize_t t = 0; t < k; ++t) {
        for (Spin s : kSpins) {
            const auto l = static_cast<py::ssize_t>(layer(s));
            for (py::ssize_t i = 0; i < m; ++i) view(t, l, i) = traj[static_cast<std::size_t>(t)](static_cast<std::size_t>(i), s);
        }
    }
    return out;
}

DensityTrajectory trajectory_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
                                        double dt) {
    if (values.ndim() != 3 || values.shape(1) != 2) throw ConfigurationError("expected an array of shape (T, 2, M)");
    auto view = values.unchecked<3>();
    std::vector<DensityField> slices;
    for (py::ssize_t t = 0; t < values.shape(0); ++t) {
        DensityField f(static_cast<std::size_t>(values.shape(2)));
        for (Spin s : kSpins) {
            for (py::ssize_t i = 0; i < values.shape(2); ++i) f(static_cast<std::size_t>(i), s) = view(t, layer(s), i);
        }
        slices.push_back(std::move(f));
    }
    return DensityTrajectory(dt, std::move(slices));
}

DensityField field_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
    if (values.ndim() != 2 || values.shape(0) != 2) throw ConfigurationError("expected an array of shape (2, M)");
    auto view = values.unchecked<2>();
    DensityField f(static_cast<std::size_t>(values.shape(1)));
    for (Spin s : kSpins) {
        for (py::ssize_t i = 0; i < values.shape(1); ++i) f(static_cast<std::size_t>(i), s) = view(layer(s), i);
    }
    return f;
}

py::dict simulate(std::size_t n_sites, double t_final, std::uint64_t seed, const SwitchRateFamily& rates,
                  const std::string& initial, const py::object& tilt, const py::object& rn_field,
                  std::vector<double> snapshots) {
    sim::SimulationSpec spec;
    spec.n_sites = n_sites;
    spec.t_final = t_final;
    spec.seed = seed;
    spec.rate_family = rates;
    spec.initial = io::parse_profile(initial);
    spec.tilt = field_arg(tilt);
    spec.radon_nikodym_field = field_arg(rn_field);
    spec.snapshot_times = std::move(snapshots);
    sim::PathRecord path;
    {
        py::gil_scoped_release release;
        path = sim::run_path(spec);
    }
    const auto k = static_cast<py::ssize_t>(path.snapshots.size()), n = static_cast<py::ssize_t>(n_sites);
    py::array_t<std::int64_t> counts({k, py::ssize_t{2}, n});
    auto view = counts.mutable_unchecked<3>();
    for (py::ssize_t t = 0; t < k; ++t) {
        for (Spin s : kSpins) {
            for (py::ssize_t x = 0; x < n; ++x) {
                view(t, layer(s), x) = path.snapshots[static_cast<std::size_t>(t)].count(static_cast<std::size_t>(x), s);
            }
        }
    }
    py::dict out;
    out["snapshot_times"] = path.snapshot_times;
    out["magnetization"] = path.magnetization_series;
    out["counts"] = counts;
    out["jump_counts"] = py::dict(py::arg("active") = path.jump_counts.active,
                                  py::arg("flips_plus_to_minus") = path.jump_counts.flips_plus_to_minus,
                                  py::arg("flips_minus_to_plus") = path.jump_counts.flips_minus_to_plus);
    out["log_radon_nikodym"] = path.log_radon_nikodym ? py::cast(*path.log_radon_nikodym) : py::none();
    out["path_rate"] = path.path_rate ? py::cast(*path.path_rate) : py::none();
    return out;
}

py::dict solve(std::size_t grid, double t_final, const SwitchRateFamily& rates, const std::string& initial,
               const py::object& tilt, std::size_t substeps) {
    hydro::SolverSpec spec;
    spec.grid_size = grid;
    spec.t_final = t_final;
    spec.rate_family = rates;
    spec.initial = DensityField::from_profile(grid, io::parse_profile(initial));
    spec.tilt = field_arg(tilt);
    spec.reaction_substeps = substeps;
    hydro::SolveResult res;
    {
        py::gil_scoped_release release;
        res = hydro::solve_detailed(spec);
    }
    std::vector<double> times;
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) times.push_back(res.trajectory.time(k));
    py::dict out;
    out["times"] = times;
    out["dt"] = res.trajectory.dt();
    out["values"] = trajectory_array(res.trajectory);
    out["magnetization"] = res.magnetization;
    out["mass_drift"] = res.mass_drift;
    out["min_value"] = res.min_value;
    return out;
}

}  // namespace

PYBIND11_MODULE(_rtp_ldp, m) {
    m.doc() = "Run-and-tumble particle simulation, hydrodynamics and large deviations";

    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<StabilityError>(m, "StabilityError", PyExc_RuntimeError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);

    py::class_<SwitchRateFamily>(m, "SwitchRateFamily")
        .def_static("constant", &SwitchRateFamily::constant, py::arg("value") = 1.0)
        .def_static("curie_weiss", &SwitchRateFamily::curie_weiss, py::arg("beta"))
        .def_static("tabulated", &SwitchRateFamily::tabulated, py::arg("m_points"), py::arg("plus_values"),
                    py::arg("minus_values"))
        .def_static("from_dict", [](const py::object& d) { return SwitchRateFamily::from_json(from_python(d)); })
        .def("__call__", [](const SwitchRateFamily& r, int sigma, double mag) {
            if (sigma != 1 && sigma != -1) throw ConfigurationError("sigma must be +1 or -1");
            return r(sigma == 1 ? Spin::plus : Spin::minus, mag);
        }, py::arg("sigma"), py::arg("m"))
        .def("to_dict", [](const SwitchRateFamily& r) { return to_python(r.to_json()); })
        .def_property_readonly("c_min", &SwitchRateFamily::c_min)
        .def_property_readonly("c_max", &SwitchRateFamily::c_max)
        .def_property_readonly("lipschitz", &SwitchRateFamily::lipschitz);

    m.def("curie_weiss_fixed_points", &curie_weiss_fixed_points, py::arg("beta"), py::arg("tol") = 1e-12);

    m.def("integrate_magnetization_ode",
          [](const SwitchRateFamily& rates, double m0, double t_final, double dt) {
              return hydro::integrate_magnetization_ode(rates, m0, t_final, dt).values;
          },
          py::arg("rates"), py::arg("m0"), py::arg("t_final"), py::arg("dt"));

    m.def("simulate", &simulate, py::arg("n_sites"), py::arg("t_final"), py::arg("seed"), py::arg("rates"),
          py::arg("initial") = "uniform(1,1)", py::arg("tilt") = py::none(), py::arg("rn_field") = py::none(),
          py::arg("snapshots") = std::vector<double>{},
          "Simulates one path; counts has shape (snapshots, 2, N) with layer 0 for sigma = +1.");

    m.def("solve", &solve, py::arg("grid"), py::arg("t_final"), py::arg("rates"), py::arg("initial"),
          py::arg("tilt") = py::none(), py::arg("substeps") = 1,
          "Solves the (perturbed) hydrodynamic equation; values has shape (slices, 2, M).");

    m.def("static_rate", [](const py::array_t<double>& a, const py::array_t<double>& b) {
        return ldp::static_rate(field_from_array(a), field_from_array(b));
    }, py::arg("rho_hat"), py::arg("rho_ref"));

    m.def("total_rate",
          [](const py::array_t<double>& values, double dt, const py::array_t<double>& reference,
             const SwitchRateFamily& rates, std::optional<double> epsilon) {
              ldp::RateOptions options;
              options.epsilon = epsilon;
              return to_python(ldp::total_rate(trajectory_from_array(values, dt), field_from_array(reference), rates,
                                               options)
                                   .to_json(false));
          },
          py::arg("values"), py::arg("dt"), py::arg("reference"), py::arg("rates"), py::arg("epsilon") = py::none());

    m.def("run_criterion",
          [](int id, std::uint64_t seed) {
              verify::VerifyOptions options;
              options.seed = seed;
              verify::CriterionResult r;
              {
                  py::gil_scoped_release release;
                  r = verify::run_criterion(id, options);
              }
              return to_python(r.to_json());
          },
          py::arg("id"), py::arg("seed") = verify::VerifyOptions{}.seed);
}
