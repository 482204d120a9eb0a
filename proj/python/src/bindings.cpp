#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tcur/commutator.hpp"
#include "tcur/currents.hpp"
#include "tcur/error.hpp"
#include "tcur/experiments.hpp"
#include "tcur/flat_norm.hpp"
#include "tcur/flow.hpp"
#include "tcur/mollify.hpp"
#include "tcur/pde.hpp"
#include "tcur/uniqueness.hpp"

namespace py = pybind11;
using namespace tcur;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> field_shape(const PeriodicGrid& g) {
  std::vector<py::ssize_t> s{g.n_t()};
  for (int a = 0; a < g.dim(); ++a) s.push_back(g.n());
  return s;
}

// Arrays are (n_t, n) in d = 1 and (n_t, n, n) in d = 2, matching the storage order.
ScalarField to_field(const PeriodicGrid& g, const Array& a, const char* name) {
  const auto expected = field_shape(g);
  bool ok = a.ndim() == static_cast<py::ssize_t>(expected.size());
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = a.shape(static_cast<py::ssize_t>(i)) == expected[i];
  if (!ok) throw py::value_error(std::string(name) + ": expected an array of shape (n_t" + (g.dim() == 2 ? ", n, n)" : ", n)"));
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

VectorField to_vector(const PeriodicGrid& g, const std::vector<Array>& comps, const char* name) {
  if (static_cast<int>(comps.size()) != g.dim())
    throw py::value_error(std::string(name) + ": expected " + std::to_string(g.dim()) + " components");
  std::vector<ScalarField> c;
  for (const Array& a : comps) c.push_back(to_field(g, a, name));
  return VectorField(std::move(c));
}

std::vector<double> to_slice(const PeriodicGrid& g, const Array& a, const char* name) {
  if (static_cast<std::size_t>(a.size()) != g.slice_size() || a.ndim() != g.dim())
    throw py::value_error(std::string(name) + ": expected one spatial slice");
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array to_array(const ScalarField& f) {
  Array out(field_shape(f.grid()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

std::vector<Array> to_arrays(const VectorField& v) {
  std::vector<Array> out;
  for (int j = 0; j < v.dim(); ++j) out.push_back(to_array(v[j]));
  return out;
}

Current1Diffuse to_current(const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec) {
  return Current1Diffuse(to_field(g, f_t, "f_t"), to_vector(g, f_vec, "f_vec"));
}

MollifierKernel make_kernel(const PeriodicGrid& g, double delta, const std::string& kernel, double skew) {
  if (kernel == "bump") return MollifierKernel::bump(g, delta);
  if (kernel == "skewed") return MollifierKernel::skewed(g, delta, skew);
  throw py::value_error("kernel must be 'bump' or 'skewed'");
}

ContinuityScheme parse_scheme(const std::string& s) {
  if (s == "semi-lagrangian") return ContinuityScheme::kSemiLagrangian;
  if (s == "finite-volume") return ContinuityScheme::kFiniteVolume;
  throw py::value_error("scheme must be 'semi-lagrangian' or 'finite-volume'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffuse currents on the periodic space-time slab";

  static py::exception<Error> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kConfig || e.kind() == ErrorKind::kInvalidArgument)
        PyErr_SetString(PyExc_ValueError, e.what());
      else
        numerical_error(e.what());
    }
  });

  py::class_<PeriodicGrid>(m, "Grid")
      .def(py::init<int, int, int>(), py::arg("dim"), py::arg("n"), py::arg("n_t"))
      .def_property_readonly("dim", &PeriodicGrid::dim)
      .def_property_readonly("n", &PeriodicGrid::n)
      .def_property_readonly("n_t", &PeriodicGrid::n_t)
      .def_property_readonly("h", &PeriodicGrid::h)
      .def_property_readonly("dt", &PeriodicGrid::dt)
      .def_property_readonly("shape", [](const PeriodicGrid& g) { return py::tuple(py::cast(field_shape(g))); })
      .def("times", [](const PeriodicGrid& g) {
        std::vector<double> t;
        for (int k = 0; k < g.n_t(); ++k) t.push_back(g.time(k));
        return t;
      })
      .def("centers", [](const PeriodicGrid& g) {
        std::vector<double> x;
        for (int i = 0; i < g.n(); ++i) x.push_back((i + 0.5) * g.h());
        return x;
      })
      .def("__repr__", [](const PeriodicGrid& g) {
        return "Grid(dim=" + std::to_string(g.dim()) + ", n=" + std::to_string(g.n()) + ", n_t=" +
               std::to_string(g.n_t()) + ")";
      });

  m.def(
      "mollify",
      [](const PeriodicGrid& g, const Array& f, double delta, const std::string& kernel, double skew) {
        return to_array(mollify(to_field(g, f, "f"), make_kernel(g, delta, kernel, skew)));
      },
      py::arg("grid"), py::arg("f"), py::arg("delta"), py::arg("kernel") = "bump", py::arg("skew") = 0.5,
      "Spatial periodic convolution with the normalized kernel at scale delta.");

  m.def(
      "kernel_moment",
      [](const PeriodicGrid& g, double delta, int order, const std::string& kernel, double skew) {
        return kernel_moment(make_kernel(g, delta, kernel, skew), order);
      },
      py::arg("grid"), py::arg("delta"), py::arg("order"), py::arg("kernel") = "bump", py::arg("skew") = 0.5);

  m.def(
      "solve_continuity",
      [](const PeriodicGrid& g, const std::vector<Array>& u, const Array& rho0, const std::string& scheme,
         int substeps, int fv_substeps) {
        ContinuityOptions opt;
        opt.substeps = substeps;
        opt.fv_substeps = fv_substeps;
        const ContinuityProblem prob = ContinuityProblem::make(to_vector(g, u, "u"), to_slice(g, rho0, "rho0"));
        return to_array(solve_continuity(prob, parse_scheme(scheme), opt));
      },
      py::arg("grid"), py::arg("u"), py::arg("rho0"), py::arg("scheme") = "semi-lagrangian", py::arg("substeps") = 4,
      py::arg("fv_substeps") = 1);

  m.def(
      "commutator",
      [](const PeriodicGrid& g, const std::vector<Array>& u, const Array& rho, double delta, const std::string& kernel) {
        return to_array(commutator(to_vector(g, u, "u"), to_field(g, rho, "rho"), make_kernel(g, delta, kernel, 0.5)));
      },
      py::arg("grid"), py::arg("u"), py::arg("rho"), py::arg("delta"), py::arg("kernel") = "bump");

  m.def(
      "commutator_sweep",
      [](const PeriodicGrid& g, const std::vector<Array>& u, const Array& rho, const std::vector<double>& deltas,
         const std::string& kernel) {
        SweepOptions opt;
        opt.kernel = kernel;
        const CommutatorReport r = commutator_sweep(to_vector(g, u, "u"), to_field(g, rho, "rho"), deltas, opt);
        py::dict d;
        d["deltas"] = r.delta_values;
        d["l1_norms"] = r.l1_norms;
        d["term_norms"] = r.term_norms;
        d["difference_quotient_norms"] = r.difference_quotient_norms;
        d["fitted_rate"] = r.rate_defined ? py::cast(r.fitted_rate) : py::none();
        d["fit_residual"] = r.rate_defined ? py::cast(r.fit_residual) : py::none();
        d["monotone"] = r.monotone;
        d["vanishing"] = r.vanishing;
        return d;
      },
      py::arg("grid"), py::arg("u"), py::arg("rho"), py::arg("deltas"), py::arg("kernel") = "bump");

  m.def(
      "mass",
      [](const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec) {
        return mass(to_current(g, f_t, f_vec));
      },
      py::arg("grid"), py::arg("f_t"), py::arg("f_vec"));
  m.def(
      "vertical_mass",
      [](const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec) {
        return vertical_mass(to_current(g, f_t, f_vec));
      },
      py::arg("grid"), py::arg("f_t"), py::arg("f_vec"));

  m.def(
      "boundary",
      [](const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec) {
        const BoundaryDistribution b = boundary1(to_current(g, f_t, f_vec));
        const std::vector<py::ssize_t> shape = field_shape(g);
        Array surface(std::vector<py::ssize_t>(shape.begin() + 1, shape.end()));
        std::copy(b.initial_surface.begin(), b.initial_surface.end(), surface.mutable_data());
        return py::make_tuple(to_array(b.interior), surface);
      },
      py::arg("grid"), py::arg("f_t"), py::arg("f_vec"),
      "Boundary of a 1-current: (interior density, density on the initial slice).");

  m.def(
      "boundary_of_two_current",
      [](const PeriodicGrid& g, const std::vector<Array>& F) {
        const Current1Diffuse T = boundary2(Current2Diffuse(to_vector(g, F, "F")));
        return py::make_tuple(to_array(T.f_t), to_arrays(T.f_vec));
      },
      py::arg("grid"), py::arg("F"));

  m.def(
      "primitive_two_current",
      [](const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec) {
        return to_arrays(primitive_two_current(to_current(g, f_t, f_vec)).F);
      },
      py::arg("grid"), py::arg("f_t"), py::arg("f_vec"));

  m.def(
      "horizontal_from_boundary",
      [](const PeriodicGrid& g, const Array& interior) {
        return to_array(horizontal_from_boundary(to_field(g, interior, "g")).f_t);
      },
      py::arg("grid"), py::arg("g"), "Time coefficient -G of the horizontal current with boundary g.");

  m.def(
      "flat_norm",
      [](const PeriodicGrid& g, const Array& f_t, const std::vector<Array>& f_vec, std::size_t max_variables) {
        FlatNormOptions opt;
        opt.max_variables = max_variables;
        const FlatNormCertificate c = flat_norm_lp(to_current(g, f_t, f_vec), opt);
        py::dict d;
        d["value"] = c.value;
        d["dual"] = c.dual;
        d["gap"] = c.gap;
        d["relative_gap"] = c.relative_gap;
        d["iterations"] = c.iterations;
        d["converged"] = c.converged;
        return d;
      },
      py::arg("grid"), py::arg("f_t"), py::arg("f_vec"), py::arg("max_variables") = 8192);

  m.def(
      "straightening_defect",
      [](const PeriodicGrid& g, const std::vector<Array>& u, const Array& rho, double delta) {
        const MollifierKernel k = MollifierKernel::bump(g, delta);
        const VectorField uv = to_vector(g, u, "u");
        const Current1Diffuse Td = regularized_current(to_field(g, rho, "rho"), uv, k);
        const FlowMap flow = compute_flow(mollify(uv, k));
        const Straightening s = straighten(Td, flow);
        return py::make_tuple(s.defect, mass(Td));
      },
      py::arg("grid"), py::arg("u"), py::arg("rho"), py::arg("delta"),
      "(vertical mass of the straightened regularized current, mass of the regularized current).");

  m.def(
      "uniqueness_bounds",
      [](const PeriodicGrid& g, const Array& rho_a, const Array& rho_b, const std::vector<Array>& u,
         const std::vector<double>& deltas) {
        const UniquenessResult r =
            uniqueness_bounds(to_field(g, rho_a, "rho_a"), to_field(g, rho_b, "rho_b"), to_vector(g, u, "u"), deltas);
        py::list rows;
        for (const UniquenessRow& row : r.rows) {
          py::dict d;
          d["delta"] = row.delta;
          d["bound1"] = row.bound1;
          d["bound2"] = row.bound2;
          d["bound3"] = row.bound3;
          d["total"] = row.total;
          rows.append(d);
        }
        py::dict out;
        out["mass_difference"] = r.mass_difference;
        out["boundary_mass"] = r.boundary_mass;
        out["rows"] = rows;
        out["min_total"] = r.min_total;
        out["argmin_delta"] = r.argmin_delta;
        return out;
      },
      py::arg("grid"), py::arg("rho_a"), py::arg("rho_b"), py::arg("u"), py::arg("deltas"));

  m.def("commands", &experiments::command_names);
  m.def(
      "run_experiment",
      [](const std::string& command, const std::string& config, std::optional<std::uint64_t> seed,
         const std::string& base_dir) {
        experiments::Json cfg;
        try {
          cfg = experiments::Json::parse(config);
        } catch (const experiments::Json::parse_error& e) {
          throw py::value_error(std::string("config: ") + e.what());
        }
        experiments::RunOptions opt;
        opt.seed = seed;
        opt.base_dir = base_dir;
        experiments::Outcome o;
        {
          py::gil_scoped_release release;
          o = experiments::run(command, cfg, opt);
        }
        return py::make_tuple(experiments::report_text(o), o.passed());
      },
      py::arg("command"), py::arg("config"), py::arg("seed") = py::none(), py::arg("base_dir") = ".",
      "Runs an experiment from a JSON config string; returns (report JSON text, passed).");
}
