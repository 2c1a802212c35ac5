// Python module exposing the main operations: grids and fields, the exact
// map oracles, energy and EL residual, the solver and continuation driver,
// blow-up analysis, neck diagnostics, the ring identities, and the experiment
// runner. Structs cross the boundary as plain dicts; fields carry their
// samples as numpy arrays.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sulab/blowup.hpp"
#include "sulab/config.hpp"
#include "sulab/energy.hpp"
#include "sulab/error.hpp"
#include "sulab/experiment.hpp"
#include "sulab/field.hpp"
#include "sulab/identities.hpp"
#include "sulab/io.hpp"
#include "sulab/manifold.hpp"
#include "sulab/neck.hpp"
#include "sulab/oracles.hpp"
#include "sulab/solver.hpp"

namespace py = pybind11;
using namespace sulab;

namespace {

py::array_t<double> values_array(const MapField& f) {
  py::array_t<double> a({f.num_nodes(), 3});
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

void set_values(MapField& f, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.size() != static_cast<py::ssize_t>(f.values.size()))
    throw Error("values array has wrong size");
  std::copy(a.data(), a.data() + a.size(), f.values.begin());
}

py::dict report_dict(const ConvergenceReport& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["iters"] = r.iters;
  d["final_energy"] = r.final_energy;
  d["final_grad_norm"] = r.final_grad_norm;
  d["halt_reason"] = r.halt_reason;
  return d;
}

py::dict record_dict(const BlowupRecord& r) {
  py::dict d;
  d["alpha"] = r.alpha;
  d["epsilon"] = r.epsilon;
  d["has_blowup"] = r.has_blowup;
  d["x_alpha"] = py::make_tuple(r.x_alpha[0], r.x_alpha[1]);
  d["lambda_alpha"] = r.lambda_alpha;
  d["max_grad"] = r.max_grad;
  d["mu_hat"] = r.mu_hat;
  d["nu_hat"] = r.nu_hat;
  d["grad_pow"] = r.grad_pow;
  d["E_alpha"] = r.total_E_alpha;
  d["dirichlet"] = r.dirichlet_E;
  d["degree"] = r.degree;
  d["degree_raw"] = r.degree_raw;
  d["converged"] = r.converged;
  d["iters"] = r.iters;
  d["final_grad_norm"] = r.final_grad_norm;
  return d;
}

py::dict identity_dict(const IdentityReport& r) {
  py::dict d;
  d["t"] = r.t;
  d["r"] = r.r;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["residual"] = r.residual;
  d["normalizer"] = r.normalizer;
  d["inner_boundary_term"] = r.inner_boundary_term;
  return d;
}

SolveOptions options_from_kwargs(int max_iters, double grad_tol, double step0,
                                 double momentum, int log_every) {
  SolveOptions so;
  so.max_iters = max_iters;
  so.grad_tol = grad_tol;
  so.step0 = step0;
  so.momentum = momentum;
  so.log_every = log_every;
  return so;
}

}  // namespace

PYBIND11_MODULE(_sulab_core, m) {
  m.doc() = "alpha-energy laboratory core";

  py::register_exception<Error>(m, "SulabError");

  py::class_<TorusGrid>(m, "TorusGrid")
      .def_readonly("n", &TorusGrid::n)
      .def_readonly("side", &TorusGrid::side)
      .def_readonly("h", &TorusGrid::h)
      .def("num_nodes", &TorusGrid::num_nodes)
      .def("measure", &TorusGrid::measure);

  py::class_<PolarGrid>(m, "PolarGrid")
      .def_readonly("n_r", &PolarGrid::n_r)
      .def_readonly("n_theta", &PolarGrid::n_theta)
      .def_readonly("r_min", &PolarGrid::r_min)
      .def_readonly("r_max", &PolarGrid::r_max)
      .def_readonly("radii", &PolarGrid::radii)
      .def("num_nodes", &PolarGrid::num_nodes)
      .def("measure", &PolarGrid::measure);

  py::class_<MapField>(m, "MapField")
      .def("num_nodes", &MapField::num_nodes)
      .def_property("values", &values_array, &set_values)
      .def_property_readonly("is_torus",
                             [](const MapField& f) { return f.grid_kind == GridKind::Torus; })
      .def_readonly("torus", &MapField::torus)
      .def_readonly("polar", &MapField::polar);

  py::class_<EmbeddedManifold, std::shared_ptr<EmbeddedManifold>>(m, "Manifold")
      .def("project", &EmbeddedManifold::project)
      .def("unit_normal", &EmbeddedManifold::unit_normal)
      .def("sff", &EmbeddedManifold::sff)
      .def("exp", &EmbeddedManifold::exp)
      .def("tangent_project", &EmbeddedManifold::tangent_project);

  m.def(
      "make_manifold",
      [](const std::string& kind, const Vec3& axes, double proj_tol) {
        return std::shared_ptr<EmbeddedManifold>(make_manifold(kind, axes, proj_tol));
      },
      py::arg("kind") = "sphere", py::arg("axes") = Vec3{1.0, 1.0, 1.0},
      py::arg("proj_tol") = 1e-10);

  m.def(
      "make_torus_field",
      [](int n, double side) { return make_field(build_torus_grid(n, side)); },
      py::arg("n"), py::arg("side") = 1.0);
  m.def(
      "make_polar_field",
      [](Vec2 center, double r_min, double r_max, int n_r, int n_theta,
         bool dirichlet, bool fix_inner, bool fix_outer) {
        MapField f = make_field(
            build_polar_grid(center, r_min, r_max, n_r, n_theta),
            dirichlet ? BoundaryKind::DirichletRing : BoundaryKind::Periodic);
        f.fix_inner = fix_inner;
        f.fix_outer = fix_outer;
        return f;
      },
      py::arg("center"), py::arg("r_min"), py::arg("r_max"), py::arg("n_r"),
      py::arg("n_theta"), py::arg("dirichlet") = false,
      py::arg("fix_inner") = false, py::arg("fix_outer") = false);

  m.def(
      "fill_bubble",
      [](MapField& f, double lam, Vec2 center, int degree) {
        BubbleMap b{lam, center, degree};
        fill_field(f, [&](Vec2 xy) { return b(xy); });
      },
      py::arg("field"), py::arg("lam") = 1.0,
      py::arg("center") = Vec2{0.0, 0.0}, py::arg("degree") = 1);
  m.def(
      "fill_equator",
      [](MapField& f, Vec2 center) {
        EquatorMap e{center};
        fill_field(f, [&](Vec2 xy) { return e(xy); });
      },
      py::arg("field"), py::arg("center") = Vec2{0.0, 0.0});
  m.def(
      "fill",
      [](MapField& f, const std::function<Vec3(Vec2)>& sampler) {
        fill_field(f, sampler);
      },
      py::arg("field"), py::arg("sampler"));
  m.def("bubble_disk_energy", &BubbleMap::disk_energy, py::arg("R"),
        py::arg("lam") = 1.0);
  m.def("bubble_total_energy", &BubbleMap::total_energy, py::arg("degree"));
  m.def(
      "synthetic_family",
      [](const PolarGrid& grid, double alpha, double lam, double t1, double t2,
         int degree, const Vec3& a_dir, bool has_body_value,
         const Vec3& body_value) {
        SyntheticFamilyParams p;
        p.alpha = alpha;
        p.lambda = lam;
        p.t1 = t1;
        p.t2 = t2;
        p.degree = degree;
        p.a_dir = a_dir;
        p.has_body_value = has_body_value;
        p.body_value = body_value;
        return synthetic_neck_family(p, grid);
      },
      py::arg("grid"), py::arg("alpha") = 1.05, py::arg("lam") = 1e-3,
      py::arg("t1") = 0.985, py::arg("t2") = 0.012, py::arg("degree") = 1,
      py::arg("a_dir") = Vec3{0.0, 1.0, 0.0}, py::arg("has_body_value") = false,
      py::arg("body_value") = Vec3{0.0, 0.0, 1.0});

  m.def("project_field", &project_field, py::arg("field"), py::arg("manifold"));
  m.def("constraint_violation", &constraint_violation, py::arg("field"),
        py::arg("manifold"));

  m.def(
      "alpha_energy",
      [](const MapField& f, double alpha, double eps) {
        EnergyBreakdown eb = alpha_energy(f, alpha, eps);
        py::dict d;
        d["total"] = eb.total;
        d["dirichlet"] = eb.dirichlet;
        d["radial"] = eb.radial;
        d["angular"] = eb.angular;
        d["weight_sup"] = eb.weight_sup;
        return d;
      },
      py::arg("field"), py::arg("alpha"), py::arg("epsilon"));
  m.def(
      "el_residual",
      [](const MapField& f, const EmbeddedManifold& N, double alpha, double eps) {
        ElResidual r = el_residual(f, N, alpha, eps);
        py::dict d;
        d["l2"] = r.l2;
        d["sup"] = r.sup;
        return d;
      },
      py::arg("field"), py::arg("manifold"), py::arg("alpha"), py::arg("epsilon"));

  m.def(
      "minimize",
      [](const MapField& u0, const EmbeddedManifold& N, double alpha, double eps,
         int max_iters, double grad_tol, double step0, double momentum,
         int log_every) {
        auto [u, rep] = minimize_alpha_energy(
            u0, N, alpha, eps,
            options_from_kwargs(max_iters, grad_tol, step0, momentum, log_every));
        return py::make_tuple(u, report_dict(rep));
      },
      py::arg("field"), py::arg("manifold"), py::arg("alpha"), py::arg("epsilon"),
      py::arg("max_iters") = 20000, py::arg("grad_tol") = 1e-8,
      py::arg("step0") = 0.0, py::arg("momentum") = 0.9, py::arg("log_every") = 0);
  m.def(
      "continuation",
      [](const MapField& u0, const EmbeddedManifold& N,
         const std::vector<double>& alphas, double eps, double grad_threshold,
         double resolution_floor, int max_iters, double grad_tol,
         double momentum) {
        ContinuationSchedule sched;
        sched.alphas = alphas;
        sched.epsilon = eps;
        sched.grad_threshold = grad_threshold;
        sched.resolution_floor = resolution_floor;
        sched.solve = options_from_kwargs(max_iters, grad_tol, 0.0, momentum, 0);
        ContinuationResult res = continuation_run(u0, N, sched);
        py::list records;
        for (const BlowupRecord& r : res.records) records.append(record_dict(r));
        py::list fields;
        for (const MapField& f : res.fields) fields.append(f);
        py::dict d;
        d["records"] = records;
        d["fields"] = fields;
        d["halt_reason"] = res.halt_reason;
        return d;
      },
      py::arg("field"), py::arg("manifold"), py::arg("alphas"),
      py::arg("epsilon") = 1.0, py::arg("grad_threshold") = 0.0,
      py::arg("resolution_floor") = 3.0, py::arg("max_iters") = 20000,
      py::arg("grad_tol") = 1e-8, py::arg("momentum") = 0.9);

  m.def(
      "detect_blowup",
      [](const MapField& f, double threshold) -> py::object {
        auto site = detect_blowup(f, threshold);
        if (!site) return py::none();
        py::dict d;
        d["x_alpha"] = py::make_tuple(site->x_alpha[0], site->x_alpha[1]);
        d["lambda_alpha"] = site->lambda_alpha;
        d["max_grad"] = site->max_grad;
        return d;
      },
      py::arg("field"), py::arg("grad_threshold"));
  m.def("estimate_mu_nu", &estimate_mu_nu, py::arg("lambda_alpha"), py::arg("alpha"));
  m.def(
      "map_degree",
      [](const MapField& f) {
        DegreeResult d = map_degree(f);
        return py::make_tuple(d.degree, d.raw);
      },
      py::arg("field"));
  m.def(
      "rescale_bubble",
      [](const MapField& f, Vec2 x, double lam, double R) {
        BubbleExtract e = rescale_bubble(f, x, lam, R);
        py::dict d;
        d["rescaled"] = e.rescaled;
        d["R"] = e.R;
        d["energy_in_R"] = e.energy_in_R;
        d["comparison_error"] = e.comparison_error;
        d["fitted_scale"] = e.fitted_scale;
        d["is_bubble"] = e.is_bubble;
        return d;
      },
      py::arg("field"), py::arg("x_alpha"), py::arg("lambda_alpha"), py::arg("R"));

  py::class_<NeckCurve>(m, "NeckCurve")
      .def_readonly("radii", &NeckCurve::radii)
      .def_readonly("omega", &NeckCurve::omega)
      .def_readonly("speeds", &NeckCurve::speeds)
      .def_readonly("arc_length", &NeckCurve::arc_length)
      .def_readonly("max_ring_oscillation", &NeckCurve::max_ring_oscillation)
      .def("size", &NeckCurve::size);

  m.def("circle_average", &circle_average, py::arg("field"));
  m.def("slice_curve", &slice_curve, py::arg("curve"), py::arg("r_lo"), py::arg("r_hi"));
  m.def(
      "geodesic_residual",
      [](const NeckCurve& c, const EmbeddedManifold& N) {
        GeodesicResidualResult r = geodesic_residual(c, N);
        py::dict d;
        d["sup"] = r.sup;
        d["l2"] = r.l2;
        d["median"] = r.median;
        d["s"] = r.s;
        d["per_point"] = r.per_point;
        return d;
      },
      py::arg("curve"), py::arg("manifold"));
  m.def(
      "log_profile_fit",
      [](const MapField& f, const EmbeddedManifold& N, double alpha, double t,
         double lam, double R, double bubble_energy) {
        NeckProfileFit r = log_profile_fit(f, N, alpha, t, lam, R, bubble_energy);
        py::dict d;
        d["t_alpha"] = r.t_alpha;
        d["a_vec"] = r.a_vec;
        d["normal_discarded"] = r.normal_discarded;
        d["fit_rms"] = r.fit_rms;
        d["predicted_norm"] = r.predicted_norm;
        d["norm_ratio"] = r.norm_ratio;
        return d;
      },
      py::arg("field"), py::arg("manifold"), py::arg("alpha"), py::arg("t_alpha"),
      py::arg("lambda_alpha"), py::arg("R"), py::arg("bubble_energy"));
  m.def(
      "neck_length",
      [](const NeckCurve& c, double nu_hat, double bubble_energy, double lam,
         double t1, double t2) {
        NeckLengthReport r = neck_length_report(c, nu_hat, bubble_energy, lam, t1, t2);
        py::dict d;
        d["measured_length"] = r.measured_length;
        d["predicted_length"] = r.predicted_length;
        d["ratio"] = r.ratio;
        return d;
      },
      py::arg("curve"), py::arg("nu_hat"), py::arg("bubble_energy"),
      py::arg("lambda_alpha"), py::arg("t1"), py::arg("t2"));

  m.def(
      "boundary_identity",
      [](const MapField& f, double alpha, double eps, double t) {
        return identity_dict(boundary_variational_identity(f, alpha, eps, t));
      },
      py::arg("field"), py::arg("alpha"), py::arg("epsilon"), py::arg("t"));
  m.def(
      "pohozaev_identity",
      [](const MapField& f, double alpha, double eps, double t) {
        return identity_dict(pohozaev_identity(f, alpha, eps, t));
      },
      py::arg("field"), py::arg("alpha"), py::arg("epsilon"), py::arg("t"));
  m.def(
      "circle_average_inequality",
      [](const MapField& f) {
        CircleAverageCheck c = circle_average_inequality_check(f);
        py::dict d;
        d["lhs"] = c.lhs;
        d["rhs"] = c.rhs;
        d["ring_violations"] = c.ring_violations;
        return d;
      },
      py::arg("field"));

  m.def("save_field", &save_field, py::arg("field"), py::arg("path_base"));
  m.def("load_field", &load_field, py::arg("path_base"));

  m.def(
      "validate_config",
      [](const std::string& path) { validate_experiment(Config::parse_file(path)); },
      py::arg("path"));
  m.def(
      "run_experiment",
      [](const std::string& cfg_path, const std::string& out_dir) {
        return run_experiment(Config::parse_file(cfg_path), out_dir);
      },
      py::arg("config_path"), py::arg("out_dir"));
  m.def("report_run", &report_run, py::arg("run_dir"));
}
