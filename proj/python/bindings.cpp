#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lqft/common.hpp"
#include "lqft/critical_gmc.hpp"
#include "lqft/disk_geometry.hpp"
#include "lqft/gmc.hpp"
#include "lqft/liouville.hpp"
#include "lqft/planar_maps.hpp"

namespace py = pybind11;
using namespace lqft;

namespace {

DiskPoint pt(cplx z) { return DiskPoint(z); }

// Insertions from python: bulk as [(z, alpha)], boundary as [(theta, beta)].
InsertionSet make_insertions(double gamma, double mu, double mu_boundary,
                             const std::vector<std::pair<cplx, double>>& bulk,
                             const std::vector<std::pair<double, double>>& boundary) {
  InsertionSet ins;
  ins.params = {gamma, mu, mu_boundary};
  for (const auto& [z, a] : bulk) ins.bulk.push_back({pt(z), a});
  for (const auto& [t, b] : boundary) ins.boundary.push_back({DiskPoint::on_circle(t), b});
  return ins;
}

}  // namespace

PYBIND11_MODULE(lqft, m) {
  m.doc() = "Liouville quantum field theory on the unit disk";

  static py::exception<Error> err(m, "LqftError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(err, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  // geometry
  m.def("green", [](cplx x, cplx y) { return green(pt(x), pt(y)); });
  m.def("green_regularized", [](cplx x, cplx y, double eps) { return green_regularized(pt(x), pt(y), eps); });
  m.def("poincare_density", [](cplx x) { return poincare_density(pt(x)); });
  m.def("mobius", [](cplx a, double alpha, cplx x) { return MobiusMap(a, alpha).apply(x); });
  m.def("mobius_derivative", [](cplx a, double alpha, cplx x) { return MobiusMap(a, alpha).derivative(x); });

  // chaos
  m.def(
      "bulk_total_masses",
      [](double gamma, std::uint64_t seed, std::size_t n_replicas, int workers) {
        const ChaosBackground bg(ChaosSpec{});
        return bulk_total_masses(bg.grid(), bg.sampler(), gamma, seed, n_replicas, workers);
      },
      py::arg("gamma"), py::arg("seed"), py::arg("n_replicas"), py::arg("workers") = 1,
      "Total bulk chaos masses on the default graded grid.");
  m.def("boundary_total_masses", &boundary_total_masses, py::arg("n_modes"), py::arg("n_arcs"), py::arg("gamma"),
        py::arg("seed"), py::arg("n_replicas"), py::arg("workers") = 1);
  m.def("seneta_heyde_factor", &seneta_heyde_factor);
  m.def("seneta_heyde_boundary_factor", &seneta_heyde_boundary_factor);
  m.def(
      "moment_diagnostic",
      [](const std::vector<double>& totals, double q) {
        const auto d = moment_diagnostic(totals, q);
        return py::dict(py::arg("moment") = d.moment, py::arg("se") = d.se,
                        py::arg("outside_guarantee") = d.outside_guarantee);
      },
      py::arg("totals"), py::arg("q"));
  m.def(
      "bulk_critical_ladder",
      [](double rho, int k_min, int k_max, std::size_t replicas, std::uint64_t seed, int workers) {
        const auto L = bulk_critical_ladder(rho, k_min, k_max, replicas, seed, workers);
        return py::dict(py::arg("scale") = L.scale, py::arg("normalized") = L.normalized, py::arg("plain") = L.plain);
      },
      py::arg("rho"), py::arg("k_min"), py::arg("k_max"), py::arg("replicas"), py::arg("seed"), py::arg("workers") = 1);

  // correlation functions
  using Bulk = std::vector<std::pair<cplx, double>>;
  using Boundary = std::vector<std::pair<double, double>>;
  const auto def_ins = [&m](const char* name, auto fn) {
    m.def(
        name,
        [fn](double g, double mu, double mub, const Bulk& bulk, const Boundary& bd) {
          return fn(make_insertions(g, mu, mub, bulk, bd));
        },
        py::arg("gamma"), py::arg("mu") = 1.0, py::arg("mu_boundary") = 0.0, py::arg("bulk") = Bulk{},
        py::arg("boundary") = Boundary{});
  };
  def_ins("seiberg_check", [](const InsertionSet& ins) {
    const auto v = seiberg_check(ins);
    return py::dict(py::arg("admissible") = v.admissible, py::arg("bound1_ok") = v.bound1_ok,
                    py::arg("bound2_ok") = v.bound2_ok, py::arg("bound3_ok") = v.bound3_ok,
                    py::arg("s_total") = v.s_total, py::arg("findings") = v.findings());
  });
  def_ins("volume_law_params", [](const InsertionSet& ins) {
    const auto p = volume_law_params(ins);
    return std::make_pair(p.shape, p.rate);
  });
  def_ins("log_constant", [](const InsertionSet& ins) { return log_constant(ins); });
  m.def(
      "partition_estimate",
      [](double g, double mu, double mub, const Bulk& bulk, const Boundary& bd, std::size_t n_replicas, std::uint64_t seed, int workers) {
        const ChaosBackground bg(ChaosSpec{});
        const auto e = partition_estimate(make_insertions(g, mu, mub, bulk, bd), bg, n_replicas, seed, workers);
        return py::dict(py::arg("value") = e.value, py::arg("std_error") = e.std_error,
                        py::arg("log_value") = e.log_value, py::arg("quadrature_value") = e.quadrature_value,
                        py::arg("closed_form_value") = e.closed_form_value, py::arg("replicas") = e.replicas);
      },
      py::arg("gamma"), py::arg("mu"), py::arg("mu_boundary"), py::arg("bulk"), py::arg("boundary"),
      py::arg("n_replicas"), py::arg("seed"), py::arg("workers") = 1);

  // planar maps
  m.def(
      "count_exact", [](long n, long p) { return count_exact(n, p).decimal; },
      "Exact number of quadrangulations with n faces and boundary length 2p, as a decimal string.");
  m.def("count_log", [](long n, long p) { return count_exact(n, p).log_count; });
  m.def("count_asymptotic", &count_asymptotic);
  m.def(
      "boltzmann_sample",
      [](double a, double mu, double mu_boundary, std::uint64_t seed, std::size_t n_draws) {
        BoltzmannConfig cfg;
        cfg.a = a;
        cfg.mu = mu;
        cfg.mu_boundary = mu_boundary;
        return boltzmann_sample_batch(BoltzmannLaw(cfg), seed, n_draws);
      },
      py::arg("a"), py::arg("mu"), py::arg("mu_boundary"), py::arg("seed"), py::arg("n_draws"));
}
