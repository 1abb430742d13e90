#include "lqft/gmc.hpp"

#include <fmt/format.h>

#include <cmath>

#include "lqft/io.hpp"
#include "lqft/parallel.hpp"

namespace lqft {

double AtomicMeasure::total() const {
  double s = 0.0, c = 0.0;  // Neumaier
  for (const auto& a : atoms) {
    const double t = s + a.mass;
    c += std::abs(s) >= std::abs(a.mass) ? (s - t) + a.mass : (a.mass - t) + s;
    s = t;
  }
  return s + c;
}

void check_subcritical(double gamma) {
  if (!(gamma > 0.0 && gamma < 2.0))
    fail(ErrorKind::parameter, fmt::format("gamma = {} outside (0, 2); gamma = 2 is the critical case", gamma));
}

AtomicMeasure bulk_measure(const FieldRealization& field, double gamma, const std::vector<double>& cell_areas) {
  check_subcritical(gamma);
  if (cell_areas.size() != field.points.size()) fail(ErrorKind::config, "one cell area per field point");
  AtomicMeasure m;
  m.support = SupportKind::bulk;
  m.gamma = gamma;
  m.eps_or_modes = field.eps.empty() ? 0.0 : *std::min_element(field.eps.begin(), field.eps.end());
  m.seed = field.seed;
  const double g2 = 0.5 * gamma * gamma;
  for (int i = 0; i < field.size(); ++i)
    m.atoms.push_back({field.points[i], std::exp(g2 * std::log(field.eps[i]) + gamma * field.values(i)) * cell_areas[i]});
  return m;
}

AtomicMeasure boundary_measure(const BoundaryTrace& trace, double gamma, int n_arcs) {
  check_subcritical(gamma);
  if (n_arcs < 64) fail(ErrorKind::parameter, "boundary_measure: n_arcs >= 64");
  AtomicMeasure m;
  m.support = SupportKind::boundary;
  m.gamma = gamma;
  m.eps_or_modes = trace.n_modes();
  const auto x = trace.values_at_arcs(n_arcs);
  const double shift = -gamma * gamma / 8.0 * (1.0 + trace.variance());
  const double arc = kTwoPi / n_arcs;
  for (int k = 0; k < n_arcs; ++k)
    m.atoms.push_back({DiskPoint::on_circle(kTwoPi * (k + 0.5) / n_arcs), std::exp(0.5 * gamma * x[k] + shift) * arc});
  return m;
}

double integrate(const AtomicMeasure& measure, const std::function<double(const DiskPoint&)>& f) {
  double s = 0.0;
  for (const auto& a : measure.atoms) s += f(a.location) * a.mass;
  return s;
}

AtomicMeasure push_forward(const AtomicMeasure& measure, const MobiusMap& psi) {
  AtomicMeasure out = measure;
  for (auto& a : out.atoms) a.location = psi.apply(a.location);
  return out;
}

void write_measure_csv(const AtomicMeasure& measure, const std::string& csv_path, const std::string& json_path) {
  io::CsvWriter csv(csv_path, {"re", "im", "mass"});
  for (const auto& a : measure.atoms) csv.values(a.location.re(), a.location.im(), a.mass);
  io::json j;
  j["support_kind"] = measure.support == SupportKind::bulk ? "bulk" : "boundary";
  j["gamma"] = measure.gamma;
  j["seed"] = measure.seed;
  j["eps_or_modes"] = measure.eps_or_modes;
  if (measure.critical) j["critical"] = true;
  io::write_json(json_path, j);
}

std::vector<double> bulk_total_masses(const PointGrid& grid, const GaussianSampler& sampler, double gamma,
                                      std::uint64_t seed, std::size_t n_replicas, int workers) {
  check_subcritical(gamma);
  const int m = grid.size();
  std::vector<double> logw(m);
  for (int i = 0; i < m; ++i) logw[i] = 0.5 * gamma * gamma * std::log(grid.eps[i]) + std::log(grid.areas[i]);
  std::vector<double> totals(n_replicas);
  for_each_chunk(n_replicas, workers, [&](std::size_t b, std::size_t e) {
    std::vector<RngStream> streams;
    for (std::size_t r = b; r < e; ++r) streams.emplace_back(seed, stream_id(r, StreamPurpose::bulk));
    const Eigen::MatrixXd x = sampler.sample(streams);
    for (std::size_t r = b; r < e; ++r) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += std::exp(logw[i] + gamma * x(i, static_cast<Eigen::Index>(r - b)));
      totals[r] = s;
    }
  });
  return totals;
}

std::vector<double> boundary_total_masses(int n_modes, int n_arcs, double gamma, std::uint64_t seed,
                                          std::size_t n_replicas, int workers) {
  std::vector<double> totals(n_replicas);
  for_each_chunk(n_replicas, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      RngStream rng(seed, stream_id(r, StreamPurpose::boundary));
      totals[r] = boundary_measure(sample_boundary_trace(n_modes, rng), gamma, n_arcs).total();
    }
  });
  return totals;
}

double bulk_expected_total(const PointGrid& grid, double gamma) {
  double s = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    s += std::exp(-0.5 * gamma * gamma * std::log1p(-grid.points[i].abs2())) * grid.areas[i];
  return s;
}

}  // namespace lqft
