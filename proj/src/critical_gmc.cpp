#include "lqft/critical_gmc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "lqft/parallel.hpp"
#include "lqft/stats.hpp"

namespace lqft {

void EpsLadder::validate() const {
  if (eps.empty()) fail(ErrorKind::parameter, "empty eps ladder");
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < 1.0)) fail(ErrorKind::parameter, "eps ladder values must lie in (0, 1)");
    if (i && !(eps[i] < eps[i - 1])) fail(ErrorKind::parameter, "eps ladder must be strictly decreasing");
  }
}

EpsLadder EpsLadder::dyadic(int k_min, int k_max) {
  EpsLadder l;
  for (int k = k_min; k <= k_max; ++k) l.eps.push_back(std::ldexp(1.0, -k));
  l.validate();
  return l;
}

double seneta_heyde_factor(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::parameter, fmt::format("eps = {} outside (0, 1)", eps));
  return std::sqrt(-std::log(eps)) * eps * eps;
}

double seneta_heyde_boundary_factor(int n_modes) {
  if (n_modes < 2) fail(ErrorKind::parameter, "boundary factor needs N >= 2");
  return std::sqrt(std::log(static_cast<double>(n_modes))) / n_modes;
}

AtomicMeasure seneta_heyde_bulk(const FieldRealization& field, double eps, const std::vector<double>& cell_areas) {
  const double f = seneta_heyde_factor(eps);
  if (cell_areas.size() != field.points.size()) fail(ErrorKind::config, "one cell area per field point");
  AtomicMeasure m;
  m.support = SupportKind::bulk;
  m.gamma = 2.0;
  m.eps_or_modes = eps;
  m.seed = field.seed;
  m.critical = true;
  for (int i = 0; i < field.size(); ++i)
    m.atoms.push_back({field.points[i], f * std::exp(2.0 * field.values(i)) * cell_areas[i]});
  return m;
}

AtomicMeasure seneta_heyde_boundary(const BoundaryTrace& trace, int n_arcs) {
  if (trace.n_modes() < 64) fail(ErrorKind::parameter, "seneta_heyde_boundary: N >= 64");
  if (n_arcs < 64) fail(ErrorKind::parameter, "seneta_heyde_boundary: n_arcs >= 64");
  const double var = trace.variance();
  const double pre = std::sqrt(0.5 * var) * kTwoPi / n_arcs;
  const auto x = trace.values_at_arcs(n_arcs);
  AtomicMeasure m;
  m.support = SupportKind::boundary;
  m.gamma = 2.0;
  m.eps_or_modes = trace.n_modes();
  m.critical = true;
  for (int k = 0; k < n_arcs; ++k)
    m.atoms.push_back({DiskPoint::on_circle(kTwoPi * (k + 0.5) / n_arcs), pre * std::exp(x[k] - 0.5 * var)});
  return m;
}

MomentDiagnostic moment_diagnostic(const std::vector<double>& totals, double q) {
  if (!(q > 0.0)) fail(ErrorKind::parameter, "moment_diagnostic: q must be positive");
  if (totals.size() < 100) fail(ErrorKind::parameter, "moment_diagnostic: need at least 100 replicas");
  std::vector<double> p(totals.size());
  for (size_t i = 0; i < totals.size(); ++i) p[i] = std::pow(totals[i], q);
  const auto jk = stats::jackknife(p, [](const std::vector<double>& v) { return stats::sum(v) / v.size(); });
  return {jk.estimate, jk.se, q >= 1.0};
}

MomentDiagnostic moment_diagnostic(const std::vector<AtomicMeasure>& measures, double q) {
  std::vector<double> t;
  for (const auto& m : measures) t.push_back(m.total());
  return moment_diagnostic(t, q);
}

LadderResult bulk_critical_ladder(double rho, int k_min, int k_max, std::size_t replicas, std::uint64_t seed,
                                  int workers) {
  const auto ladder = EpsLadder::dyadic(k_min, k_max);
  const size_t levels = ladder.eps.size();
  std::vector<DiskPoint> pts;
  std::vector<double> eps;
  std::vector<size_t> offset{0};
  for (double e : ladder.eps) {
    const auto g = square_lattice(e, rho);
    pts.insert(pts.end(), g.points.begin(), g.points.end());
    eps.insert(eps.end(), g.eps.begin(), g.eps.end());
    offset.push_back(pts.size());
  }
  if (pts.size() > 8192) fail(ErrorKind::config, fmt::format("critical ladder needs {} points (> 8192)", pts.size()));
  const GaussianSampler sampler(regularized_covariance(pts, eps, CovarianceRule::circle_average));

  LadderResult res;
  res.scale = ladder.eps;
  res.normalized.assign(levels, std::vector<double>(replicas));
  res.plain.assign(levels, std::vector<double>(replicas));
  for_each_chunk(replicas, workers, [&](size_t b, size_t e) {
    std::vector<RngStream> streams;
    for (size_t r = b; r < e; ++r) streams.emplace_back(seed, stream_id(r, StreamPurpose::bulk));
    const Eigen::MatrixXd x = sampler.sample(streams);
    for (size_t l = 0; l < levels; ++l) {
      const double e2 = ladder.eps[l] * ladder.eps[l];
      const double area = 4.0 * e2;
      const double sh = std::sqrt(-std::log(ladder.eps[l]));
      for (size_t r = b; r < e; ++r) {
        double s = 0.0;
        for (size_t i = offset[l]; i < offset[l + 1]; ++i)
          s += std::exp(2.0 * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r - b)));
        res.plain[l][r] = e2 * area * s;
        res.normalized[l][r] = sh * e2 * area * s;
      }
    }
  });
  return res;
}

LadderResult boundary_critical_ladder(const std::vector<int>& modes, int n_arcs, std::size_t replicas,
                                      std::uint64_t seed, int workers) {
  if (modes.empty() || !std::is_sorted(modes.begin(), modes.end()))
    fail(ErrorKind::parameter, "boundary ladder: mode counts must be increasing");
  const size_t levels = modes.size();
  LadderResult res;
  for (int n : modes) res.scale.push_back(n);
  res.normalized.assign(levels, std::vector<double>(replicas));
  res.plain.assign(levels, std::vector<double>(replicas));
  for_each_chunk(replicas, workers, [&](size_t b, size_t e) {
    for (size_t r = b; r < e; ++r) {
      RngStream rng(seed, stream_id(r, StreamPurpose::boundary));
      const auto full = sample_boundary_trace(modes.back(), rng);
      for (size_t l = 0; l < levels; ++l) {
        const auto m = seneta_heyde_boundary(full.truncated(modes[l]), n_arcs);
        const double t = m.total();
        res.normalized[l][r] = t;
        res.plain[l][r] = t / std::sqrt(0.5 * truncated_variance(modes[l]));
      }
    }
  });
  return res;
}

}  // namespace lqft
