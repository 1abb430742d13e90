#include "lqft/grid.hpp"

#include <algorithm>
#include <cmath>

namespace lqft {

double PointGrid::total_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

PointGrid graded_polar_grid(const GradedGridSpec& spec) {
  if (spec.inner_rings < 1 || spec.bands < 0 || spec.rings_per_band < 1 || !(spec.aspect > 0.0) ||
      spec.sector_multiple < 1)
    fail(ErrorKind::config, "graded grid: invalid spec");
  std::vector<double> edges;
  const double h0 = 0.5 / spec.inner_rings;
  for (int i = 0; i <= spec.inner_rings; ++i) edges.push_back(i * h0);
  for (int b = 1; b <= spec.bands; ++b) {
    const double lo = 1.0 - std::ldexp(1.0, -b), hi = 1.0 - std::ldexp(1.0, -b - 1);
    for (int j = 1; j <= spec.rings_per_band; ++j) edges.push_back(lo + (hi - lo) * j / spec.rings_per_band);
  }
  edges.push_back(1.0);

  struct Ring {
    double r, width, area;
    int sectors;
    double r0, r1;
  };
  std::vector<Ring> rings;
  for (size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    if (k == 0) {
      rings.push_back({0.0, b, kPi * b * b, 1, 0.0, b});
      continue;
    }
    const double r = 0.5 * (a + b), w = b - a;
    const int mult = spec.sector_multiple;
    const int nt = std::max(mult, static_cast<int>(std::ceil(kTwoPi * r / (spec.aspect * w) / mult)) * mult);
    rings.push_back({r, w, (b * b - a * a) * kPi / nt, nt, a, b});
  }

  PointGrid g;
  for (size_t k = 0; k < rings.size(); ++k) {
    const Ring& R = rings[k];
    double eps = 0.99 * (1.0 - R.r);
    if (R.sectors > 1) eps = std::min(eps, R.r * std::sin(kPi / R.sectors));
    if (k > 0) eps = std::min(eps, 0.5 * (R.r - rings[k - 1].r));
    if (k + 1 < rings.size()) eps = std::min(eps, 0.5 * (rings[k + 1].r - R.r));
    const double arc = R.sectors > 1 ? kTwoPi * R.r / R.sectors : 0.0;
    const double diam = k == 0 ? 2.0 * R.width : std::hypot(R.width, arc);
    for (int m = 0; m < R.sectors; ++m) {
      const double th = kTwoPi * (m + 0.5) / R.sectors;
      g.points.push_back(k == 0 ? DiskPoint(0.0, 0.0) : DiskPoint::polar(R.r, th));
      g.eps.push_back(eps);
      g.areas.push_back(R.area);
      g.diameter.push_back(diam);
      g.cells.push_back({R.r0, R.r1, kTwoPi * m / R.sectors, kTwoPi * (m + 1) / R.sectors});
    }
  }
  return g;
}

PointGrid square_lattice(double eps, double rho) {
  if (!(eps > 0.0) || !(rho > 0.0) || !(rho + eps < 1.0)) fail(ErrorKind::config, "square lattice: need eps, rho > 0, rho + eps < 1");
  const double s = 2.0 * eps;
  const int n = static_cast<int>(std::ceil(rho / s)) + 1;
  PointGrid g;
  for (int j = -n; j < n; ++j)
    for (int i = -n; i < n; ++i) {
      const double x = s * (i + 0.5), y = s * (j + 0.5);
      if (std::hypot(x, y) > rho) continue;
      g.points.emplace_back(x, y);
      g.eps.push_back(eps);
      g.areas.push_back(s * s);
      g.diameter.push_back(s * std::sqrt(2.0));
    }
  return g;
}

PointGrid exclude_near(const PointGrid& grid, const std::vector<DiskPoint>& marks) {
  PointGrid out;
  for (int i = 0; i < grid.size(); ++i) {
    bool keep = true;
    for (const auto& z : marks)
      if (std::abs(grid.points[i].z() - z.z()) < grid.diameter[i]) keep = false;
    if (!keep) continue;
    out.points.push_back(grid.points[i]);
    out.eps.push_back(grid.eps[i]);
    out.areas.push_back(grid.areas[i]);
    out.diameter.push_back(grid.diameter[i]);
    if (!grid.cells.empty()) out.cells.push_back(grid.cells[i]);
  }
  return out;
}

}  // namespace lqft
