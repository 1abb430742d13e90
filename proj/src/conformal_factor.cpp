#include "lqft/conformal_factor.hpp"

#include <cmath>
#include <fmt/format.h>

namespace lqft {

namespace {

void check_grid(const PolarGrid& g) {
  if (g.n_r < 16 || g.n_theta < 16)
    fail(ErrorKind::config, fmt::format("polar grid {}x{} too coarse (need >= 16 per direction)", g.n_r, g.n_theta));
}

void check_same(const ConformalFactor& a, const ConformalFactor& b) {
  if (!(a.grid() == b.grid())) fail(ErrorKind::config, "conformal factors live on different grids");
}

}  // namespace

ConformalFactor::ConformalFactor(PolarGrid grid, std::vector<double> interior, std::vector<double> boundary)
    : grid_(grid), interior_(std::move(interior)), boundary_(std::move(boundary)) {
  check_grid(grid_);
  if (interior_.size() != static_cast<size_t>(grid_.n_r) * grid_.n_theta ||
      boundary_.size() != static_cast<size_t>(grid_.n_theta))
    fail(ErrorKind::config, "conformal factor size does not match its grid");
  for (double v : interior_)
    if (!std::isfinite(v)) fail(ErrorKind::domain, "conformal factor not finite");
  for (double v : boundary_)
    if (!std::isfinite(v)) fail(ErrorKind::domain, "conformal factor not finite");
}

ConformalFactor ConformalFactor::from_function(PolarGrid grid, const std::function<double(double, double)>& phi) {
  check_grid(grid);
  std::vector<double> in(static_cast<size_t>(grid.n_r) * grid.n_theta), bd(grid.n_theta);
  for (int k = 0; k < grid.n_r; ++k)
    for (int m = 0; m < grid.n_theta; ++m) in[static_cast<size_t>(k) * grid.n_theta + m] = phi(grid.r(k), grid.theta(m));
  for (int m = 0; m < grid.n_theta; ++m) bd[m] = phi(1.0, grid.theta(m));
  return ConformalFactor(grid, std::move(in), std::move(bd));
}

ConformalFactor ConformalFactor::constant(PolarGrid grid, double c) {
  return from_function(grid, [c](double, double) { return c; });
}

std::vector<double> ConformalFactor::normal_derivative() const {
  const int n = grid_.n_r, nt = grid_.n_theta;
  std::vector<double> out(nt);
  for (int m = 0; m < nt; ++m) out[m] = (boundary_[m] - value(n - 1, m)) / (0.5 * grid_.h());
  return out;
}

std::vector<double> ConformalFactor::laplacian_flux() const {
  const int n = grid_.n_r, nt = grid_.n_theta;
  const double h = grid_.h(), dt = grid_.dtheta();
  std::vector<double> out(interior_.size(), 0.0);
  const auto dn = normal_derivative();
  for (int k = 0; k < n; ++k) {
    const double r = grid_.r(k);
    for (int m = 0; m < nt; ++m) {
      const int mp = (m + 1) % nt, mm = (m + nt - 1) % nt;
      const double v = value(k, m);
      double flux = (value(k, mp) - 2.0 * v + value(k, mm)) * h / (r * dt);
      if (k > 0) flux -= (v - value(k - 1, m)) * (r - 0.5 * h) * dt / h;
      if (k + 1 < n)
        flux += (value(k + 1, m) - v) * (r + 0.5 * h) * dt / h;
      else
        flux += dn[m] * dt;
      out[static_cast<size_t>(k) * nt + m] = flux;
    }
  }
  return out;
}

ConformalFactor ConformalFactor::operator+(const ConformalFactor& other) const {
  check_same(*this, other);
  auto in = interior_;
  auto bd = boundary_;
  for (size_t i = 0; i < in.size(); ++i) in[i] += other.interior_[i];
  for (size_t i = 0; i < bd.size(); ++i) bd[i] += other.boundary_[i];
  return ConformalFactor(grid_, std::move(in), std::move(bd));
}

Curvatures curvatures(const ConformalFactor& phi) {
  const auto& g = phi.grid();
  const auto flux = phi.laplacian_flux();
  const auto dn = phi.normal_derivative();
  Curvatures c;
  c.bulk.resize(flux.size());
  for (int k = 0; k < g.n_r; ++k)
    for (int m = 0; m < g.n_theta; ++m) {
      const size_t i = static_cast<size_t>(k) * g.n_theta + m;
      c.bulk[i] = -std::exp(-phi.value(k, m)) * flux[i] / g.cell_area(k);
    }
  c.boundary.resize(g.n_theta);
  for (int m = 0; m < g.n_theta; ++m)
    c.boundary[m] = std::exp(-0.5 * phi.boundary_value(m)) * (1.0 + 0.5 * dn[m]);
  return c;
}

namespace {

// Integral of f R_g dlambda_g and of f K_g dlambda_dg for g = e^phi dx^2.
struct CurvatureMoments {
  double bulk = 0.0;
  double boundary = 0.0;
};

CurvatureMoments curvature_moments(const ConformalFactor& phi, const ConformalFactor* f) {
  const auto& g = phi.grid();
  const auto c = curvatures(phi);
  CurvatureMoments out;
  for (int k = 0; k < g.n_r; ++k)
    for (int m = 0; m < g.n_theta; ++m) {
      const size_t i = static_cast<size_t>(k) * g.n_theta + m;
      const double w = f ? f->value(k, m) : 1.0;
      out.bulk += w * c.bulk[i] * std::exp(phi.value(k, m)) * g.cell_area(k);
    }
  for (int m = 0; m < g.n_theta; ++m) {
    const double w = f ? f->boundary_value(m) : 1.0;
    out.boundary += w * c.boundary[m] * std::exp(0.5 * phi.boundary_value(m)) * g.dtheta();
  }
  return out;
}

}  // namespace

double gauss_bonnet(const ConformalFactor& phi) {
  const auto m = curvature_moments(phi, nullptr);
  return m.bulk + 2.0 * m.boundary;
}

double dirichlet_form(const ConformalFactor& a, const ConformalFactor& b) {
  check_same(a, b);
  const auto& g = a.grid();
  const int n = g.n_r, nt = g.n_theta;
  const double h = g.h(), dt = g.dtheta();
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = g.r(k);
    for (int m = 0; m < nt; ++m) {
      const int mp = (m + 1) % nt;
      s += (a.value(k, mp) - a.value(k, m)) * (b.value(k, mp) - b.value(k, m)) * h / (r * dt);
      if (k + 1 < n)
        s += (a.value(k + 1, m) - a.value(k, m)) * (b.value(k + 1, m) - b.value(k, m)) * (r + 0.5 * h) * dt / h;
      else
        s += (a.boundary_value(m) - a.value(k, m)) * (b.boundary_value(m) - b.value(k, m)) * dt / (0.5 * h);
    }
  }
  return s;
}

double weyl_anomaly(const ConformalFactor& phi, const ConformalFactor& base, const LiouvilleParams& params) {
  check_same(phi, base);
  const auto m = curvature_moments(base, &phi);
  const double k = params.central_charge() / (96.0 * kPi);
  return k * (dirichlet_energy(phi) + 2.0 * m.bulk + 4.0 * m.boundary);
}

double weyl_anomaly(const std::function<double(double, double)>& phi,
                    const std::function<double(double, double)>& base, const LiouvilleParams& params,
                    int n_quad) {
  const PolarGrid g{n_quad, 4 * n_quad};
  return weyl_anomaly(ConformalFactor::from_function(g, phi), ConformalFactor::from_function(g, base), params);
}

double weyl_anomaly_flat_direct(const ConformalFactor& phi, const LiouvilleParams& params) {
  double bd = 0.0;
  for (double v : phi.boundary()) bd += v;
  bd *= phi.grid().dtheta();
  return params.central_charge() / (96.0 * kPi) * (dirichlet_energy(phi) + 4.0 * bd);
}

}  // namespace lqft
