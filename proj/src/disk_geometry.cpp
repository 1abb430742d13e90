#include "lqft/disk_geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fmt/format.h>

namespace lqft {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::config: return "config";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::admissibility: return "admissibility";
    case ErrorKind::factorization: return "factorization";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

DiskPoint::DiskPoint(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im))
    fail(ErrorKind::domain, "non-finite disk point");
  if (std::hypot(re, im) > 1.0 + kBoundaryTol)
    fail(ErrorKind::domain, fmt::format("point ({}, {}) outside the closed unit disk", re, im));
}

DiskPoint DiskPoint::polar(double r, double theta) {
  return DiskPoint(r * std::cos(theta), r * std::sin(theta));
}

void LiouvilleParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 2.0))
    fail(ErrorKind::parameter, fmt::format("gamma = {} outside (0, 2]", gamma));
  if (!(mu >= 0.0) || !(mu_boundary >= 0.0))
    fail(ErrorKind::parameter, "cosmological constants must be nonnegative");
  if (!(mu + mu_boundary > 0.0))
    fail(ErrorKind::parameter, "mu = mu_boundary = 0 is excluded");
}

double green(const DiskPoint& x, const DiskPoint& y) {
  const cplx zx = x.z(), zy = y.z();
  const double d = std::abs(zx - zy);
  if (d == 0.0) fail(ErrorKind::domain, "green: coincident points");
  const double q = std::abs(1.0 - zx * std::conj(zy));
  return -std::log(d) - std::log(q);
}

double green_mean_boundary(const DiskPoint& x, int n_quad) {
  if (n_quad < 16) fail(ErrorKind::parameter, "green_mean_boundary: need at least 16 nodes");
  if (!x.interior()) fail(ErrorKind::domain, "green_mean_boundary: x must be interior");
  double s = 0.0;
  for (int k = 0; k < n_quad; ++k) s += green(x, DiskPoint::on_circle(kTwoPi * k / n_quad));
  return s / n_quad;
}

namespace {

void check_circle_inside(const DiskPoint& x, double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::parameter, "regularization radius must be positive");
  if (!(x.abs() + eps < 1.0))
    fail(ErrorKind::domain, fmt::format("circle of radius {} around |x| = {} leaves the disk", eps, x.abs()));
}

// Mean over z on the circle |z - x| = e of -ln max(|z - y|, f), with d = |x - y|.
double mean_log_max(double d, double e, double f) {
  if (d >= e + f) return -std::log(d);
  if (d + e <= f) return -std::log(f);
  if (d + f <= e) return -std::log(e);
  // Arc t in [-t0, t0] lies outside the disk of radius f around y.
  const double c = std::clamp((f * f - e * e - d * d) / (2.0 * e * d), -1.0, 1.0);
  const double t0 = std::acos(c);
  auto integrand = [&](double t) { return -0.5 * std::log(e * e + d * d + 2.0 * e * d * std::cos(t)); };
  double err = 0.0;
  const double outside = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, t0, 15, 1e-15, &err);
  return (2.0 * outside - (kTwoPi - 2.0 * t0) * std::log(f)) / kTwoPi;
}

}  // namespace

double green_regularized(const DiskPoint& x, const DiskPoint& y, double eps) {
  return green_regularized(x, eps, y, eps);
}

double green_regularized(const DiskPoint& x, double eps_x, const DiskPoint& y, double eps_y) {
  check_circle_inside(x, eps_x);
  check_circle_inside(y, eps_y);
  if (x == y) {
    if (eps_x != eps_y)
      fail(ErrorKind::unsupported, "green_regularized: concentric circles with different radii");
    return -std::log(eps_x) - std::log1p(-x.abs2());
  }
  const double d = std::abs(x.z() - y.z());
  if (d < (eps_x + eps_y) * (1.0 - 1e-12))
    fail(ErrorKind::unsupported,
         fmt::format("green_regularized: overlapping circles (distance {} < {})", d, eps_x + eps_y));
  return green(x, y);
}

double green_circle_average(const DiskPoint& x, double eps_x, const DiskPoint& y, double eps_y) {
  check_circle_inside(x, eps_x);
  check_circle_inside(y, eps_y);
  const double d = std::abs(x.z() - y.z());
  // -ln|1 - x conj(y)| is harmonic in each variable, so its circle averages are exact.
  return mean_log_max(d, eps_x, eps_y) - std::log(std::abs(1.0 - x.z() * std::conj(y.z())));
}

MobiusMap::MobiusMap(cplx a, double alpha) : a_(a), alpha_(alpha), rot_(std::polar(1.0, alpha)) {
  if (!(std::abs(a) < 1.0)) fail(ErrorKind::parameter, "Mobius map needs |a| < 1");
}

cplx MobiusMap::apply(cplx x) const { return rot_ * (x - a_) / (1.0 - std::conj(a_) * x); }

DiskPoint MobiusMap::apply(const DiskPoint& x) const {
  cplx w = apply(x.z());
  // Boundary goes to boundary; pin the modulus so roundoff cannot leave the disk.
  if (x.on_boundary() || std::abs(w) > 1.0) w /= std::abs(w);
  return DiskPoint(w);
}

cplx MobiusMap::derivative(cplx x) const {
  const cplx den = 1.0 - std::conj(a_) * x;
  return rot_ * (1.0 - std::norm(a_)) / (den * den);
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(-a_ * rot_, -alpha_); }

DiskPoint mobius_apply(const MobiusMap& psi, const DiskPoint& x) { return psi.apply(x); }
cplx mobius_derivative(const MobiusMap& psi, const DiskPoint& x) { return psi.derivative(x); }

double poincare_density(const DiskPoint& x) {
  if (x.on_boundary()) fail(ErrorKind::domain, "poincare_density: infinite on the boundary");
  const double w = 1.0 - x.abs2();
  return 1.0 / (w * w);
}

double conformal_weight(double alpha, const LiouvilleParams& params) {
  return 0.5 * alpha * (params.Q() - 0.5 * alpha);
}

}  // namespace lqft
