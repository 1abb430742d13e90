#pragma once

#include <vector>

#include "lqft/common.hpp"

namespace lqft {

inline constexpr double kBoundaryTol = 1e-12;

// A point of the closed unit disk.
class DiskPoint {
 public:
  DiskPoint() = default;
  DiskPoint(double re, double im);
  explicit DiskPoint(cplx z) : DiskPoint(z.real(), z.imag()) {}

  static DiskPoint polar(double r, double theta);
  static DiskPoint on_circle(double theta) { return polar(1.0, theta); }

  double re() const { return re_; }
  double im() const { return im_; }
  cplx z() const { return {re_, im_}; }
  double abs() const { return std::abs(z()); }
  double abs2() const { return re_ * re_ + im_ * im_; }
  bool on_boundary() const { return std::abs(abs() - 1.0) <= kBoundaryTol; }
  bool interior() const { return !on_boundary(); }

  friend bool operator==(const DiskPoint& a, const DiskPoint& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

 private:
  double re_ = 0.0;
  double im_ = 0.0;
};

struct LiouvilleParams {
  double gamma = 1.0;
  double mu = 1.0;
  double mu_boundary = 0.0;

  double Q() const { return 2.0 / gamma + gamma / 2.0; }
  double central_charge() const { return 1.0 + 6.0 * Q() * Q(); }
  // Throws parameter error unless gamma in (0,2], mu, mu_b >= 0 and mu + mu_b > 0.
  void validate() const;
};

// G(x,y) = ln 1/(|x-y| |1 - x conj(y)|)
double green(const DiskPoint& x, const DiskPoint& y);

// Trapezoidal mean of G(x, .) over n_quad equispaced boundary nodes.
double green_mean_boundary(const DiskPoint& x, int n_quad);

// Double circle average of G at common radius eps. Only the exact cases:
// x == y, or circles disjoint (|x-y| >= 2 eps).
double green_regularized(const DiskPoint& x, const DiskPoint& y, double eps);
// Same with one radius per point: x == y with equal radii, or |x-y| >= eps_x + eps_y.
double green_regularized(const DiskPoint& x, double eps_x, const DiskPoint& y, double eps_y);

// Double circle average of G for arbitrary radii, overlapping circles included.
// The partially overlapping case uses adaptive Gauss-Kronrod on the arc outside
// the second circle.
double green_circle_average(const DiskPoint& x, double eps_x, const DiskPoint& y, double eps_y);

class MobiusMap {
 public:
  MobiusMap(cplx a, double alpha);
  cplx a() const { return a_; }
  double alpha() const { return alpha_; }

  DiskPoint apply(const DiskPoint& x) const;
  cplx apply(cplx x) const;
  cplx derivative(cplx x) const;
  cplx derivative(const DiskPoint& x) const { return derivative(x.z()); }
  MobiusMap inverse() const;

 private:
  cplx a_;
  double alpha_;
  cplx rot_;
};

DiskPoint mobius_apply(const MobiusMap& psi, const DiskPoint& x);
cplx mobius_derivative(const MobiusMap& psi, const DiskPoint& x);

// 1/(1-|x|^2)^2
double poincare_density(const DiskPoint& x);

// (alpha/2)(Q - alpha/2)
double conformal_weight(double alpha, const LiouvilleParams& params);

}  // namespace lqft
