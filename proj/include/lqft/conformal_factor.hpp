#pragma once

#include <functional>
#include <vector>

#include "lqft/disk_geometry.hpp"

namespace lqft {

// Finite-volume polar grid: n_r rings of width h = 1/n_r, n_theta sectors,
// cell centers at r_k = (k + 1/2) h, theta_m = 2 pi (m + 1/2) / n_theta,
// plus one boundary node per sector at r = 1.
struct PolarGrid {
  int n_r = 0;
  int n_theta = 0;

  double h() const { return 1.0 / n_r; }
  double dtheta() const { return kTwoPi / n_theta; }
  double r(int k) const { return (k + 0.5) * h(); }
  double theta(int m) const { return kTwoPi * (m + 0.5) / n_theta; }
  double cell_area(int k) const { return r(k) * h() * dtheta(); }
  bool operator==(const PolarGrid&) const = default;
};

// g = e^phi dx^2 sampled on a PolarGrid.
class ConformalFactor {
 public:
  ConformalFactor(PolarGrid grid, std::vector<double> interior, std::vector<double> boundary);

  static ConformalFactor from_function(PolarGrid grid, const std::function<double(double, double)>& phi);
  static ConformalFactor constant(PolarGrid grid, double c);

  const PolarGrid& grid() const { return grid_; }
  double value(int k, int m) const { return interior_[static_cast<size_t>(k) * grid_.n_theta + m]; }
  double boundary_value(int m) const { return boundary_[m]; }
  const std::vector<double>& interior() const { return interior_; }
  const std::vector<double>& boundary() const { return boundary_; }

  // Outward normal derivative at each boundary node: (phi_b - phi_{n_r-1}) / (h/2).
  std::vector<double> normal_derivative() const;
  // Integral of the flat Laplacian over each cell (sum of outward face fluxes).
  std::vector<double> laplacian_flux() const;

  ConformalFactor operator+(const ConformalFactor& other) const;

 private:
  PolarGrid grid_;
  std::vector<double> interior_;
  std::vector<double> boundary_;
};

struct Curvatures {
  std::vector<double> bulk;      // R_g per cell
  std::vector<double> boundary;  // K_g per boundary node
};

Curvatures curvatures(const ConformalFactor& phi);

// Integral of R_g dlambda_g + 2 * integral of K_g dlambda_dg. Equals 4 pi.
double gauss_bonnet(const ConformalFactor& phi);

// Discrete Dirichlet form, the one whose Green identity matches laplacian_flux().
double dirichlet_form(const ConformalFactor& a, const ConformalFactor& b);
inline double dirichlet_energy(const ConformalFactor& a) { return dirichlet_form(a, a); }

// log Pi(e^phi g) - log Pi(g) with g = e^base dx^2.
double weyl_anomaly(const ConformalFactor& phi, const ConformalFactor& base, const LiouvilleParams& params);
// Function form: both factors sampled on a grid with n_quad rings and 4 n_quad sectors.
double weyl_anomaly(const std::function<double(double, double)>& phi,
                    const std::function<double(double, double)>& base, const LiouvilleParams& params,
                    int n_quad);
// Flat base written straight from the definition: c/(96 pi) (E(phi) + 4 int phi dlambda_d).
double weyl_anomaly_flat_direct(const ConformalFactor& phi, const LiouvilleParams& params);

}  // namespace lqft
