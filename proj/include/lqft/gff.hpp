#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lqft/disk_geometry.hpp"
#include "lqft/rng.hpp"

namespace lqft {

// X_b(theta) = sum_{n<=N} sqrt(2/n) (a_n cos n theta + b_n sin n theta).
class BoundaryTrace {
 public:
  BoundaryTrace(std::vector<double> a, std::vector<double> b);

  int n_modes() const { return static_cast<int>(a_.size()); }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }

  double value(double theta) const;
  // Values at the arc centers theta_m = 2 pi (m + 1/2) / n_arcs, by FFT.
  std::vector<double> values_at_arcs(int n_arcs) const;
  // The trace restricted to its first n modes (common random numbers across a ladder).
  BoundaryTrace truncated(int n) const;
  // Var X_b(theta) = sum_{n<=N} 2/n, the same at every theta.
  double variance() const;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

double truncated_variance(int n_modes);

BoundaryTrace sample_boundary_trace(int n_modes, RngStream& rng);

// sum sqrt(2/n) r^n (a_n cos n theta + b_n sin n theta) at x = r e^{i theta}.
double harmonic_extension(const BoundaryTrace& trace, const DiskPoint& x);

enum class CovarianceRule {
  exact,          // green_regularized: only x == y or disjoint circles
  circle_average  // green_circle_average: any configuration
};

Eigen::MatrixXd regularized_covariance(const std::vector<DiskPoint>& points, const std::vector<double>& eps,
                                       CovarianceRule rule = CovarianceRule::exact);

// Centered Gaussian vector with a fixed covariance, factorized once by pivoted LDL^T.
class GaussianSampler {
 public:
  explicit GaussianSampler(Eigen::MatrixXd covariance, double pivot_tol = 1e-10);

  int size() const { return static_cast<int>(cov_.rows()); }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  // One column per stream; each stream supplies size() normals.
  Eigen::MatrixXd sample(std::vector<RngStream>& streams) const;
  Eigen::VectorXd sample(RngStream& rng) const;

 private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;  // lower triangular L sqrt(D)
  Eigen::Transpositions<Eigen::Dynamic> perm_;
};

struct FieldRealization {
  std::vector<DiskPoint> points;
  std::vector<double> eps;  // regularization radius per point
  Eigen::VectorXd values;
  std::shared_ptr<const Eigen::MatrixXd> covariance;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  int size() const { return static_cast<int>(points.size()); }
};

FieldRealization sample_field(const std::vector<DiskPoint>& points, double eps, RngStream& rng);
FieldRealization sample_field(const std::vector<DiskPoint>& points, const std::vector<double>& eps, RngStream& rng);

// G_eps(x,x) + ln eps for every eps of the ladder.
std::vector<double> variance_asymptotic_check(const DiskPoint& x, const std::vector<double>& eps_ladder);
// Same for the field composed with a Mobius map: G_eps(psi x, psi x) - 2 ln|psi'(x)| + ln eps,
// using the Green covariance identity for the composed field.
std::vector<double> variance_asymptotic_check(const DiskPoint& x, const std::vector<double>& eps_ladder,
                                              const MobiusMap& psi);

void write_field_csv(const FieldRealization& field, const std::string& csv_path, const std::string& json_path);

}  // namespace lqft
