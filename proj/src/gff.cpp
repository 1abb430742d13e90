#include "lqft/gff.hpp"

#include <fmt/format.h>

#include <cmath>
#include <unsupported/Eigen/FFT>

#include "lqft/io.hpp"

namespace lqft {

BoundaryTrace::BoundaryTrace(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty() || a_.size() != b_.size()) fail(ErrorKind::parameter, "boundary trace needs n_modes >= 1");
}

double BoundaryTrace::value(double theta) const {
  double s = 0.0;
  for (int n = 1; n <= n_modes(); ++n)
    s += std::sqrt(2.0 / n) * (a_[n - 1] * std::cos(n * theta) + b_[n - 1] * std::sin(n * theta));
  return s;
}

std::vector<double> BoundaryTrace::values_at_arcs(int n_arcs) const {
  if (n_arcs < 1) fail(ErrorKind::parameter, "values_at_arcs: n_arcs >= 1");
  // theta_m = 2 pi m / K + pi / K: fold each mode into bin n mod K with the half-step phase.
  std::vector<std::complex<double>> spec(n_arcs, 0.0), out;
  for (int n = 1; n <= n_modes(); ++n) {
    const double phase = kPi * static_cast<double>(n % (2 * n_arcs)) / n_arcs;
    spec[n % n_arcs] += std::sqrt(2.0 / n) * std::complex<double>(a_[n - 1], -b_[n - 1]) * std::polar(1.0, phase);
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  fft.inv(out, spec);
  std::vector<double> v(n_arcs);
  for (int m = 0; m < n_arcs; ++m) v[m] = out[m].real();
  return v;
}

BoundaryTrace BoundaryTrace::truncated(int n) const {
  if (n < 1 || n > n_modes()) fail(ErrorKind::parameter, "truncated: n outside [1, n_modes]");
  return BoundaryTrace(std::vector<double>(a_.begin(), a_.begin() + n),
                       std::vector<double>(b_.begin(), b_.begin() + n));
}

double BoundaryTrace::variance() const { return truncated_variance(n_modes()); }

double truncated_variance(int n_modes) {
  double s = 0.0;
  for (int n = 1; n <= n_modes; ++n) s += 2.0 / n;
  return s;
}

BoundaryTrace sample_boundary_trace(int n_modes, RngStream& rng) {
  if (n_modes < 1) fail(ErrorKind::parameter, "sample_boundary_trace: n_modes >= 1");
  std::vector<double> a(n_modes), b(n_modes);
  for (int n = 0; n < n_modes; ++n) {
    a[n] = rng.normal();
    b[n] = rng.normal();
  }
  return BoundaryTrace(std::move(a), std::move(b));
}

double harmonic_extension(const BoundaryTrace& trace, const DiskPoint& x) {
  if (!x.interior()) fail(ErrorKind::domain, "harmonic_extension: x must be interior");
  const double r = x.abs();
  const double th = std::atan2(x.im(), x.re());
  double s = 0.0, rn = 1.0;
  for (int n = 1; n <= trace.n_modes(); ++n) {
    rn *= r;
    if (rn == 0.0) break;
    s += std::sqrt(2.0 / n) * rn *
         (trace.cos_coeffs()[n - 1] * std::cos(n * th) + trace.sin_coeffs()[n - 1] * std::sin(n * th));
  }
  return s;
}

Eigen::MatrixXd regularized_covariance(const std::vector<DiskPoint>& points, const std::vector<double>& eps,
                                       CovarianceRule rule) {
  const int m = static_cast<int>(points.size());
  if (eps.size() != points.size()) fail(ErrorKind::config, "one regularization radius per point");
  Eigen::MatrixXd c(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) {
      const double v = rule == CovarianceRule::exact ? green_regularized(points[i], eps[i], points[j], eps[j])
                                                     : green_circle_average(points[i], eps[i], points[j], eps[j]);
      c(i, j) = v;
      c(j, i) = v;
    }
  return c;
}

GaussianSampler::GaussianSampler(Eigen::MatrixXd covariance, double pivot_tol) : cov_(std::move(covariance)) {
  const Eigen::Index m = cov_.rows();
  if (m == 0 || cov_.cols() != m) fail(ErrorKind::config, "covariance must be square and nonempty");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov_);
  if (ldlt.info() != Eigen::Success) fail(ErrorKind::factorization, "LDL^T factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  Eigen::VectorXd sd(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (d(i) < -pivot_tol * std::max(1.0, dmax))
      fail(ErrorKind::factorization,
           fmt::format("covariance not positive semidefinite: pivot {} = {:.3e}", i, d(i)));
    sd(i) = std::sqrt(std::max(d(i), 0.0));
  }
  factor_ = Eigen::MatrixXd(ldlt.matrixL());
  factor_ = factor_ * sd.asDiagonal();
  perm_ = ldlt.transpositionsP();
}

Eigen::MatrixXd GaussianSampler::sample(std::vector<RngStream>& streams) const {
  const Eigen::Index m = cov_.rows();
  const Eigen::Index b = static_cast<Eigen::Index>(streams.size());
  Eigen::MatrixXd z(m, b);
  for (Eigen::Index j = 0; j < b; ++j) streams[j].fill_normal(z.col(j).data(), static_cast<size_t>(m));
  Eigen::MatrixXd y = factor_.triangularView<Eigen::Lower>() * z;
  return perm_.transpose() * y;
}

Eigen::VectorXd GaussianSampler::sample(RngStream& rng) const {
  const Eigen::Index m = cov_.rows();
  Eigen::VectorXd z(m);
  rng.fill_normal(z.data(), static_cast<size_t>(m));
  Eigen::VectorXd y = factor_.triangularView<Eigen::Lower>() * z;
  return perm_.transpose() * y;
}

FieldRealization sample_field(const std::vector<DiskPoint>& points, double eps, RngStream& rng) {
  return sample_field(points, std::vector<double>(points.size(), eps), rng);
}

FieldRealization sample_field(const std::vector<DiskPoint>& points, const std::vector<double>& eps, RngStream& rng) {
  FieldRealization f;
  f.points = points;
  f.eps = eps;
  GaussianSampler sampler(regularized_covariance(points, eps));
  f.values = sampler.sample(rng);
  f.covariance = std::make_shared<const Eigen::MatrixXd>(sampler.covariance());
  f.seed = rng.seed();
  f.stream_id = rng.stream_id();
  return f;
}

std::vector<double> variance_asymptotic_check(const DiskPoint& x, const std::vector<double>& eps_ladder) {
  std::vector<double> out;
  for (size_t i = 0; i < eps_ladder.size(); ++i) {
    if (i && !(eps_ladder[i] < eps_ladder[i - 1])) fail(ErrorKind::parameter, "eps ladder must decrease");
    out.push_back(green_regularized(x, x, eps_ladder[i]) + std::log(eps_ladder[i]));
  }
  return out;
}

std::vector<double> variance_asymptotic_check(const DiskPoint& x, const std::vector<double>& eps_ladder,
                                              const MobiusMap& psi) {
  // Cov(X o psi) = G(x,y) - ln|psi'(x)| - ln|psi'(y)|; ln|psi'| is harmonic, so its
  // circle averages are point values.
  const double shift = 2.0 * std::log(std::abs(psi.derivative(x)));
  auto out = variance_asymptotic_check(x, eps_ladder);
  for (double& v : out) v -= shift;
  return out;
}

void write_field_csv(const FieldRealization& field, const std::string& csv_path, const std::string& json_path) {
  io::CsvWriter csv(csv_path, {"re", "im", "value"});
  for (int i = 0; i < field.size(); ++i) csv.values(field.points[i].re(), field.points[i].im(), field.values(i));
  io::json j;
  j["seed"] = field.seed;
  j["stream_id"] = field.stream_id;
  const bool uniform = std::all_of(field.eps.begin(), field.eps.end(), [&](double e) { return e == field.eps.front(); });
  if (uniform && !field.eps.empty())
    j["eps"] = field.eps.front();
  else
    j["eps"] = field.eps;
  j["n_points"] = field.size();
  io::write_json(json_path, j);
}

}  // namespace lqft
