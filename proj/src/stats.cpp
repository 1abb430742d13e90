#include "lqft/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "lqft/common.hpp"

namespace lqft::stats {

double sum(const std::vector<double>& x) {
  double s = 0.0, c = 0.0;
  for (double v : x) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  r.n = x.size();
  if (x.empty()) return r;
  r.mean = sum(x) / x.size();
  if (x.size() < 2) return r;
  std::vector<double> d2(x.size());
  for (size_t i = 0; i < x.size(); ++i) d2[i] = (x[i] - r.mean) * (x[i] - r.mean);
  r.se = std::sqrt(sum(d2) / (x.size() - 1) / x.size());
  return r;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) fail(ErrorKind::numeric, "quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * (x.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(pos));
  if (i + 1 >= x.size()) return x.back();
  return x[i] + (pos - i) * (x[i + 1] - x[i]);
}

Jackknife jackknife(const std::vector<double>& x, const std::function<double(const std::vector<double>&)>& stat) {
  const size_t n = x.size();
  if (n < 2) fail(ErrorKind::numeric, "jackknife needs at least two samples");
  Jackknife r;
  r.estimate = stat(x);
  std::vector<double> loo(n), sub(x.begin() + 1, x.end());
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) sub[i - 1] = x[i - 1];
    loo[i] = stat(sub);
  }
  const double m = sum(loo) / n;
  double s = 0.0;
  for (double v : loo) s += (v - m) * (v - m);
  r.se = std::sqrt((n - 1.0) / n * s);
  return r;
}

Jackknife jackknife_ratio(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  if (n < 2 || b.size() != n) fail(ErrorKind::numeric, "jackknife_ratio: paired samples of size >= 2");
  const double sa = sum(a), sb = sum(b);
  Jackknife r;
  r.estimate = sa / sb;
  std::vector<double> loo(n);
  for (size_t i = 0; i < n; ++i) loo[i] = (sa - a[i]) / (sb - b[i]);
  const double m = sum(loo) / n;
  double s = 0.0;
  for (double v : loo) s += (v - m) * (v - m);
  r.se = std::sqrt((n - 1.0) / n * s);
  return r;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::numeric, "correlation: paired samples of size >= 2");
  const double mx = sum(x) / n, my = sum(y) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  // Kolmogorov limit law with Stephens' small-sample correction.
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double chi2_sf(double stat, double dof) {
  if (!(dof > 0.0)) fail(ErrorKind::numeric, "chi2_sf: dof must be positive");
  return boost::math::gamma_q(0.5 * dof, 0.5 * std::max(stat, 0.0));
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace lqft::stats
