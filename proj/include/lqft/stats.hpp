#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lqft::stats {

double sum(const std::vector<double>& x);  // compensated

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanSe mean_se(const std::vector<double>& x);

double quantile(std::vector<double> x, double q);
inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

// Leave-one-out jackknife of a statistic of the sample.
struct Jackknife {
  double estimate = 0.0;
  double se = 0.0;
};
Jackknife jackknife(const std::vector<double>& x, const std::function<double(const std::vector<double>&)>& stat);
// Jackknife for sum(a)/sum(b) over paired samples (O(n)).
Jackknife jackknife_ratio(const std::vector<double>& a, const std::vector<double>& b);

double correlation(const std::vector<double>& x, const std::vector<double>& y);

// One-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf);
double ks_pvalue(double d, std::size_t n);

// Upper tail of the chi-square distribution.
double chi2_sf(double stat, double dof);

double log_sum_exp(const std::vector<double>& v);

}  // namespace lqft::stats
