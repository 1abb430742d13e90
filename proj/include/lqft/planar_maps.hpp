#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lqft/rng.hpp"

namespace lqft {

// Quadrangulations with n faces and a simple boundary of length 2p, one boundary edge marked.
struct MapCount {
  long n = 0;
  long p = 1;
  std::string decimal;     // exact count
  double log_count = 0.0;  // -inf when the count is 0
  bool integral = true;    // the closed formula divided exactly
};

MapCount count_exact(long n, long p);

// n ln 12 + p ln(9/2) - 5/2 ln n + 1/2 ln(3p) - ln 2 pi - 9 p^2 / (4 n)
double count_asymptotic(long n, long p);
// Same with the boundary constant 2 p ln(3/2) in place of p ln(9/2).
double count_asymptotic_alt(long n, long p);

// 9 p^2 / (4 n) written in rescaled variables V = a^2 n, l = 2 a p: 9 l^2 / (16 V).
inline double gaussian_exponent(double V, double l) { return 9.0 * l * l / (16.0 * V); }

struct BoltzmannConfig {
  double a = 0.01;
  double mu = 1.0;
  double mu_boundary = 1.0;
  double mu_c = 2.4849066497880004;           // ln 12
  double mu_c_boundary = 0.75203869838813708;  // ln(9/2) / 2, per boundary edge
  // Weight each map by its number of interior vertices n - p + 1.
  bool mark_interior_vertex = true;
  long n_max = 0;  // 0: ceil(20 / (a^2 mu))
  long p_max = 0;  // 0: ceil(20 / (a mu_boundary))

  double mu_bar() const { return mu_c + a * a * mu; }
  double mu_bar_boundary() const { return mu_c_boundary + a * mu_boundary; }
  void validate() const;
  long resolved_n_max() const;
  long resolved_p_max() const;
};

// Log of the unnormalized Boltzmann weight e^{-mu_bar n - 2 mu_bar_b p} |T_{n,p}| (times n-p+1 if marked).
double boltzmann_log_weight(const BoltzmannConfig& cfg, long n, long p);

// Exact law of (n, p) on the truncated range, kept as per-p row marginals.
class BoltzmannLaw {
 public:
  explicit BoltzmannLaw(const BoltzmannConfig& cfg);

  const BoltzmannConfig& config() const { return cfg_; }
  long n_max() const { return n_max_; }
  long p_max() const { return p_max_; }
  double log_normalizer() const { return log_z_; }
  // Bound on the discarded mass relative to the kept mass.
  double tail_bound() const { return tail_; }
  double p_probability(long p) const;  // marginal of p
  double log_probability(long n, long p) const;
  const std::vector<double>& p_cdf() const { return p_cdf_; }  // indexed by p, p_cdf()[0] = 0

  // Row p as probabilities over n = row_begin(p) .. n_max.
  long row_begin(long p) const;
  std::vector<double> row(long p) const;
  // Same divided by the weight at the row mode (never overflows).
  std::vector<double> scaled_row(long p) const;
  double row_log_scale(long p) const;  // log probability of the mode cell

 private:
  BoltzmannConfig cfg_;
  long n_max_;
  long p_max_;
  std::vector<double> row_log_mode_;  // log weight at the row mode
  std::vector<long> row_mode_;
  std::vector<double> row_log_total_;
  std::vector<double> p_cdf_;
  double log_z_ = 0.0;
  double tail_ = 0.0;

};

// One draw from stream rng.
std::pair<long, long> boltzmann_sample(const BoltzmannLaw& law, RngStream& rng);
// Draws [0, n): draw d uses stream_id(d, maps) under seed.
std::vector<std::pair<long, long>> boltzmann_sample_batch(const BoltzmannLaw& law, std::uint64_t seed,
                                                          std::size_t n_draws);

// Bins in (V, l), snapped to the lattice (V, l) = (a^2 n, 2 a p) so that every bin
// edge falls halfway between lattice values.
struct DensityBinning {
  int v_bins = 20;
  int l_bins = 20;
  double v_min = 0.05;
  double v_max = 2.05;
  double l_min = 0.1;
  double l_max = 2.1;
};

struct DensityReport {
  std::size_t n_draws = 0;
  std::size_t in_range = 0;
  // Conjectured continuum density, normalized over the binned range.
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;
  int underpowered_bins = 0;  // expected count < 5, left out of the chi-square
  // Exact truncated law, cell by cell.
  int powered_cells = 0;  // expected count >= 100
  int cells_beyond_3se = 0;
  double max_abs_z = 0.0;
  // Conditional l-slices at fixed V bin: chi-square against l^{1/2} e^{-mu_b l - 9 l^2/16V}.
  double slice_chi2 = 0.0;
  int slice_dof = 0;
  double slice_p_value = 0.0;
  std::vector<std::vector<double>> observed;  // [v][l]
  std::vector<std::vector<double>> expected_conjecture;
  std::vector<std::vector<double>> expected_exact;
};

// Conjectured density V^{-3/2} l^{1/2} e^{-mu V - mu_b l - 9 l^2 / 16 V}.
double conjectured_log_density(double V, double l, double mu, double mu_boundary);

DensityReport joint_density_check(const BoltzmannLaw& law, const std::vector<std::pair<long, long>>& draws,
                                  const DensityBinning& bins);

}  // namespace lqft
