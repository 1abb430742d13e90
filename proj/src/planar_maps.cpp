#include "lqft/planar_maps.hpp"

#include <fmt/format.h>
#include <gmpxx.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "lqft/common.hpp"
#include "lqft/stats.hpp"

namespace lqft {

namespace {

mpz_class factorial(unsigned long k) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), k);
  return r;
}

mpz_class power3(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 3, k);
  return r;
}

double log_mpz(const mpz_class& x) {
  long e = 0;
  const double d = mpz_get_d_2exp(&e, x.get_mpz_t());
  return std::log(d) + static_cast<double>(e) * std::log(2.0);
}

}  // namespace

MapCount count_exact(long n, long p) {
  if (n < 0 || p < 1) fail(ErrorKind::parameter, fmt::format("count_exact: need n >= 0, p >= 1 (got {}, {})", n, p));
  MapCount c;
  c.n = n;
  c.p = p;
  if (n - p + 1 < 0) {
    c.decimal = "0";
    c.log_count = -std::numeric_limits<double>::infinity();
    return c;
  }
  const auto un = static_cast<unsigned long>(n), up = static_cast<unsigned long>(p);
  const mpz_class num = factorial(3 * up) * power3(un) * factorial(2 * un + up - 1);
  const mpz_class den = power3(up) * factorial(up) * factorial(2 * up - 1) * factorial(un - up + 1) *
                        factorial(un + 2 * up);
  mpz_class q, r;
  mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  c.integral = (r == 0);
  c.decimal = q.get_str();
  c.log_count = q == 0 ? -std::numeric_limits<double>::infinity() : log_mpz(q);
  return c;
}

double count_asymptotic(long n, long p) {
  if (n < 1 || p < 1) fail(ErrorKind::parameter, "count_asymptotic: need n, p >= 1");
  const double dn = static_cast<double>(n), dp = static_cast<double>(p);
  return dn * std::log(12.0) + dp * std::log(4.5) - 2.5 * std::log(dn) + 0.5 * std::log(3.0 * dp) -
         std::log(kTwoPi) - 9.0 * dp * dp / (4.0 * dn);
}

double count_asymptotic_alt(long n, long p) {
  return count_asymptotic(n, p) - static_cast<double>(p) * (std::log(4.5) - 2.0 * std::log(1.5));
}

void BoltzmannConfig::validate() const {
  if (!(a > 0.0)) fail(ErrorKind::config, "boltzmann: mesh a must be positive");
  if (!(mu_bar() + 2.0 * mu_bar_boundary() > mu_c + 2.0 * mu_c_boundary))
    fail(ErrorKind::config, "boltzmann: need mu_bar + mu_bar_b above the critical pair");
  if (n_max == 0 && !(mu > 0.0)) fail(ErrorKind::config, "boltzmann: mu = 0 needs an explicit n_max");
  if (p_max == 0 && !(mu_boundary > 0.0)) fail(ErrorKind::config, "boltzmann: mu_boundary = 0 needs an explicit p_max");
  if (n_max < 0 || p_max < 0) fail(ErrorKind::config, "boltzmann: caps must be nonnegative");
}

long BoltzmannConfig::resolved_n_max() const {
  return n_max > 0 ? n_max : static_cast<long>(std::ceil(20.0 / (a * a * mu)));
}

long BoltzmannConfig::resolved_p_max() const {
  return p_max > 0 ? p_max : static_cast<long>(std::ceil(20.0 / (a * mu_boundary)));
}

namespace {

double log_count_lgamma(long n, long p) {
  const double dn = static_cast<double>(n), dp = static_cast<double>(p);
  return std::lgamma(3.0 * dp + 1.0) + (dn - dp) * std::log(3.0) + std::lgamma(2.0 * dn + dp) -
         std::lgamma(dp + 1.0) - std::lgamma(2.0 * dp) - std::lgamma(dn - dp + 2.0) - std::lgamma(dn + 2.0 * dp + 1.0);
}

long first_n(const BoltzmannConfig& cfg, long p) { return cfg.mark_interior_vertex ? p : p - 1; }

// w(n+1, p) / w(n, p)
double step_ratio(const BoltzmannConfig& cfg, double emu, long n, long p) {
  const double dn = static_cast<double>(n), dp = static_cast<double>(p);
  double r = emu * 3.0 * (2.0 * dn + dp) * (2.0 * dn + dp + 1.0) / ((dn - dp + 2.0) * (dn + 2.0 * dp + 1.0));
  if (cfg.mark_interior_vertex) r *= (dn - dp + 2.0) / (dn - dp + 1.0);
  return r;
}

}  // namespace

double boltzmann_log_weight(const BoltzmannConfig& cfg, long n, long p) {
  if (n < 0 || p < 1 || n < first_n(cfg, p)) return -std::numeric_limits<double>::infinity();
  double w = log_count_lgamma(n, p) - cfg.mu_bar() * n - 2.0 * cfg.mu_bar_boundary() * p;
  if (cfg.mark_interior_vertex) w += std::log(static_cast<double>(n - p + 1));
  return w;
}

BoltzmannLaw::BoltzmannLaw(const BoltzmannConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  n_max_ = cfg_.resolved_n_max();
  p_max_ = cfg_.resolved_p_max();
  if (static_cast<double>(n_max_) * static_cast<double>(p_max_) > 2e9)
    fail(ErrorKind::config, fmt::format("boltzmann table {} x {} too large", n_max_, p_max_));
  const double emu = std::exp(-cfg_.mu_bar());
  row_mode_.assign(p_max_ + 1, -1);
  row_log_mode_.assign(p_max_ + 1, -std::numeric_limits<double>::infinity());
  row_log_total_.assign(p_max_ + 1, -std::numeric_limits<double>::infinity());
  std::vector<double> log_tail;
  for (long p = 1; p <= p_max_; ++p) {
    const long nb = first_n(cfg_, p);
    if (nb > n_max_) continue;
    long mode = nb;
    while (mode < n_max_ && step_ratio(cfg_, emu, mode, p) >= 1.0) ++mode;
    row_mode_[p] = mode;
    row_log_mode_[p] = boltzmann_log_weight(cfg_, mode, p);
    const auto v = scaled_row(p);
    row_log_total_[p] = row_log_mode_[p] + std::log(stats::sum(v));
    // Geometric bound on the cut n-tail: the step ratio increases toward 12 e^{-mu_bar}.
    const double q = 12.0 * emu;
    if (q >= 1.0) fail(ErrorKind::config, "boltzmann: n-tail does not decay; set mu > 0");
    log_tail.push_back(row_log_mode_[p] + std::log(v.back()) + std::log(q / (1.0 - q)));
  }
  log_z_ = stats::log_sum_exp(row_log_total_);
  if (!std::isfinite(log_z_)) fail(ErrorKind::numeric, "boltzmann: empty or non-finite table");
  // p-tail from the decay of the last two row totals.
  const double lq = row_log_total_[p_max_] - row_log_total_[p_max_ - 1];
  if (p_max_ < 2 || !(lq < 0.0)) fail(ErrorKind::config, "boltzmann: p marginal not decaying at p_max; raise p_max");
  log_tail.push_back(row_log_total_[p_max_] + lq - std::log1p(-std::exp(lq)));
  tail_ = std::exp(stats::log_sum_exp(log_tail) - log_z_);
  if (tail_ > 1e-9)
    fail(ErrorKind::config, fmt::format("boltzmann: truncated tail {:.3e} exceeds 1e-9; raise n_max/p_max", tail_));
  p_cdf_.assign(p_max_ + 1, 0.0);
  double acc = 0.0;
  for (long p = 1; p <= p_max_; ++p) {
    acc += std::exp(row_log_total_[p] - log_z_);
    p_cdf_[p] = acc;
  }
  for (double& c : p_cdf_) c /= acc;
}

long BoltzmannLaw::row_begin(long p) const { return first_n(cfg_, p); }

std::vector<double> BoltzmannLaw::scaled_row(long p) const {
  if (p < 1 || p > p_max_ || row_mode_[p] < 0) return {};
  const long nb = first_n(cfg_, p), mode = row_mode_[p];
  const double emu = std::exp(-cfg_.mu_bar());
  std::vector<double> v(static_cast<size_t>(n_max_ - nb + 1));
  v[mode - nb] = 1.0;
  for (long n = mode; n < n_max_; ++n) v[n + 1 - nb] = v[n - nb] * step_ratio(cfg_, emu, n, p);
  for (long n = mode; n > nb; --n) v[n - 1 - nb] = v[n - nb] / step_ratio(cfg_, emu, n - 1, p);
  return v;
}

double BoltzmannLaw::row_log_scale(long p) const {
  if (p < 1 || p > p_max_) return -std::numeric_limits<double>::infinity();
  return row_log_mode_[p] - log_z_;
}

std::vector<double> BoltzmannLaw::row(long p) const {
  auto v = scaled_row(p);
  const double s = std::exp(row_log_scale(p));
  for (double& x : v) x *= s;
  return v;
}

double BoltzmannLaw::p_probability(long p) const {
  if (p < 1 || p > p_max_) return 0.0;
  return std::exp(row_log_total_[p] - log_z_);
}

double BoltzmannLaw::log_probability(long n, long p) const {
  if (p < 1 || p > p_max_ || n > n_max_) return -std::numeric_limits<double>::infinity();
  return boltzmann_log_weight(cfg_, n, p) - log_z_;
}

namespace {

long draw_p(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
  return std::min<long>(static_cast<long>(it - cdf.begin()), static_cast<long>(cdf.size()) - 1);
}

std::vector<double> row_cdf(const BoltzmannLaw& law, long p) {
  auto v = law.scaled_row(p);
  double acc = 0.0;
  for (double& x : v) {
    acc += x;
    x = acc;
  }
  for (double& x : v) x /= acc;
  return v;
}

long draw_n(const BoltzmannLaw& law, const std::vector<double>& cdf, long p, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const long k = std::min<long>(static_cast<long>(it - cdf.begin()), static_cast<long>(cdf.size()) - 1);
  return law.row_begin(p) + k;
}

}  // namespace

std::pair<long, long> boltzmann_sample(const BoltzmannLaw& law, RngStream& rng) {
  const auto& pc = law.p_cdf();
  const long p = draw_p(pc, rng.uniform());
  return {draw_n(law, row_cdf(law, p), p, rng.uniform()), p};
}

std::vector<std::pair<long, long>> boltzmann_sample_batch(const BoltzmannLaw& law, std::uint64_t seed,
                                                          std::size_t n_draws) {
  const auto& pc = law.p_cdf();
  std::vector<std::pair<long, long>> out(n_draws);
  std::vector<double> un(n_draws);
  std::map<long, std::vector<size_t>> by_p;
  for (size_t d = 0; d < n_draws; ++d) {
    RngStream rng(seed, stream_id(d, StreamPurpose::maps));
    const long p = draw_p(pc, rng.uniform());
    un[d] = rng.uniform();
    out[d].second = p;
    by_p[p].push_back(d);
  }
  for (const auto& [p, ds] : by_p) {
    const auto cdf = row_cdf(law, p);
    for (size_t d : ds) out[d].first = draw_n(law, cdf, p, un[d]);
  }
  return out;
}

double conjectured_log_density(double V, double l, double mu, double mu_boundary) {
  return -1.5 * std::log(V) + 0.5 * std::log(l) - mu * V - mu_boundary * l - gaussian_exponent(V, l);
}

DensityReport joint_density_check(const BoltzmannLaw& law, const std::vector<std::pair<long, long>>& draws,
                                  const DensityBinning& b) {
  const auto& cfg = law.config();
  const double a = cfg.a;
  if (b.v_bins < 1 || b.l_bins < 1 || !(b.v_max > b.v_min && b.l_max > b.l_min) || !(b.v_min > 0.0 && b.l_min > 0.0))
    fail(ErrorKind::config, "density binning: need positive, increasing ranges");
  const long n_first = std::llround(b.v_min / (a * a));
  const long n_width = std::llround((b.v_max - b.v_min) / b.v_bins / (a * a));
  const long p_first = std::llround(b.l_min / (2.0 * a));
  const long p_width = std::llround((b.l_max - b.l_min) / b.l_bins / (2.0 * a));
  if (n_width < 1 || p_width < 1) fail(ErrorKind::config, "density binning finer than the lattice");
  if (n_first + n_width * b.v_bins - 1 > law.n_max() || p_first + p_width * b.l_bins - 1 > law.p_max())
    fail(ErrorKind::config, "density binning exceeds the truncated table");
  const int nv = b.v_bins, nl = b.l_bins;

  DensityReport rep;
  rep.n_draws = draws.size();
  rep.observed.assign(nv, std::vector<double>(nl, 0.0));
  for (const auto& [n, p] : draws) {
    const long i = n >= n_first ? (n - n_first) / n_width : -1;
    const long j = p >= p_first ? (p - p_first) / p_width : -1;
    if (i < 0 || i >= nv || j < 0 || j >= nl) continue;
    rep.observed[i][j] += 1.0;
    ++rep.in_range;
  }

  // Conjectured density integrated over each bin, edges at lattice half-points.
  using GL = boost::math::quadrature::gauss<double, 20>;
  std::vector<std::vector<double>> conj(nv, std::vector<double>(nl));
  double conj_total = 0.0;
  for (int i = 0; i < nv; ++i) {
    const double v0 = a * a * (n_first + i * n_width - 0.5), v1 = a * a * (n_first + (i + 1) * n_width - 0.5);
    for (int j = 0; j < nl; ++j) {
      const double l0 = 2.0 * a * (p_first + j * p_width - 0.5), l1 = 2.0 * a * (p_first + (j + 1) * p_width - 0.5);
      conj[i][j] = GL::integrate(
          [&](double V) {
            return GL::integrate(
                [&](double l) { return std::exp(conjectured_log_density(V, l, cfg.mu, cfg.mu_boundary)); }, l0, l1);
          },
          v0, v1);
      conj_total += conj[i][j];
    }
  }
  rep.expected_conjecture.assign(nv, std::vector<double>(nl));
  int used = 0;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nl; ++j) {
      const double e = rep.in_range * conj[i][j] / conj_total;
      rep.expected_conjecture[i][j] = e;
      if (e < 5.0) {
        ++rep.underpowered_bins;
        continue;
      }
      rep.chi2 += (rep.observed[i][j] - e) * (rep.observed[i][j] - e) / e;
      ++used;
    }
  rep.dof = used - 1;
  rep.p_value = rep.dof > 0 ? stats::chi2_sf(rep.chi2, rep.dof) : std::numeric_limits<double>::quiet_NaN();

  for (int i = 0; i < nv; ++i) {
    double row_obs = 0.0, row_conj = 0.0;
    for (int j = 0; j < nl; ++j) {
      row_obs += rep.observed[i][j];
      row_conj += conj[i][j];
    }
    int k = 0;
    for (int j = 0; j < nl; ++j) {
      const double e = row_obs * conj[i][j] / row_conj;
      if (e < 5.0) continue;
      rep.slice_chi2 += (rep.observed[i][j] - e) * (rep.observed[i][j] - e) / e;
      ++k;
    }
    if (k > 1) rep.slice_dof += k - 1;
  }
  rep.slice_p_value =
      rep.slice_dof > 0 ? stats::chi2_sf(rep.slice_chi2, rep.slice_dof) : std::numeric_limits<double>::quiet_NaN();

  // Exact cell probabilities from the truncated law.
  rep.expected_exact.assign(nv, std::vector<double>(nl, 0.0));
  const double nd = static_cast<double>(draws.size());
  for (int j = 0; j < nl; ++j)
    for (long p = p_first + j * p_width; p < p_first + (j + 1) * p_width; ++p) {
      const auto v = law.scaled_row(p);
      if (v.empty()) continue;
      const double s = std::exp(law.row_log_scale(p));
      const long nb = law.row_begin(p);
      for (int i = 0; i < nv; ++i) {
        double acc = 0.0;
        for (long n = std::max(nb, n_first + i * n_width); n < n_first + (i + 1) * n_width; ++n) acc += v[n - nb];
        rep.expected_exact[i][j] += s * acc;
      }
    }
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nl; ++j) {
      const double prob = rep.expected_exact[i][j];
      rep.expected_exact[i][j] = nd * prob;
      if (rep.expected_exact[i][j] < 100.0) continue;
      ++rep.powered_cells;
      const double z = (rep.observed[i][j] - nd * prob) / std::sqrt(nd * prob * (1.0 - prob));
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
      if (std::abs(z) > 3.0) ++rep.cells_beyond_3se;
    }
  return rep;
}

}  // namespace lqft
