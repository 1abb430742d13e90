#include "lqft/liouville.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "lqft/parallel.hpp"
#include "lqft/stats.hpp"

namespace lqft {

namespace {

constexpr double kCoincide = 1e-12;

bool close(const DiskPoint& a, const DiskPoint& b) { return std::abs(a.z() - b.z()) < kCoincide; }

}  // namespace

void InsertionSet::validate() const {
  for (const auto& b : bulk)
    if (!b.z.interior()) fail(ErrorKind::domain, "bulk insertion must be interior");
  for (const auto& b : boundary)
    if (!b.s.on_boundary()) fail(ErrorKind::domain, "boundary insertion must lie on the unit circle");
  const auto m = marks();
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = i + 1; j < m.size(); ++j)
      if (close(m[i], m[j])) fail(ErrorKind::domain, "coincident marked points");
}

double InsertionSet::s_total() const {
  double s = -params.Q();
  for (const auto& b : bulk) s += b.alpha;
  for (const auto& b : boundary) s += 0.5 * b.beta;
  return s;
}

std::vector<DiskPoint> InsertionSet::marks() const {
  std::vector<DiskPoint> m;
  for (const auto& b : bulk) m.push_back(b.z);
  for (const auto& b : boundary) m.push_back(b.s);
  return m;
}

InsertionSet InsertionSet::moved(const MobiusMap& psi) const {
  InsertionSet out = *this;
  for (auto& b : out.bulk) b.z = psi.apply(b.z);
  for (auto& b : out.boundary) b.s = psi.apply(b.s);
  return out;
}

std::vector<std::string> AdmissibilityVerdict::findings() const {
  std::vector<std::string> f;
  if (!bound1_ok) f.push_back(fmt::format("bound1 violated: s_total = {:.10g} <= 0", s_total));
  if (seiberg_case == SeibergCase::mu_positive && !bound2_ok) f.push_back("bound2 violated: some alpha_i >= Q");
  if (!bound3_ok) f.push_back("bound3 violated: some beta_j >= Q");
  return f;
}

AdmissibilityVerdict seiberg_check(const InsertionSet& ins) {
  ins.params.validate();
  ins.validate();
  AdmissibilityVerdict v;
  const double Q = ins.params.Q();
  v.s_total = ins.s_total();
  v.bound1_ok = v.s_total > 0.0;
  v.bound2_ok = std::all_of(ins.bulk.begin(), ins.bulk.end(), [&](const auto& b) { return b.alpha < Q; });
  v.bound3_ok = std::all_of(ins.boundary.begin(), ins.boundary.end(), [&](const auto& b) { return b.beta < Q; });
  if (ins.params.mu > 0.0) {
    v.seiberg_case = SeibergCase::mu_positive;
    v.admissible = v.bound1_ok && v.bound2_ok && v.bound3_ok;
  } else {
    v.seiberg_case = SeibergCase::mu_zero_boundary_positive;
    v.admissible = v.bound1_ok && v.bound3_ok;
  }
  return v;
}

void require_admissible(const InsertionSet& ins) {
  const auto v = seiberg_check(ins);
  if (v.admissible) return;
  std::string msg = "insertion set not Seiberg-admissible:";
  for (const auto& f : v.findings()) msg += " " + f + ";";
  fail(ErrorKind::admissibility, msg);
}

double insertion_drift(const InsertionSet& ins, const DiskPoint& x) {
  double h = 0.0;
  for (const auto& b : ins.bulk) {
    if (close(x, b.z)) fail(ErrorKind::domain, "insertion_drift: x sits on a bulk insertion");
    h += b.alpha * green(x, b.z);
  }
  for (const auto& b : ins.boundary) {
    if (close(x, b.s)) fail(ErrorKind::domain, "insertion_drift: x sits on a boundary insertion");
    h += 0.5 * b.beta * green(x, b.s);
  }
  return h;
}

double log_constant(const InsertionSet& ins) {
  ins.validate();
  const auto& B = ins.bulk;
  const auto& S = ins.boundary;
  double c = 0.0;
  for (size_t i = 0; i < B.size(); ++i)
    for (size_t k = i + 1; k < B.size(); ++k) c += B[i].alpha * B[k].alpha * green(B[i].z, B[k].z);
  for (size_t j = 0; j < S.size(); ++j)
    for (size_t k = j + 1; k < S.size(); ++k) c += 0.25 * S[j].beta * S[k].beta * green(S[j].s, S[k].s);
  for (const auto& b : B)
    for (const auto& s : S) c += 0.5 * b.alpha * s.beta * green(b.z, s.s);
  for (const auto& s : S) c -= s.beta * s.beta / 8.0;
  return c;
}

double log_partition_prefactor(const InsertionSet& ins) {
  double v = log_constant(ins);
  for (const auto& b : ins.bulk) v += 0.25 * b.alpha * b.alpha * std::log(poincare_density(b.z));
  return v;
}

namespace {

// Arc kept unless its center is within one arc length of a boundary mark.
std::vector<int> kept_arcs(const InsertionSet& ins, int n_arcs) {
  std::vector<int> keep;
  const double arc = kTwoPi / n_arcs;
  for (int k = 0; k < n_arcs; ++k) {
    const auto p = DiskPoint::on_circle(kTwoPi * (k + 0.5) / n_arcs);
    bool ok = true;
    for (const auto& b : ins.boundary)
      if (std::abs(p.z() - b.s.z()) < arc) ok = false;
    if (ok) keep.push_back(k);
  }
  return keep;
}

}  // namespace

namespace {

struct Mark {
  cplx m;
  double rho, phi;  // polar coordinates, phi in [0, 2 pi)
  double kappa;     // e^{gamma H} ~ |x - m|^{-kappa}
};

bool angle_in(double phi, double t0, double t1) {
  return (phi >= t0 && phi <= t1) || (phi + kTwoPi >= t0 && phi + kTwoPi <= t1);
}

// Integral of e^{gamma H} over an annular sector, in polar coordinates (rho, psi)
// centered at a mark. With u = rho^e, e = 2 - kappa, the radial integrand
// e^{gamma H} rho^kappa / e is smooth, so Gauss-Legendre in u is accurate up to the mark.
class CellIntegrator {
 public:
  explicit CellIntegrator(const InsertionSet& ins) : ins_(ins) {}

  double integral(const PolarCell& c, const Mark& m) const {
    cell_ = c;
    mark_ = m;
    e_ = m.kappa < 2.0 ? 2.0 - m.kappa : 1.0;
    full_ = c.t1 - c.t0 >= kTwoPi - 1e-12;
    const bool on_bd = std::abs(m.rho - 1.0) < 1e-12;
    // Directions along which the ray's intersection with the cell changes shape.
    double lo = 0.0, hi = kTwoPi;
    if (on_bd) {
      lo = m.phi + 0.5 * kPi;
      hi = m.phi + 1.5 * kPi;
    }
    std::vector<double> br{lo, hi};
    auto add_dir = [&](cplx d) {
      if (std::abs(d) < 1e-15) return;
      double a = std::arg(d);
      while (a < lo) a += kTwoPi;
      while (a >= lo + kTwoPi) a -= kTwoPi;
      if (a > lo && a < hi) br.push_back(a);
    };
    const cplx mz = m.m;
    // A mark on an arc or on a sector edge turns these into kinks as well.
    for (double t : {m.phi + 0.5 * kPi, m.phi - 0.5 * kPi}) add_dir(std::polar(1.0, t));
    if (!full_)
      for (double t : {c.t0, c.t1}) {
        add_dir(std::polar(1.0, t));
        add_dir(std::polar(1.0, t + kPi));
      }
    for (double r : {c.r0, c.r1}) {
      if (!full_)
        for (double t : {c.t0, c.t1}) add_dir(std::polar(r, t) - mz);
      const double am = std::abs(mz);
      if (r > 0.0 && am > r) {
        const double base = std::arg(-mz), w = std::asin(r / am);
        add_dir(std::polar(1.0, base + w));
        add_dir(std::polar(1.0, base - w));
      }
    }
    std::sort(br.begin(), br.end());
    // Tangencies leave square-root endpoint singularities in psi; tanh-sinh absorbs them.
    static boost::math::quadrature::tanh_sinh<double> ts;  // integrate() is not const-qualified in this Boost
    double total = 0.0;
    for (size_t k = 0; k + 1 < br.size(); ++k) {
      if (br[k + 1] - br[k] < 1e-14) continue;
      const double a = br[k], b = br[k + 1];
      // Breakpoints separate rays that miss the cell from rays that hit it.
      if (ray(0.5 * (a + b)) == 0.0) continue;
      // Two-argument form: xc is the signed distance to the nearer endpoint.
      total += ts.integrate(
          [&](double, double xc) { return ray(std::clamp(xc < 0.0 ? a - xc : b - xc, a, b)); }, a, b, 1e-10);
    }
    return total;
  }

 private:
  bool in_cell(cplx x) const {
    const double r = std::abs(x);
    if (r < cell_.r0 - 1e-15 || r > cell_.r1 + 1e-15) return false;
    if (full_ || r < 1e-15) return true;
    double t = std::arg(x);
    if (t < 0.0) t += kTwoPi;
    return angle_in(t, cell_.t0, cell_.t1);
  }

  double ray(double psi) const {
    const cplx w = std::polar(1.0, psi), mz = mark_.m;
    std::vector<double> cuts{0.0};
    const double bq = std::real(std::conj(mz) * w), mm = std::norm(mz);
    for (double r : {cell_.r0, cell_.r1}) {
      const double disc = bq * bq - (mm - r * r);
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      for (double t : {-bq - sq, -bq + sq})
        if (t > 0.0) cuts.push_back(t);
    }
    if (!full_)
      for (double th : {cell_.t0, cell_.t1}) {
        const cplx rot = std::polar(1.0, -th);
        const double den = std::imag(w * rot);
        if (std::abs(den) < 1e-300) continue;
        const double t = -std::imag(mz * rot) / den;
        if (t > 0.0) cuts.push_back(t);
      }
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      if (b - a < 1e-15 || !in_cell(mz + 0.5 * (a + b) * w)) continue;
      s += radial(a, b, w);
    }
    return s;
  }

  double radial(double a, double b, cplx w) const {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const double g = ins_.params.gamma, e = e_;
    const double u0 = std::pow(a, e), u1 = std::pow(b, e);
    return GL::integrate(
        [&](double u) {
          // The factor is continuous at the mark; stay off it in floating point.
          const double rho = std::max(std::pow(u, 1.0 / e), 1e-9);
          const cplx x = mark_.m + rho * w;
          if (std::norm(x) >= 1.0) return 0.0;
          return std::exp(g * insertion_drift(ins_, DiskPoint(x)) + (2.0 - e) * std::log(rho)) / e;
        },
        u0, u1);
  }

  const InsertionSet& ins_;
  mutable PolarCell cell_{};
  mutable Mark mark_{};
  mutable double e_ = 1.0;
  mutable bool full_ = false;
};

}  // namespace

std::vector<double> drift_log_weights(const InsertionSet& ins, const PointGrid& grid) {
  ins.validate();
  const double g = ins.params.gamma;
  const bool polar = grid.cells.size() == grid.points.size() && !grid.cells.empty();
  std::vector<Mark> marks;
  std::vector<bool> integrable;
  auto add = [&](const DiskPoint& p, double kappa) {
    Mark m;
    m.m = p.z();
    m.rho = p.on_boundary() ? 1.0 : p.abs();
    m.phi = std::atan2(p.im(), p.re());
    if (m.phi < 0.0) m.phi += kTwoPi;
    m.kappa = kappa;
    marks.push_back(m);
    integrable.push_back(kappa < 2.0);
  };
  for (const auto& b : ins.bulk) add(b.z, g * b.alpha);
  for (const auto& b : ins.boundary) add(b.s, g * b.beta);
  const CellIntegrator integ(ins);

  std::vector<double> lw(grid.points.size());
  for (int i = 0; i < grid.size(); ++i) {
    const cplx x = grid.points[i].z();
    bool excluded = false;
    int nearest = -1;
    double best = 3.0 * grid.diameter[i];
    for (size_t k = 0; k < marks.size(); ++k) {
      const double d = std::abs(x - marks[k].m);
      if (d < grid.diameter[i] && (!integrable[k] || !polar)) excluded = true;
      if (d < best) {
        best = d;
        nearest = static_cast<int>(k);
      }
    }
    if (excluded) {
      lw[i] = -std::numeric_limits<double>::infinity();
    } else if (nearest >= 0 && polar) {
      lw[i] = std::log(integ.integral(grid.cells[i], marks[nearest]) / grid.areas[i]);
    } else {
      lw[i] = g * insertion_drift(ins, grid.points[i]);
    }
  }
  return lw;
}

ShiftedChaosPair shifted_chaos(const InsertionSet& ins, const FieldRealization& bulk_field,
                               const std::vector<double>& cell_areas, const BoundaryTrace& trace, int n_arcs,
                               bool enforce_admissibility) {
  if (enforce_admissibility) require_admissible(ins);
  ins.validate();
  const double g = ins.params.gamma;
  for (const auto& p : bulk_field.points)
    for (const auto& m : ins.marks())
      if (close(p, m)) fail(ErrorKind::unsupported, "shifted_chaos: a grid atom sits on a marked point");
  ShiftedChaosPair out;
  out.Z0 = bulk_measure(bulk_field, g, cell_areas);
  for (auto& a : out.Z0.atoms) a.mass *= std::exp(g * insertion_drift(ins, a.location));
  const auto bd = boundary_measure(trace, g, n_arcs);
  out.Z0_boundary = bd;
  out.Z0_boundary.atoms.clear();
  for (int k : kept_arcs(ins, n_arcs)) {
    Atom a = bd.atoms[k];
    a.mass *= std::exp(0.5 * g * insertion_drift(ins, a.location));
    out.Z0_boundary.atoms.push_back(a);
  }
  const double j = out.Z0_boundary.total();
  out.R = out.Z0.total() / (j * j);
  return out;
}

ChaosBackground::ChaosBackground(const ChaosSpec& spec)
    : spec_(spec),
      grid_(graded_polar_grid(spec.grid)),
      sampler_(regularized_covariance(grid_.points, grid_.eps)) {
  if (spec.n_modes < 1 || spec.n_arcs < 64) fail(ErrorKind::config, "chaos spec: n_modes >= 1, n_arcs >= 64");
}

std::vector<ReplicaChaos> shifted_chaos_replicas(const InsertionSet& ins, const ChaosBackground& bg,
                                                 const std::vector<PointFunction>& bulk_observables,
                                                 const std::vector<PointFunction>& boundary_observables,
                                                 std::uint64_t seed, std::size_t n, int workers, std::size_t offset,
                                                 bool enforce_admissibility) {
  if (enforce_admissibility) require_admissible(ins);
  ins.validate();
  const double g = ins.params.gamma;
  check_subcritical(g);
  const auto& grid = bg.grid();

  // Bulk atoms with a finite drift weight, with the log of their deterministic weight.
  const auto drift = drift_log_weights(ins, grid);
  std::vector<int> idx;
  std::vector<double> lw;
  for (int i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(drift[i])) continue;
    idx.push_back(i);
    lw.push_back(drift[i] + 0.5 * g * g * std::log(grid.eps[i]) + std::log(grid.areas[i]));
  }
  std::vector<std::vector<double>> obs(bulk_observables.size(), std::vector<double>(idx.size()));
  for (size_t k = 0; k < bulk_observables.size(); ++k)
    for (size_t t = 0; t < idx.size(); ++t) obs[k][t] = bulk_observables[k](grid.points[idx[t]]);

  const int n_arcs = bg.spec().n_arcs;
  const auto arcs = kept_arcs(ins, n_arcs);
  const double bshift = -g * g / 8.0 * (1.0 + truncated_variance(bg.spec().n_modes)) + std::log(kTwoPi / n_arcs);
  std::vector<double> blw;
  for (int k : arcs) blw.push_back(0.5 * g * insertion_drift(ins, DiskPoint::on_circle(kTwoPi * (k + 0.5) / n_arcs)) + bshift);
  std::vector<std::vector<double>> bobs(boundary_observables.size(), std::vector<double>(arcs.size()));
  for (size_t k = 0; k < boundary_observables.size(); ++k)
    for (size_t t = 0; t < arcs.size(); ++t)
      bobs[k][t] = boundary_observables[k](DiskPoint::on_circle(kTwoPi * (arcs[t] + 0.5) / n_arcs));

  std::vector<ReplicaChaos> out(n);
  for_each_chunk(n, workers, [&](size_t b, size_t e) {
    std::vector<RngStream> streams;
    for (size_t r = b; r < e; ++r) streams.emplace_back(seed, stream_id(offset + r, StreamPurpose::bulk));
    const Eigen::MatrixXd x = bg.sampler().sample(streams);
    std::vector<double> mass(idx.size());
    for (size_t r = b; r < e; ++r) {
      ReplicaChaos& rc = out[r];
      const auto col = static_cast<Eigen::Index>(r - b);
      for (size_t t = 0; t < idx.size(); ++t) mass[t] = std::exp(lw[t] + g * x(idx[t], col));
      rc.bulk_total = stats::sum(mass);
      for (const auto& o : obs) {
        double s = 0.0;
        for (size_t t = 0; t < idx.size(); ++t) s += o[t] * mass[t];
        rc.bulk_observables.push_back(s);
      }
      RngStream rng(seed, stream_id(offset + r, StreamPurpose::boundary));
      const auto xb = sample_boundary_trace(bg.spec().n_modes, rng).values_at_arcs(n_arcs);
      std::vector<double> bm(arcs.size());
      for (size_t t = 0; t < arcs.size(); ++t) bm[t] = std::exp(blw[t] + 0.5 * g * xb[arcs[t]]);
      rc.boundary_total = stats::sum(bm);
      for (const auto& o : bobs) {
        double s = 0.0;
        for (size_t t = 0; t < arcs.size(); ++t) s += o[t] * bm[t];
        rc.boundary_observables.push_back(s);
      }
      if (!std::isfinite(rc.bulk_total) || !std::isfinite(rc.boundary_total))
        fail(ErrorKind::numeric, fmt::format("replica {} produced a non-finite chaos total", offset + r));
    }
  });
  return out;
}

VolumeLawParams volume_law_params(const InsertionSet& ins) {
  if (ins.params.mu_boundary != 0.0) fail(ErrorKind::parameter, "volume_law_params: only for mu_boundary = 0");
  if (!(ins.params.mu > 0.0)) fail(ErrorKind::parameter, "volume_law_params: needs mu > 0");
  require_admissible(ins);
  return {ins.s_total() / ins.params.gamma, ins.params.mu};
}

namespace {

constexpr double kTailDrop = 1e-12;

struct Laplace {
  double a, b1, k1, b2, k2;
  double ell(double t) const { return a * t - b1 * std::exp(k1 * t) - b2 * std::exp(k2 * t); }
  double slope(double t) const { return a - b1 * k1 * std::exp(k1 * t) - b2 * k2 * std::exp(k2 * t); }
};

struct Bracket {
  double t_star, l_star, t_lo, t_hi;
};

Bracket bracket(const Laplace& f) {
  if (!(f.a > 0.0 && f.k1 > 0.0 && f.k2 > 0.0) || f.b1 < 0.0 || f.b2 < 0.0 || !(f.b1 + f.b2 > 0.0))
    fail(ErrorKind::parameter, "laplace integral: need a, k > 0 and b1 + b2 > 0");
  // slope is strictly decreasing; locate its root.
  double hi = std::numeric_limits<double>::infinity();
  if (f.b1 > 0.0) hi = std::min(hi, std::log(f.a / (f.b1 * f.k1)) / f.k1);
  if (f.b2 > 0.0) hi = std::min(hi, std::log(f.a / (f.b2 * f.k2)) / f.k2);
  double step = 1.0, lo = hi - step;
  while (f.slope(lo) <= 0.0) {
    step *= 2.0;
    lo = hi - step;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f.slope(mid) > 0.0 ? lo : hi) = mid;
  }
  Bracket br;
  br.t_star = 0.5 * (lo + hi);
  br.l_star = f.ell(br.t_star);
  // Concavity bounds each tail by e^{ell(t)} / |slope(t)|.
  const double target = std::log(kTailDrop) - 2.0;
  double d = 1.0;
  for (;;) {
    const double t = br.t_star - d;
    const double s = f.slope(t);
    if (s > 0.0 && f.ell(t) - br.l_star - std::log(s) < target) {
      br.t_lo = t;
      break;
    }
    d *= 1.5;
    if (d > 1e7) fail(ErrorKind::numeric, "laplace integral: left tail does not decay");
  }
  d = 1.0;
  for (;;) {
    const double t = br.t_star + d;
    const double s = -f.slope(t);
    if (s > 0.0 && f.ell(t) - br.l_star - std::log(s) < target) {
      br.t_hi = t;
      break;
    }
    d *= 1.5;
    if (d > 1e7) fail(ErrorKind::numeric, "laplace integral: right tail does not decay");
  }
  return br;
}

double log_laplace(const Laplace& f) {
  const Bracket br = bracket(f);
  auto g = [&](double t) { return std::exp(f.ell(t) - br.l_star); };
  double err_l = 0.0, err_r = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double left = GK::integrate(g, br.t_lo, br.t_star, 25, 1e-14, &err_l);
  const double right = GK::integrate(g, br.t_star, br.t_hi, 25, 1e-14, &err_r);
  const double total = left + right;
  if (!(total > 0.0) || (err_l + err_r) > 1e-9 * total)
    fail(ErrorKind::numeric, fmt::format("laplace integral did not converge (relative error {:.3e})",
                                         (err_l + err_r) / total));
  return br.l_star + std::log(total);
}

}  // namespace

double log_laplace_integral(double a, double b1, double k1, double b2, double k2) {
  return log_laplace({a, b1, k1, b2, k2});
}

namespace {

// Inverse-CDF sampler for t with density proportional to e^{ell(t)}, tabulated on a grid.
class LogGridSampler {
 public:
  explicit LogGridSampler(const Laplace& f, int n = 8192) {
    const Bracket br = bracket(f);
    t_.resize(n);
    cdf_.resize(n);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      t_[i] = br.t_lo + (br.t_hi - br.t_lo) * i / (n - 1);
      const double v = std::exp(f.ell(t_[i]) - br.l_star);
      cdf_[i] = i ? cdf_[i - 1] + 0.5 * (prev + v) * (t_[i] - t_[i - 1]) : 0.0;
      prev = v;
    }
    for (double& c : cdf_) c /= cdf_.back();
  }
  double draw(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return t_.front();
    if (it == cdf_.end()) return t_.back();
    const size_t i = static_cast<size_t>(it - cdf_.begin());
    const double w = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
    return t_[i - 1] + w * (t_[i] - t_[i - 1]);
  }

 private:
  std::vector<double> t_, cdf_;
};

bool half_plane(const DiskPoint& x) { return x.re() > 0.0; }

}  // namespace

VolumeLawSample sample_liouville_triples(const InsertionSet& ins, const ChaosBackground& bg, std::size_t n_replicas,
                                         std::size_t n_draws, std::uint64_t seed, int workers) {
  require_admissible(ins);
  const double g = ins.params.gamma, mu = ins.params.mu, mub = ins.params.mu_boundary;
  const double s = ins.s_total();
  const double a = 2.0 * s / g;
  auto half = [](const DiskPoint& x) { return half_plane(x) ? 1.0 : 0.0; };
  const auto reps = shifted_chaos_replicas(ins, bg, {half}, {half}, seed, n_replicas, workers);

  VolumeLawSample out;
  out.replica_log_weights.resize(n_replicas);
  for (size_t r = 0; r < n_replicas; ++r) {
    const double J = reps[r].boundary_total;
    const double R = reps[r].bulk_total / (J * J);
    double lnorm;
    if (mub == 0.0)
      lnorm = std::log(0.5) + std::lgamma(0.5 * a) - 0.5 * a * std::log(mu * R);
    else if (mu == 0.0)
      lnorm = std::lgamma(a) - a * std::log(mub);
    else
      lnorm = log_laplace({a, mu * R, 2.0, mub, 1.0});
    out.replica_log_weights[r] = -a * std::log(J) + lnorm;
  }
  const double lmax = *std::max_element(out.replica_log_weights.begin(), out.replica_log_weights.end());
  if (!std::isfinite(lmax)) fail(ErrorKind::numeric, "volume law: all replica weights underflow");
  std::vector<double> cum(n_replicas);
  double sw = 0.0, sw2 = 0.0;
  for (size_t r = 0; r < n_replicas; ++r) {
    const double w = std::exp(out.replica_log_weights[r] - lmax);
    sw += w;
    sw2 += w * w;
    cum[r] = sw;
  }
  out.effective_sample_size = sw * sw / sw2;

  RngStream pick(seed, stream_id(0, StreamPurpose::resample));
  std::vector<size_t> chosen(n_draws);
  for (auto& c : chosen) {
    const double u = pick.uniform() * sw;
    c = std::min<size_t>(static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), n_replicas - 1);
  }
  std::map<size_t, LogGridSampler> samplers;
  for (size_t c : chosen) {
    if (samplers.count(c)) continue;
    const double J = reps[c].boundary_total;
    samplers.emplace(c, LogGridSampler({a, mu * reps[c].bulk_total / (J * J), 2.0, mub, 1.0}));
  }
  out.draws.resize(n_draws);
  for (size_t d = 0; d < n_draws; ++d) {
    const size_t c = chosen[d];
    RngStream rng(seed, stream_id(d, StreamPurpose::volume));
    const double y = std::exp(samplers.at(c).draw(rng.uniform()));
    const double J = reps[c].boundary_total;
    TripleDraw& t = out.draws[d];
    t.replica = c;
    t.L = y;
    t.V = y * y * reps[c].bulk_total / (J * J);
    t.bulk_half_fraction = reps[c].bulk_observables[0] / reps[c].bulk_total;
    t.boundary_half_fraction = reps[c].boundary_observables[0] / J;
  }
  return out;
}

TripleDraw sample_liouville_triple(const InsertionSet& ins, RngStream& rng, std::size_t n_replicas) {
  const ChaosBackground bg(ChaosSpec{});
  return sample_liouville_triples(ins, bg, n_replicas, 1, rng.engine()(), 1).draws.front();
}

PartitionEstimate partition_from_replicas(const InsertionSet& ins, const std::vector<ReplicaChaos>& reps) {
  require_admissible(ins);
  const size_t n = reps.size();
  if (n < 2) fail(ErrorKind::parameter, "partition estimate needs replicas");
  const double g = ins.params.gamma, mu = ins.params.mu, mub = ins.params.mu_boundary;
  const double s = ins.s_total();
  std::vector<double> lq(n), lc(n);
  for (size_t r = 0; r < n; ++r) {
    lq[r] = log_laplace({s, mu * reps[r].bulk_total, g, mub * reps[r].boundary_total, 0.5 * g});
    if (mub == 0.0) lc[r] = -std::log(g) + std::lgamma(s / g) - s / g * std::log(mu * reps[r].bulk_total);
  }
  const double pre = log_partition_prefactor(ins);
  auto mean_of = [&](const std::vector<double>& l, double& se) {
    const double m = *std::max_element(l.begin(), l.end());
    std::vector<double> v(n);
    for (size_t r = 0; r < n; ++r) v[r] = std::exp(l[r] - m);
    const auto ms = stats::mean_se(v);
    se = std::exp(pre + m) * ms.se;
    return pre + m + std::log(ms.mean);
  };
  PartitionEstimate est;
  est.replicas = n;
  double se_q = 0.0, se_c = 0.0;
  const double log_q = mean_of(lq, se_q);
  est.quadrature_value = std::exp(log_q);
  if (mub == 0.0) {
    const double log_c = mean_of(lc, se_c);
    est.closed_form_value = std::exp(log_c);
    est.log_value = log_c;
    est.std_error = se_c;
  } else {
    est.closed_form_value = std::numeric_limits<double>::quiet_NaN();
    est.log_value = log_q;
    est.std_error = se_q;
  }
  est.value = std::exp(est.log_value);
  return est;
}

PartitionEstimate partition_estimate(const InsertionSet& ins, const ChaosBackground& bg, std::size_t n_replicas,
                                     std::uint64_t seed, int workers, std::size_t offset) {
  if (n_replicas < 100) fail(ErrorKind::parameter, "partition_estimate: n_replicas >= 100");
  return partition_from_replicas(ins, shifted_chaos_replicas(ins, bg, {}, {}, seed, n_replicas, workers, offset));
}

PartitionEstimate partition_estimate(const InsertionSet& ins, std::size_t n_replicas, RngStream& rng) {
  const ChaosBackground bg(ChaosSpec{});
  return partition_estimate(ins, bg, n_replicas, rng.engine()(), 1);
}

double kpz_log_weight(const InsertionSet& ins, const MobiusMap& psi) {
  double w = 0.0;
  for (const auto& b : ins.bulk)
    w -= 2.0 * conformal_weight(b.alpha, ins.params) * std::log(std::abs(psi.derivative(b.z)));
  for (const auto& b : ins.boundary)
    w -= conformal_weight(b.beta, ins.params) * std::log(std::abs(psi.derivative(b.s)));
  return w;
}

UnitVolumeEstimate unit_volume_expectation(const InsertionSet& ins, const PointFunction& g, const ChaosBackground& bg,
                                           std::size_t n_replicas, std::uint64_t seed, int workers) {
  if (ins.params.mu_boundary != 0.0) fail(ErrorKind::parameter, "unit_volume_expectation: needs mu_boundary = 0");
  if (!ins.bulk.empty() || ins.boundary.size() != 3) fail(ErrorKind::parameter, "unit_volume_expectation: exactly three boundary insertions");
  for (const auto& b : ins.boundary)
    if (std::abs(b.beta - ins.params.gamma) > 1e-12) fail(ErrorKind::parameter, "unit_volume_expectation: each beta must equal gamma");
  const double p = 1.5 - ins.params.Q() / ins.params.gamma;
  const auto reps = shifted_chaos_replicas(ins, bg, {g}, {}, seed, n_replicas, workers);
  const size_t n = reps.size();
  std::vector<double> lw(n);
  for (size_t r = 0; r < n; ++r) lw[r] = -p * std::log(reps[r].bulk_total);
  const double m = *std::max_element(lw.begin(), lw.end());
  std::vector<double> wf(n), w(n);
  double sw = 0.0, sw2 = 0.0;
  for (size_t r = 0; r < n; ++r) {
    w[r] = std::exp(lw[r] - m);
    wf[r] = w[r] * reps[r].bulk_observables[0] / reps[r].bulk_total;
    sw += w[r];
    sw2 += w[r] * w[r];
  }
  const auto jk = stats::jackknife_ratio(wf, w);
  UnitVolumeEstimate est;
  est.value = jk.estimate;
  est.std_error = jk.se;
  est.effective_sample_size = sw * sw / sw2;
  est.degenerate_weights = est.effective_sample_size < 10.0;
  return est;
}

}  // namespace lqft
