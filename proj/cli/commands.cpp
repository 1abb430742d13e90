#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/gamma.hpp>

#include "lqft/conformal_factor.hpp"
#include "lqft/critical_gmc.hpp"
#include "lqft/disk_geometry.hpp"
#include "lqft/gff.hpp"
#include "lqft/gmc.hpp"
#include "lqft/liouville.hpp"
#include "lqft/planar_maps.hpp"
#include "lqft/stats.hpp"

namespace lqft::cli {

namespace {

using Findings = std::vector<std::string>;

// ---------------------------------------------------------------- shared parsing

GradedGridSpec parse_grid(Params& p) {
  Params g = p.child("grid");
  GradedGridSpec s;
  s.inner_rings = static_cast<int>(g.integer("inner_rings", s.inner_rings));
  s.bands = static_cast<int>(g.integer("bands", s.bands));
  s.rings_per_band = static_cast<int>(g.integer("rings_per_band", s.rings_per_band));
  s.aspect = g.real("aspect", s.aspect);
  s.sector_multiple = static_cast<int>(g.integer("sector_multiple", s.sector_multiple));
  p.adopt("grid", g);
  return s;
}

ChaosSpec parse_chaos(Params& p) {
  ChaosSpec c;
  c.grid = parse_grid(p);
  c.n_modes = static_cast<int>(p.integer("n_modes", c.n_modes));
  c.n_arcs = static_cast<int>(p.integer("n_arcs", c.n_arcs));
  if (c.n_modes < 1) fail(ErrorKind::config, "n_modes must be >= 1");
  if (c.n_arcs < 64) fail(ErrorKind::config, "n_arcs must be >= 64");
  return c;
}

std::size_t positive_count(Params& p, const std::string& key, long def, long min = 1) {
  const long v = p.integer(key, def);
  if (v < min) fail(ErrorKind::config, fmt::format("{} must be >= {}", key, min));
  return static_cast<std::size_t>(v);
}

DiskPoint parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorKind::config, where + ": expected [re, im]");
  return DiskPoint(j[0].get<double>(), j[1].get<double>());
}

struct InsertionDefaults {
  LiouvilleParams params;
  json insertions;
};

// {gamma, mu, mu_boundary, insertions: [{kind, position: [re, im] | angle, weight}]}
InsertionSet parse_insertions(Params& p, const InsertionDefaults& d) {
  InsertionSet ins;
  ins.params.gamma = p.real("gamma", d.params.gamma);
  ins.params.mu = p.real("mu", d.params.mu);
  ins.params.mu_boundary = p.real("mu_boundary", d.params.mu_boundary);
  const json list = p.raw("insertions", d.insertions);
  if (!list.is_array()) fail(ErrorKind::config, "insertions: expected an array");
  json resolved = json::array();
  for (size_t i = 0; i < list.size(); ++i) {
    Params e(list[i], fmt::format("insertions[{}]", i));
    const std::string kind = e.text("kind", "bulk");
    const double w = e.real("weight", 0.0);
    DiskPoint z;
    if (e.has("angle")) {
      z = DiskPoint::on_circle(e.real("angle", 0.0));
    } else {
      z = parse_point(e.raw("position", json::array({0.0, 0.0})), fmt::format("insertions[{}].position", i));
      e.set_resolved("position", json::array({z.re(), z.im()}));
    }
    if (kind == "bulk") {
      if (!z.interior() || z.abs() >= 1.0) fail(ErrorKind::config, fmt::format("insertions[{}]: bulk point must be interior", i));
      ins.bulk.push_back({z, w});
    } else if (kind == "boundary") {
      if (!z.on_boundary()) fail(ErrorKind::config, fmt::format("insertions[{}]: boundary point must have |s| = 1", i));
      ins.boundary.push_back({z, w});
    } else {
      fail(ErrorKind::config, fmt::format("insertions[{}].kind: expected bulk or boundary", i));
    }
    e.finish();
    resolved.push_back(e.resolved());
  }
  p.set_resolved("insertions", resolved);
  ins.params.validate();
  ins.validate();
  return ins;
}

json verdict_json(const AdmissibilityVerdict& v) {
  const char* c = v.seiberg_case == SeibergCase::mu_positive                ? "mu_positive"
                  : v.seiberg_case == SeibergCase::mu_zero_boundary_positive ? "mu_zero_boundary_positive"
                                                                             : "degenerate";
  return {{"case", c},         {"bound1_ok", v.bound1_ok}, {"bound2_ok", v.bound2_ok},     {"bound3_ok", v.bound3_ok},
          {"admissible", v.admissible}, {"s_total", v.s_total}, {"findings", v.findings()}};
}

void require(const InsertionSet& ins) {
  const auto v = seiberg_check(ins);
  if (!v.admissible)
    throw Rejection("insertion set violates the Seiberg bounds: " + fmt::format("{}", fmt::join(v.findings(), "; ")),
                    verdict_json(v));
}

Findings seiberg_findings(const InsertionSet& ins) { return seiberg_check(ins).findings(); }

json mean_summary(const std::string& anchor, const std::string& estimator, const stats::MeanSe& m) {
  return {{"anchor", anchor}, {"estimator", estimator}, {"estimate", m.mean}, {"stderr", m.se}, {"replicas", m.n}};
}

// ---------------------------------------------------------------- green-selftest

struct SelftestCfg {
  std::size_t n_samples;
  double r_max;
};

SelftestCfg parse_selftest(Params& p) {
  SelftestCfg c;
  c.n_samples = positive_count(p, "n_samples", 10000);
  c.r_max = p.real("r_max", 0.95);
  if (!(c.r_max > 0.0 && c.r_max < 1.0)) fail(ErrorKind::config, "r_max must lie in (0, 1)");
  return c;
}

json run_selftest(Params& p, Run& run) {
  const auto c = parse_selftest(p);
  p.finish();
  std::mt19937_64 g(run.seed());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto point = [&](double rmax) { return std::polar(rmax * std::sqrt(u(g)), kTwoPi * u(g)); };
  double sym = 0, origin = 0, mob = 0, gpsi = 0, var = 0, mean_bd = 0;
  for (std::size_t i = 0; i < c.n_samples; ++i) {
    const DiskPoint x(point(c.r_max)), y(point(c.r_max));
    if (std::abs(x.z() - y.z()) < 1e-3) continue;
    sym = std::max(sym, std::abs(green(x, y) - green(y, x)));
    origin = std::max(origin, std::abs(green(DiskPoint(0, 0), y) + std::log(y.abs())));
    const MobiusMap psi(point(0.9), kTwoPi * u(g) - kPi);
    const cplx px = psi.apply(x.z()), py = psi.apply(y.z());
    const double dx = std::abs(psi.derivative(x.z())), dy = std::abs(psi.derivative(y.z()));
    mob = std::max(mob, std::abs(std::abs(1.0 - px * std::conj(py)) -
                                 std::sqrt(dx * dy) * std::abs(1.0 - x.z() * std::conj(y.z()))));
    gpsi = std::max(gpsi, std::abs(green(DiskPoint(px), DiskPoint(py)) - green(x, y) + std::log(dx) + std::log(dy)));
    const double e = 0.5 * (1.0 - x.abs());
    var = std::max(var, std::abs(variance_asymptotic_check(x, {e})[0] - 0.5 * std::log(poincare_density(x))));
  }
  for (double r : {0.0, 0.4, 0.8}) mean_bd = std::max(mean_bd, std::abs(green_mean_boundary(DiskPoint(r, 0.0), 4096)));
  const std::vector<std::pair<std::string, double>> rows = {
      {"symmetry", sym},        {"green_origin", origin},          {"mobius_formula", mob},
      {"green_mobius", gpsi},   {"regularized_variance", var},     {"boundary_mean", mean_bd}};
  io::CsvWriter csv(run.artifact("residuals.csv"), {"identity", "max_residual", "samples"});
  double worst = 0.0;
  for (const auto& [name, v] : rows) {
    csv.values(name, v, static_cast<unsigned long>(name == "boundary_mean" ? 3 : c.n_samples));
    worst = std::max(worst, v);
  }
  return {{"anchor", "Green function symmetry, G(0,y) = -ln|y|, Mobius identities, exact regularized variance"},
          {"estimator", "max_residual"},
          {"estimate", worst},
          {"stderr", 0.0},
          {"replicas", c.n_samples},
          {"diagnostics", {{"all_below_1e-12", worst < 1e-12}}}};
}

// ---------------------------------------------------------------- field-sample

struct FieldCfg {
  std::vector<DiskPoint> points;
  std::vector<double> eps;
  std::size_t n_snapshots;
  double spacing = 0.0, eps0 = 0.0;
};

FieldCfg parse_field(Params& p) {
  FieldCfg c;
  const std::string layout = p.text("layout", "lattice");
  if (layout == "lattice") {
    c.eps0 = p.real("eps", 0.05);
    c.spacing = p.real("spacing", 2.0 * c.eps0);
    const double rho = p.real("rho", 0.8);
    if (!(c.eps0 > 0.0) || !(c.spacing > 0.0) || !(rho > 0.0) || rho + c.eps0 >= 1.0)
      fail(ErrorKind::config, "lattice: need eps, spacing, rho > 0 and rho + eps < 1");
    const int n = static_cast<int>(std::ceil(rho / c.spacing)) + 1;
    for (int j = -n; j < n; ++j)
      for (int i = -n; i < n; ++i) {
        const double x = c.spacing * (i + 0.5), y = c.spacing * (j + 0.5);
        if (std::hypot(x, y) <= rho) c.points.emplace_back(x, y);
      }
    c.eps.assign(c.points.size(), c.eps0);
  } else if (layout == "graded") {
    const PointGrid g = graded_polar_grid(parse_grid(p));
    c.points = g.points;
    c.eps = g.eps;
  } else if (layout == "points") {
    c.eps0 = p.real("eps", 0.05);
    const json pts = p.raw("points", json::array());
    if (!pts.is_array() || pts.empty()) fail(ErrorKind::config, "points: expected a nonempty array of [re, im]");
    for (size_t i = 0; i < pts.size(); ++i) c.points.push_back(parse_point(pts[i], fmt::format("points[{}]", i)));
    p.set_resolved("points", pts);
    c.eps.assign(c.points.size(), c.eps0);
  } else {
    fail(ErrorKind::config, "layout: expected lattice, graded or points");
  }
  c.n_snapshots = positive_count(p, "n_replicas", 1);
  if (c.points.size() > 8192) fail(ErrorKind::config, "more than 8192 field points");
  return c;
}

Findings check_field(Params& p) {
  const auto c = parse_field(p);
  p.finish();
  Findings f;
  bool separated = true, inside = true;
  for (size_t i = 0; i < c.points.size(); ++i) {
    if (1.0 - c.points[i].abs() <= c.eps[i]) inside = false;
    for (size_t j = 0; j < i; ++j)
      if (std::abs(c.points[i].z() - c.points[j].z()) < c.eps[i] + c.eps[j]) separated = false;
  }
  if (!separated) f.push_back("separation rule: grid spacing < 2 eps (circles overlap)");
  if (!inside) f.push_back("circle rule: some eps-circle leaves the disk");
  return f;
}

json run_field(Params& p, Run& run) {
  const auto c = parse_field(p);
  p.finish();
  const Eigen::MatrixXd cov = regularized_covariance(c.points, c.eps);
  const GaussianSampler sampler(cov);
  auto shared = std::make_shared<const Eigen::MatrixXd>(cov);
  std::vector<double> diag_dev;
  for (std::size_t r = 0; r < c.n_snapshots; ++r) {
    RngStream rng(run.seed(), stream_id(r, StreamPurpose::bulk));
    FieldRealization f{c.points, c.eps, sampler.sample(rng), shared, run.seed(), rng.stream_id()};
    const auto base = fmt::format("field_{}", r);
    write_field_csv(f, run.artifact(base + ".csv"), run.artifact(base + ".json"));
  }
  double worst = 0.0;
  for (size_t i = 0; i < c.points.size(); ++i)
    worst = std::max(worst, std::abs(cov(i, i) + std::log(c.eps[i]) - 0.5 * std::log(poincare_density(c.points[i]))));
  return {{"anchor", "regularized Neumann GFF: Var X_eps(x) + ln eps = 1/2 ln g_P(x)"},
          {"estimator", "max_diagonal_deviation"},
          {"estimate", worst},
          {"stderr", 0.0},
          {"replicas", c.n_snapshots},
          {"diagnostics", {{"n_points", c.points.size()}}}};
}

// ---------------------------------------------------------------- gmc-bulk / gmc-boundary

struct BulkCfg {
  double gamma;
  GradedGridSpec grid;
  std::size_t n;
  bool snapshot;
};

BulkCfg parse_bulk(Params& p) {
  BulkCfg c;
  c.gamma = p.real("gamma", 1.0);
  c.grid = parse_grid(p);
  c.n = positive_count(p, "n_replicas", 1000);
  c.snapshot = p.flag("write_measure", true);
  return c;
}

Findings check_bulk(Params& p) {
  const auto c = parse_bulk(p);
  p.finish();
  Findings f;
  if (!(c.gamma > 0.0 && c.gamma < 2.0)) f.push_back("gamma must lie in (0, 2); gamma = 2 is critical-ladder");
  return f;
}

json run_bulk(Params& p, Run& run) {
  const auto c = parse_bulk(p);
  p.finish();
  check_subcritical(c.gamma);
  const PointGrid grid = graded_polar_grid(c.grid);
  const GaussianSampler sampler(regularized_covariance(grid.points, grid.eps));
  const auto totals = bulk_total_masses(grid, sampler, c.gamma, run.seed(), c.n, run.workers());
  {
    io::CsvWriter csv(run.artifact("totals.csv"), {"replica", "total"});
    for (size_t r = 0; r < totals.size(); ++r) csv.values(static_cast<unsigned long>(r), totals[r]);
  }
  if (c.snapshot) {
    RngStream rng(run.seed(), stream_id(0, StreamPurpose::bulk));
    FieldRealization f{grid.points, grid.eps, sampler.sample(rng), nullptr, run.seed(), rng.stream_id()};
    auto m = bulk_measure(f, c.gamma, grid.areas);
    m.seed = run.seed();
    write_measure_csv(m, run.artifact("measure_0.csv"), run.artifact("measure_0.json"));
  }
  const auto m = stats::mean_se(totals);
  json s = mean_summary("bulk GMC mean mass: E[total] = pi / (1 - gamma^2/2)", "mean_total", m);
  json d = {{"grid_points", grid.size()},
            {"grid_expected_total", bulk_expected_total(grid, c.gamma)},
            {"median_total", stats::median(totals)},
            {"finite", std::all_of(totals.begin(), totals.end(), [](double v) { return std::isfinite(v); })}};
  if (c.gamma * c.gamma < 2.0) {
    const double target = kPi / (1.0 - c.gamma * c.gamma / 2.0);
    d["continuum_expected_total"] = target;
    d["z_score"] = (m.mean - target) / m.se;
  }
  s["diagnostics"] = d;
  return s;
}

struct BoundaryCfg {
  double gamma;
  int n_modes, n_arcs;
  std::size_t n;
  bool snapshot;
};

BoundaryCfg parse_boundary(Params& p) {
  BoundaryCfg c;
  c.gamma = p.real("gamma", 1.0);
  c.n_modes = static_cast<int>(p.integer("n_modes", 1024));
  c.n_arcs = static_cast<int>(p.integer("n_arcs", 2048));
  c.n = positive_count(p, "n_replicas", 1000);
  c.snapshot = p.flag("write_measure", true);
  if (c.n_modes < 1 || c.n_arcs < 64) fail(ErrorKind::config, "need n_modes >= 1 and n_arcs >= 64");
  return c;
}

Findings check_boundary(Params& p) {
  const auto c = parse_boundary(p);
  p.finish();
  Findings f;
  if (!(c.gamma > 0.0 && c.gamma < 2.0)) f.push_back("gamma must lie in (0, 2)");
  if (c.n_arcs < 2 * c.n_modes) f.push_back("n_arcs < 2 n_modes: arcs under-resolve the top Fourier modes");
  return f;
}

json run_boundary(Params& p, Run& run) {
  const auto c = parse_boundary(p);
  p.finish();
  check_subcritical(c.gamma);
  const auto totals = boundary_total_masses(c.n_modes, c.n_arcs, c.gamma, run.seed(), c.n, run.workers());
  {
    io::CsvWriter csv(run.artifact("totals.csv"), {"replica", "total"});
    for (size_t r = 0; r < totals.size(); ++r) csv.values(static_cast<unsigned long>(r), totals[r]);
  }
  if (c.snapshot) {
    RngStream rng(run.seed(), stream_id(0, StreamPurpose::boundary));
    auto m = boundary_measure(sample_boundary_trace(c.n_modes, rng), c.gamma, c.n_arcs);
    m.seed = run.seed();
    write_measure_csv(m, run.artifact("measure_0.csv"), run.artifact("measure_0.json"));
  }
  const auto m = stats::mean_se(totals);
  const double target = kTwoPi * std::exp(-c.gamma * c.gamma / 8.0);
  json s = mean_summary("boundary GMC mean mass: E[total] = 2 pi e^{-gamma^2/8}", "mean_total", m);
  s["diagnostics"] = {{"expected_total", target}, {"z_score", (m.mean - target) / m.se}, {"median_total", stats::median(totals)}};
  return s;
}

// ---------------------------------------------------------------- critical-ladder

struct LadderCfg {
  double rho, q;
  int k_min, k_max, n_arcs;
  std::vector<int> modes;
  std::size_t n;
};

LadderCfg parse_ladder(Params& p) {
  LadderCfg c;
  c.rho = p.real("rho", 0.25);
  c.k_min = static_cast<int>(p.integer("k_min", 4));
  c.k_max = static_cast<int>(p.integer("k_max", 8));
  for (long m : p.integers("boundary_modes", {64, 128, 256, 512, 1024, 2048})) c.modes.push_back(static_cast<int>(m));
  c.n_arcs = static_cast<int>(p.integer("n_arcs", 4096));
  c.n = positive_count(p, "n_replicas", 1000);
  c.q = p.real("q", 0.5);
  if (c.k_min < 1 || c.k_max <= c.k_min) fail(ErrorKind::config, "need 1 <= k_min < k_max");
  if (!(c.rho > 0.0 && c.rho < 1.0)) fail(ErrorKind::config, "rho must lie in (0, 1)");
  for (int m : c.modes)
    if (m < 64) fail(ErrorKind::config, "boundary_modes: every N must be >= 64");
  if (!(c.q > 0.0)) fail(ErrorKind::config, "q must be > 0");
  return c;
}

Findings check_ladder(Params& p) {
  const auto c = parse_ladder(p);
  p.finish();
  Findings f;
  if (c.q >= 1.0) f.push_back("q >= 1 lies outside the moment guarantee (only q < 1 moments exist)");
  const double eps = std::ldexp(1.0, -c.k_max);
  const double pts = kPi * c.rho * c.rho / (4.0 * eps * eps);
  if (pts > 8192) f.push_back(fmt::format("finest lattice has about {:.0f} points (> 8192)", pts));
  if (c.rho + std::ldexp(1.0, -c.k_min) >= 1.0) f.push_back("rho + eps_max must stay below 1");
  return f;
}

json run_ladder(Params& p, Run& run) {
  const auto c = parse_ladder(p);
  p.finish();
  const auto bulk = bulk_critical_ladder(c.rho, c.k_min, c.k_max, c.n, run.seed(), run.workers());
  const auto bd = c.modes.empty() ? LadderResult{} : boundary_critical_ladder(c.modes, c.n_arcs, c.n, run.seed(), run.workers());
  {
    io::CsvWriter csv(run.artifact("ladder.csv"), {"kind", "level", "scale", "replica", "normalized", "plain"});
    for (const auto* L : {&bulk, &bd})
      for (size_t k = 0; k < L->scale.size(); ++k)
        for (size_t r = 0; r < L->normalized[k].size(); ++r)
          csv.values(std::string(L == &bulk ? "bulk" : "boundary"), static_cast<unsigned long>(k), L->scale[k],
                     static_cast<unsigned long>(r), L->normalized[k][r], L->plain[k][r]);
  }
  json d = json::object();
  io::CsvWriter csv(run.artifact("ladder_summary.csv"),
                    {"kind", "level", "scale", "median_normalized", "median_plain", "moment_q", "moment_se"});
  MomentDiagnostic finest;
  for (const auto* L : {&bulk, &bd}) {
    const std::string kind = L == &bulk ? "bulk" : "boundary";
    std::vector<double> med, plain, mom;
    for (size_t k = 0; k < L->scale.size(); ++k) {
      const auto md = moment_diagnostic(L->normalized[k], c.q);
      med.push_back(stats::median(L->normalized[k]));
      plain.push_back(stats::median(L->plain[k]));
      mom.push_back(md.moment);
      csv.values(kind, static_cast<unsigned long>(k), L->scale[k], med.back(), plain.back(), md.moment, md.se);
      if (L == &bulk && k + 1 == L->scale.size()) finest = md;
    }
    if (med.empty()) continue;
    bool dec = true;
    for (size_t k = 1; k < plain.size(); ++k) dec = dec && plain[k] < plain[k - 1];
    std::vector<double> ratios;
    for (size_t k = med.size() >= 4 ? med.size() - 3 : 1; k < med.size(); ++k) ratios.push_back(med[k] / med[k - 1]);
    const bool stable = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r >= 0.75 && r <= 1.33; });
    d[kind] = {{"plain_medians_decreasing", dec}, {"last_median_ratios", ratios}, {"normalized_stable", stable},
               {"moments", mom}};
  }
  return {{"anchor", "critical chaos with Seneta-Heyde norming sqrt(ln 1/eps) eps^2 e^{2 X_eps}"},
          {"estimator", fmt::format("q-moment of the finest bulk level (q = {})", c.q)},
          {"estimate", finest.moment},
          {"stderr", finest.se},
          {"replicas", c.n},
          {"diagnostics", d}};
}

// ---------------------------------------------------------------- seiberg-validate

const InsertionDefaults kThreeBoundary = [] {
  const double g = std::sqrt(8.0 / 3.0);
  json ins = json::array();
  for (int k = 0; k < 3; ++k)
    ins.push_back({{"kind", "boundary"}, {"angle", kTwoPi * k / 3.0}, {"weight", g}});
  return InsertionDefaults{{g, 1.0, 0.0}, ins};
}();

const InsertionDefaults kVolumeSet = [] {
  const double g = std::sqrt(8.0 / 3.0);
  json ins = json::array({{{"kind", "bulk"}, {"position", {0.0, 0.0}}, {"weight", g}},
                          {{"kind", "boundary"}, {"position", {1.0, 0.0}}, {"weight", g}}});
  return InsertionDefaults{{g, 1.0, 0.0}, ins};
}();

const InsertionDefaults kKpzSet = [] {
  json ins = json::array({{{"kind", "bulk"}, {"position", {0.2, 0.1}}, {"weight", 1.8}},
                          {{"kind", "bulk"}, {"position", {-0.3, 0.0}}, {"weight", 1.8}},
                          {{"kind", "bulk"}, {"position", {0.0, -0.3}}, {"weight", 1.0}}});
  return InsertionDefaults{{0.5, 1.0, 0.0}, ins};
}();

Findings check_insertions(Params& p, const InsertionDefaults& d) {
  const auto ins = parse_insertions(p, d);
  p.finish();
  return seiberg_findings(ins);
}

json run_seiberg(Params& p, Run& run) {
  const auto ins = parse_insertions(p, kThreeBoundary);
  p.finish();
  const auto v = seiberg_check(ins);
  const json vj = verdict_json(v);
  run.write_json("verdict.json", vj);
  if (!v.admissible) throw Rejection(fmt::format("{}", fmt::join(v.findings(), "; ")), vj);
  return {{"anchor", "Seiberg bounds: sum alpha + sum beta/2 > Q, alpha_i < Q, beta_j < Q"},
          {"estimator", "s_total"},
          {"estimate", v.s_total},
          {"stderr", 0.0},
          {"replicas", 0},
          {"diagnostics", vj}};
}

// ---------------------------------------------------------------- volume-law

struct VolumeCfg {
  InsertionSet ins;
  ChaosSpec chaos;
  std::size_t n_replicas, n_draws;
};

VolumeCfg parse_volume(Params& p) {
  VolumeCfg c;
  c.ins = parse_insertions(p, kVolumeSet);
  c.chaos = parse_chaos(p);
  c.n_replicas = positive_count(p, "n_replicas", 4096, 16);
  c.n_draws = positive_count(p, "n_draws", 10000);
  return c;
}

json run_volume(Params& p, Run& run) {
  const auto c = parse_volume(p);
  p.finish();
  require(c.ins);
  const ChaosBackground bg(c.chaos);
  const auto s = sample_liouville_triples(c.ins, bg, c.n_replicas, c.n_draws, run.seed(), run.workers());
  const double lse = stats::log_sum_exp(s.replica_log_weights);
  std::vector<double> V, L, half;
  {
    io::CsvWriter csv(run.artifact("draws.csv"), {"replica", "V", "L", "weight"});
    for (const auto& t : s.draws) {
      csv.values(static_cast<unsigned long>(t.replica), t.V, t.L, std::exp(s.replica_log_weights[t.replica] - lse));
      V.push_back(t.V);
      L.push_back(t.L);
      half.push_back(t.bulk_half_fraction);
    }
  }
  const double se_corr = 1.0 / std::sqrt(static_cast<double>(V.size()));
  json d = {{"effective_sample_size", s.effective_sample_size},
            {"corr_V_half_disk_mass", stats::correlation(V, half)},
            {"corr_se", se_corr},
            {"mean_L", stats::mean_se(L).mean}};
  if (c.ins.params.mu_boundary == 0.0) {
    const auto law = volume_law_params(c.ins);
    const boost::math::gamma_distribution<double> G(law.shape, 1.0 / law.rate);
    const double D = stats::ks_statistic(V, [&](double v) { return boost::math::cdf(G, v); });
    d["gamma_shape"] = law.shape;
    d["gamma_rate"] = law.rate;
    d["ks_statistic"] = D;
    d["ks_pvalue"] = stats::ks_pvalue(D, V.size());
    d["independence_ok"] = std::abs(d["corr_V_half_disk_mass"].get<double>()) < 3.0 * se_corr;
  }
  json out = mean_summary("joint volume law; with mu_boundary = 0, V ~ Gamma(s_total/gamma, mu) independent of the "
                          "normalized measures",
                          "mean_V", stats::mean_se(V));
  out["replicas"] = c.n_replicas;
  out["diagnostics"] = d;
  return out;
}

Findings check_volume(Params& p) {
  const auto c = parse_volume(p);
  p.finish();
  return seiberg_findings(c.ins);
}

// ---------------------------------------------------------------- partition / kpz-covariance

struct PartitionCfg {
  InsertionSet ins;
  ChaosSpec chaos;
  std::size_t n;
};

PartitionCfg parse_partition(Params& p, const InsertionDefaults& d) {
  PartitionCfg c;
  c.ins = parse_insertions(p, d);
  c.chaos = parse_chaos(p);
  c.n = positive_count(p, "n_replicas", 1000, 100);
  return c;
}

json run_partition(Params& p, Run& run) {
  const auto c = parse_partition(p, kKpzSet);
  p.finish();
  require(c.ins);
  const ChaosBackground bg(c.chaos);
  const auto reps = shifted_chaos_replicas(c.ins, bg, {}, {}, run.seed(), c.n, run.workers());
  {
    io::CsvWriter csv(run.artifact("replicas.csv"), {"replica", "bulk_total", "boundary_total"});
    for (size_t r = 0; r < reps.size(); ++r)
      csv.values(static_cast<unsigned long>(r), reps[r].bulk_total, reps[r].boundary_total);
  }
  const auto e = partition_from_replicas(c.ins, reps);
  json d = {{"log_value", e.log_value}, {"quadrature_value", e.quadrature_value}, {"log_prefactor", log_partition_prefactor(c.ins)}};
  if (std::isfinite(e.closed_form_value)) {
    d["closed_form_value"] = e.closed_form_value;
    d["two_path_relative_difference"] = std::abs(e.quadrature_value / e.closed_form_value - 1.0);
  }
  return {{"anchor", "reduced partition function: prefactor e^{C(z,s)} times the c-integral of E[exp(-mu e^{gamma c} I "
                     "- mu_b e^{gamma c/2} J)]"},
          {"estimator", "partition_function"},
          {"estimate", e.value},
          {"stderr", e.std_error},
          {"replicas", e.replicas},
          {"diagnostics", d}};
}

Findings check_partition(Params& p) {
  const auto c = parse_partition(p, kKpzSet);
  p.finish();
  return seiberg_findings(c.ins);
}

struct KpzCfg {
  PartitionCfg base;
  std::vector<MobiusMap> maps;
};

KpzCfg parse_kpz(Params& p) {
  KpzCfg c;
  c.base = parse_partition(p, kKpzSet);
  const json maps = p.raw("maps", json::array({{{"a", {0.3, 0.0}}, {"alpha", 0.0}}}));
  if (!maps.is_array() || maps.empty()) fail(ErrorKind::config, "maps: expected a nonempty array");
  json resolved = json::array();
  for (size_t i = 0; i < maps.size(); ++i) {
    Params m(maps[i], fmt::format("maps[{}]", i));
    const DiskPoint a = parse_point(m.raw("a", json::array({0.3, 0.0})), fmt::format("maps[{}].a", i));
    m.set_resolved("a", json::array({a.re(), a.im()}));
    const double alpha = m.real("alpha", 0.0);
    m.finish();
    if (a.abs() >= 1.0) fail(ErrorKind::config, fmt::format("maps[{}].a: need |a| < 1", i));
    c.maps.emplace_back(a.z(), alpha);
    resolved.push_back(m.resolved());
  }
  p.set_resolved("maps", resolved);
  return c;
}

json run_kpz(Params& p, Run& run) {
  const auto c = parse_kpz(p);
  p.finish();
  require(c.base.ins);
  for (const auto& psi : c.maps) require(c.base.ins.moved(psi));
  const ChaosBackground bg(c.base.chaos);
  const std::size_t n = c.base.n;
  const auto e0 = partition_estimate(c.base.ins, bg, n, run.seed(), run.workers(), 0);
  io::CsvWriter csv(run.artifact("kpz.csv"),
                    {"map", "a_re", "a_im", "alpha", "log_ratio", "kpz_log_weight", "combined_se", "z"});
  double worst = 0.0, last_lr = 0.0, last_se = 0.0;
  json rows = json::array();
  for (size_t m = 0; m < c.maps.size(); ++m) {
    const auto& psi = c.maps[m];
    const auto e1 = partition_estimate(c.base.ins.moved(psi), bg, n, run.seed(), run.workers(), n * (m + 1));
    const double lr = e1.log_value - e0.log_value;
    const double se = std::hypot(e1.std_error / e1.value, e0.std_error / e0.value);
    const double w = kpz_log_weight(c.base.ins, psi), z = (lr - w) / se;
    csv.values(static_cast<unsigned long>(m), psi.a().real(), psi.a().imag(), psi.alpha(), lr, w, se, z);
    worst = std::max(worst, std::abs(z));
    last_lr = lr;
    last_se = se;
  }
  return {{"anchor", "KPZ covariance: Pi(psi z, psi s) = prod |psi'(z_i)|^{-2 Delta_alpha_i} prod |psi'(s_j)|^{-Delta_beta_j} "
                     "Pi(z, s)"},
          {"estimator", "log_partition_ratio (last map)"},
          {"estimate", last_lr},
          {"stderr", last_se},
          {"replicas", n},
          {"diagnostics", {{"max_abs_z", worst}, {"within_3_se", worst < 3.0}, {"n_maps", c.maps.size()}}}};
}

Findings check_kpz(Params& p) {
  const auto c = parse_kpz(p);
  p.finish();
  auto f = seiberg_findings(c.base.ins);
  return f;
}

// ---------------------------------------------------------------- weyl-anomaly

// phi(r, theta) = sum coef r^power {cos, sin}(mode theta)
struct Series {
  struct Term {
    double coef;
    int power, mode;
    bool sine;
  };
  std::vector<Term> terms;
  double operator()(double r, double t) const {
    double v = 0.0;
    for (const auto& x : terms) v += x.coef * std::pow(r, x.power) * (x.sine ? std::sin(x.mode * t) : std::cos(x.mode * t));
    return v;
  }
};

Series parse_series(Params& p, const std::string& key, const json& def) {
  const json list = p.raw(key, def);
  if (!list.is_array()) fail(ErrorKind::config, key + ": expected an array of terms");
  Series s;
  json resolved = json::array();
  for (size_t i = 0; i < list.size(); ++i) {
    Params t(list[i], fmt::format("{}[{}]", key, i));
    Series::Term x;
    x.coef = t.real("coef", 0.0);
    x.power = static_cast<int>(t.integer("power", 0));
    x.mode = static_cast<int>(t.integer("mode", 0));
    const std::string kind = t.text("kind", "cos");
    if (kind != "cos" && kind != "sin") fail(ErrorKind::config, fmt::format("{}[{}].kind: expected cos or sin", key, i));
    if (x.power < 0 || x.mode < 0) fail(ErrorKind::config, fmt::format("{}[{}]: power and mode must be >= 0", key, i));
    // r^power cos(mode theta) is smooth at the origin only when power >= mode with equal parity.
    if (x.power < x.mode || (x.power - x.mode) % 2)
      fail(ErrorKind::config, fmt::format("{}[{}]: need power >= mode with power - mode even (smooth at 0)", key, i));
    x.sine = kind == "sin";
    t.finish();
    s.terms.push_back(x);
    resolved.push_back(t.resolved());
  }
  p.set_resolved(key, resolved);
  return s;
}

struct WeylCfg {
  LiouvilleParams params;
  Series phi, phi2, base;
  std::vector<long> n_quad;
  double shift;
};

WeylCfg parse_weyl(Params& p) {
  WeylCfg c;
  c.params.gamma = p.real("gamma", std::sqrt(8.0 / 3.0));
  c.params.mu = 1.0;
  c.phi = parse_series(p, "phi", json::parse(R"([{"coef": 0.3, "power": 3, "mode": 1}, {"coef": 0.1, "power": 2}])"));
  c.phi2 = parse_series(p, "phi2", json::parse(R"([{"coef": 0.2, "power": 2, "mode": 2, "kind": "sin"}, {"coef": -0.15, "power": 2}])"));
  c.base = parse_series(p, "base", json::array());
  c.n_quad = p.integers("n_quad", {32, 64, 128});
  c.shift = p.real("constant", 0.7);
  if (c.n_quad.empty()) fail(ErrorKind::config, "n_quad: need at least one level");
  for (long n : c.n_quad)
    if (n < 16) fail(ErrorKind::config, "n_quad: every level must be >= 16");
  c.params.validate();
  return c;
}

json run_weyl(Params& p, Run& run) {
  const auto c = parse_weyl(p);
  p.finish();
  auto f1 = [&](double r, double t) { return c.phi(r, t); };
  auto f2 = [&](double r, double t) { return c.phi2(r, t); };
  auto b = [&](double r, double t) { return c.base(r, t); };
  auto b1 = [&](double r, double t) { return c.base(r, t) + c.phi(r, t); };
  auto f12 = [&](double r, double t) { return c.phi(r, t) + c.phi2(r, t); };
  auto zero = [](double, double) { return 0.0; };
  const double k = c.shift;
  io::CsvWriter csv(run.artifact("weyl.csv"),
                    {"n_quad", "anomaly", "cocycle_residual", "constant_shift_residual", "flat_direct_residual"});
  std::vector<double> anomaly;
  double worst = 0.0;
  for (long n : c.n_quad) {
    const int nq = static_cast<int>(n);
    const double a = weyl_anomaly(f1, b, c.params, nq);
    const double cocycle =
        std::abs(weyl_anomaly(f12, b, c.params, nq) - (a + weyl_anomaly(f2, b1, c.params, nq)));
    const double shift =
        std::abs(weyl_anomaly([k](double, double) { return k; }, zero, c.params, nq) - c.params.central_charge() * k / 12.0);
    const PolarGrid grid{nq, 4 * nq};
    const auto phi = ConformalFactor::from_function(grid, f1);
    const double direct =
        std::abs(weyl_anomaly(phi, ConformalFactor::constant(grid, 0.0), c.params) - weyl_anomaly_flat_direct(phi, c.params));
    csv.values(n, a, cocycle, shift, direct);
    anomaly.push_back(a);
    worst = std::max({worst, cocycle, shift, direct});
  }
  const double err = anomaly.size() > 1 ? std::abs(anomaly.back() - anomaly[anomaly.size() - 2]) : 0.0;
  return {{"anchor", "Weyl anomaly: (1 + 6 Q^2)/(96 pi) (int |d phi|^2 + 2 int R phi + 4 int K phi)"},
          {"estimator", "anomaly at the finest quadrature"},
          {"estimate", anomaly.back()},
          {"stderr", err},
          {"replicas", 0},
          {"diagnostics", {{"max_identity_residual", worst}, {"below_1e-8", worst < 1e-8}}}};
}

// ---------------------------------------------------------------- maps

json run_maps_count(Params& p, Run& run) {
  const json def = json::parse("[[0, 1], [1, 1], [2, 1], [10000, 100], [100000, 316], [1000000, 1000]]");
  const json pairs = p.raw("pairs", def);
  const long max_digits = p.integer("max_digits", 200);
  if (!pairs.is_array()) fail(ErrorKind::config, "pairs: expected [[n, p], ...]");
  std::vector<std::pair<long, long>> np;
  for (const auto& e : pairs) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      fail(ErrorKind::config, "pairs: expected [[n, p], ...] with integers");
    const long n = e[0].get<long>(), q = e[1].get<long>();
    if (n < 0 || q < 1) fail(ErrorKind::config, "pairs: need n >= 0 and p >= 1");
    np.emplace_back(n, q);
  }
  p.set_resolved("pairs", pairs);
  p.finish();
  io::CsvWriter csv(run.artifact("counts.csv"),
                    {"n", "p", "count", "digits", "log_count", "log_asymptotic", "log_asymptotic_alt", "ratio"});
  double last_ratio = 0.0;
  bool integral = true;
  for (auto [n, q] : np) {
    const auto c = count_exact(n, q);
    integral = integral && c.integral;
    const bool asym = n >= 1 && c.log_count > -1e300;
    const double la = asym ? count_asymptotic(n, q) : std::nan("");
    const double lb = asym ? count_asymptotic_alt(n, q) : std::nan("");
    const double ratio = asym ? std::exp(la - c.log_count) : std::nan("");
    if (asym) last_ratio = ratio;
    const long digits = static_cast<long>(c.decimal.size());
    csv.values(n, q, digits <= max_digits ? c.decimal : std::string(), digits, c.log_count, la, lb, ratio);
  }
  return {{"anchor", "quadrangulations with a simple boundary: exact count and its asymptotic 12^n (9/2)^p n^{-5/2} "
                     "sqrt(3p)/(2 pi) e^{-9p^2/4n}"},
          {"estimator", "asymptotic/exact ratio at the last pair"},
          {"estimate", last_ratio},
          {"stderr", 0.0},
          {"replicas", np.size()},
          {"diagnostics", {{"all_integral", integral}}}};
}

BoltzmannConfig parse_boltzmann(Params& p) {
  BoltzmannConfig c;
  c.a = p.real("a", c.a);
  c.mu = p.real("mu", c.mu);
  c.mu_boundary = p.real("mu_boundary", c.mu_boundary);
  c.mu_c = p.real("mu_c", c.mu_c);
  c.mu_c_boundary = p.real("mu_c_boundary", c.mu_c_boundary);
  c.mark_interior_vertex = p.flag("mark_interior_vertex", c.mark_interior_vertex);
  c.n_max = p.integer("n_max", 0);
  c.p_max = p.integer("p_max", 0);
  c.validate();
  p.set_resolved("n_max", c.resolved_n_max());
  p.set_resolved("p_max", c.resolved_p_max());
  return c;
}

Findings check_maps(Params& p, bool density) {
  const auto cfg = parse_boltzmann(p);
  p.integer("n_draws", 100000);
  if (density) p.raw("bins", json::object());
  else p.integer("table_max_cells", 1000000);
  p.finish();
  Findings f;
  try {
    const BoltzmannLaw law(cfg);
    if (law.tail_bound() >= 1e-9) f.push_back(fmt::format("truncation tail bound {:.3g} >= 1e-9", law.tail_bound()));
  } catch (const Error& e) {
    f.push_back(e.what());
  }
  return f;
}

json law_summary(const BoltzmannLaw& law) {
  return {{"n_max", law.n_max()}, {"p_max", law.p_max()}, {"tail_bound", law.tail_bound()}, {"log_normalizer", law.log_normalizer()}};
}

json run_maps_sample(Params& p, Run& run) {
  const auto cfg = parse_boltzmann(p);
  const std::size_t n = positive_count(p, "n_draws", 100000);
  const long table_max = p.integer("table_max_cells", 1000000);
  p.finish();
  const BoltzmannLaw law(cfg);
  const auto draws = boltzmann_sample_batch(law, run.seed(), n);
  std::vector<double> ns, ps;
  {
    io::CsvWriter csv(run.artifact("draws.csv"), {"draw_index", "n", "p"});
    for (size_t d = 0; d < draws.size(); ++d) {
      csv.values(static_cast<unsigned long>(d), draws[d].first, draws[d].second);
      ns.push_back(static_cast<double>(draws[d].first));
      ps.push_back(static_cast<double>(draws[d].second));
    }
  }
  long cells = 0;
  for (long q = 1; q <= law.p_max(); ++q) cells += law.n_max() - law.row_begin(q) + 1;
  json d = law_summary(law);
  d["mean_p"] = stats::mean_se(ps).mean;
  d["weight_table_written"] = cells <= table_max;
  d["weight_table_cells"] = cells;
  if (cells <= table_max) {
    io::CsvWriter csv(run.artifact("weights.csv"), {"n", "p", "log_weight"});
    for (long q = 1; q <= law.p_max(); ++q)
      for (long m = law.row_begin(q); m <= law.n_max(); ++m) csv.values(m, q, boltzmann_log_weight(cfg, m, q));
  }
  json s = mean_summary("Boltzmann quadrangulation law: P(n, p) proportional to e^{-mu_bar n - 2 mu_bar_b p} |T(n, p)|",
                        "mean_n", stats::mean_se(ns));
  s["diagnostics"] = d;
  return s;
}

DensityBinning parse_bins(Params& p) {
  Params b = p.child("bins");
  DensityBinning d;
  d.v_bins = static_cast<int>(b.integer("v_bins", d.v_bins));
  d.l_bins = static_cast<int>(b.integer("l_bins", d.l_bins));
  d.v_min = b.real("v_min", d.v_min);
  d.v_max = b.real("v_max", d.v_max);
  d.l_min = b.real("l_min", d.l_min);
  d.l_max = b.real("l_max", d.l_max);
  p.adopt("bins", b);
  if (d.v_bins < 1 || d.l_bins < 1 || !(d.v_max > d.v_min) || !(d.l_max > d.l_min) || d.v_min < 0 || d.l_min < 0)
    fail(ErrorKind::config, "bins: need positive counts and increasing nonnegative ranges");
  return d;
}

json run_maps_density(Params& p, Run& run) {
  const auto cfg = parse_boltzmann(p);
  const std::size_t n = positive_count(p, "n_draws", 100000);
  const auto bins = parse_bins(p);
  p.finish();
  const BoltzmannLaw law(cfg);
  const auto draws = boltzmann_sample_batch(law, run.seed(), n);
  const auto r = joint_density_check(law, draws, bins);
  {
    io::CsvWriter csv(run.artifact("density.csv"),
                      {"v_bin", "l_bin", "observed", "expected_conjecture", "expected_exact"});
    for (size_t i = 0; i < r.observed.size(); ++i)
      for (size_t j = 0; j < r.observed[i].size(); ++j)
        csv.values(static_cast<unsigned long>(i), static_cast<unsigned long>(j), r.observed[i][j],
                   r.expected_conjecture[i][j], r.expected_exact[i][j]);
  }
  json rep = law_summary(law);
  rep.update({{"n_draws", r.n_draws},
              {"in_range", r.in_range},
              {"chi2", r.chi2},
              {"dof", r.dof},
              {"p_value", r.p_value},
              {"underpowered_bins", r.underpowered_bins},
              {"powered_cells", r.powered_cells},
              {"cells_beyond_3se", r.cells_beyond_3se},
              {"max_abs_z", r.max_abs_z},
              {"slice_chi2", r.slice_chi2},
              {"slice_dof", r.slice_dof},
              {"slice_p_value", r.slice_p_value}});
  run.write_json("density_report.json", rep);
  return {{"anchor", "conjectured joint density V^{-3/2} l^{1/2} e^{-mu V - mu_b l - 9 l^2/16V} of rescaled (V, l) = (a^2 n, 2 a p)"},
          {"estimator", "chi-square p-value against the conjectured density"},
          {"estimate", r.p_value},
          {"stderr", 0.0},
          {"replicas", r.n_draws},
          {"diagnostics", rep}};
}

template <typename F>
std::function<Findings(Params&)> parse_only(F parse) {
  return [parse](Params& p) {
    parse(p);
    p.finish();
    return Findings{};
  };
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"green-selftest", "Green function and Mobius identity residuals on random inputs", run_selftest,
       parse_only(parse_selftest)},
      {"field-sample", "Exact-covariance samples of the regularized Neumann GFF", run_field, check_field},
      {"gmc-bulk", "Bulk chaos total masses on the graded polar grid", run_bulk, check_bulk},
      {"gmc-boundary", "Boundary chaos total masses from Fourier traces", run_boundary, check_boundary},
      {"critical-ladder", "Critical chaos ladders with and without Seneta-Heyde norming", run_ladder, check_ladder},
      {"seiberg-validate", "Admissibility verdict for an insertion set", run_seiberg,
       [](Params& p) { return check_insertions(p, kThreeBoundary); }},
      {"volume-law", "Joint (V, L) draws and the Gamma volume-law test", run_volume, check_volume},
      {"partition", "Reduced partition function estimate", run_partition, check_partition},
      {"kpz-covariance", "Partition ratios under Mobius maps against the KPZ weights", run_kpz, check_kpz},
      {"weyl-anomaly", "Weyl anomaly functional with cocycle and constant-shift checks", run_weyl, parse_only(parse_weyl)},
      {"maps-count", "Exact and asymptotic quadrangulation counts", run_maps_count,
       [](Params& p) {
         p.raw("pairs", json::array());
         p.integer("max_digits", 200);
         p.finish();
         return Findings{};
       }},
      {"maps-sample", "Boltzmann (n, p) draws", run_maps_sample, [](Params& p) { return check_maps(p, false); }},
      {"maps-density", "Rescaled (V, l) histogram against the conjectured density", run_maps_density,
       [](Params& p) { return check_maps(p, true); }},
  };
  return list;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace lqft::cli
