#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lqft/disk_geometry.hpp"
#include "lqft/gff.hpp"
#include "lqft/gmc.hpp"
#include "lqft/grid.hpp"

namespace lqft {

struct BulkInsertion {
  DiskPoint z;
  double alpha;
};

struct BoundaryInsertion {
  DiskPoint s;
  double beta;
};

struct InsertionSet {
  std::vector<BulkInsertion> bulk;
  std::vector<BoundaryInsertion> boundary;
  LiouvilleParams params;

  // Positions distinct, bulk points interior, boundary points on the circle.
  void validate() const;
  double s_total() const;  // sum alpha + sum beta / 2 - Q
  std::vector<DiskPoint> marks() const;
  InsertionSet moved(const MobiusMap& psi) const;
};

enum class SeibergCase { mu_positive, mu_zero_boundary_positive, degenerate };

struct AdmissibilityVerdict {
  SeibergCase seiberg_case = SeibergCase::degenerate;
  bool bound1_ok = false;
  bool bound2_ok = false;
  bool bound3_ok = false;
  bool admissible = false;
  double s_total = 0.0;

  std::vector<std::string> findings() const;  // human-readable violated bounds
};

AdmissibilityVerdict seiberg_check(const InsertionSet& ins);
// Throws an admissibility error carrying the findings unless admissible.
void require_admissible(const InsertionSet& ins);

// H(x) = sum alpha_i G(x, z_i) + sum (beta_j / 2) G(x, s_j)
double insertion_drift(const InsertionSet& ins, const DiskPoint& x);

// C(z, s) of the reduced partition function.
double log_constant(const InsertionSet& ins);

// log of prod_i g_P(z_i)^{alpha_i^2/4} e^{C(z,s)}: the Girsanov normalization
// E[eps^{alpha^2/2} e^{alpha X_eps(z)}] is g_P(z)^{+alpha^2/4}.
double log_partition_prefactor(const InsertionSet& ins);

// log of the average of e^{gamma H} over each grid cell. Cells within three diameters
// of a mark are integrated adaptively (the singular point itself in closed form);
// a mark whose singularity is not Lebesgue integrable (gamma alpha >= 2 in the bulk,
// gamma beta >= 2 on the boundary) instead excludes the cells within one diameter,
// which get -inf. Grids without cell geometry fall back to center values and exclusion.
std::vector<double> drift_log_weights(const InsertionSet& ins, const PointGrid& grid);

struct ShiftedChaosPair {
  AtomicMeasure Z0;           // e^{gamma H} times the bulk chaos
  AtomicMeasure Z0_boundary;  // e^{(gamma/2) H} times the boundary chaos
  double R = 0.0;             // Z0(D) / Z0_boundary(dD)^2
};

// Field points must avoid the marked points; boundary arcs within one arc length
// of a boundary mark are dropped. With enforce_admissibility = false the Seiberg
// check is skipped (divergence experiments).
ShiftedChaosPair shifted_chaos(const InsertionSet& ins, const FieldRealization& bulk_field,
                               const std::vector<double>& cell_areas, const BoundaryTrace& trace, int n_arcs,
                               bool enforce_admissibility = true);

// Shared discretization for replica ensembles: one graded grid, one factorization.
struct ChaosSpec {
  GradedGridSpec grid;
  int n_modes = 1024;
  int n_arcs = 2048;
};

class ChaosBackground {
 public:
  explicit ChaosBackground(const ChaosSpec& spec);
  const ChaosSpec& spec() const { return spec_; }
  const PointGrid& grid() const { return grid_; }
  const GaussianSampler& sampler() const { return sampler_; }

 private:
  ChaosSpec spec_;
  PointGrid grid_;
  GaussianSampler sampler_;
};

using PointFunction = std::function<double(const DiskPoint&)>;

struct ReplicaChaos {
  double bulk_total = 0.0;      // Z0(D)
  double boundary_total = 0.0;  // Z0_boundary(dD)
  std::vector<double> bulk_observables;      // integral of each observable against Z0
  std::vector<double> boundary_observables;  // same against Z0_boundary
};

// Replicas [offset, offset + n) of the shifted chaos pair, reduced to totals.
std::vector<ReplicaChaos> shifted_chaos_replicas(const InsertionSet& ins, const ChaosBackground& bg,
                                                 const std::vector<PointFunction>& bulk_observables,
                                                 const std::vector<PointFunction>& boundary_observables,
                                                 std::uint64_t seed, std::size_t n, int workers,
                                                 std::size_t offset = 0, bool enforce_admissibility = true);

// Gamma-law parameters of the volume when mu_boundary = 0.
struct VolumeLawParams {
  double shape;
  double rate;
};
VolumeLawParams volume_law_params(const InsertionSet& ins);

// ln of int_R exp(a t - b1 e^{k1 t} - b2 e^{k2 t}) dt for a, k1, k2 > 0, b1, b2 >= 0,
// b1 + b2 > 0. Adaptive Gauss-Kronrod on a bracket whose tails are below 1e-12 of the peak.
double log_laplace_integral(double a, double b1, double k1, double b2, double k2);

struct TripleDraw {
  std::size_t replica = 0;
  double V = 0.0;
  double L = 0.0;
  double bulk_half_fraction = 0.0;      // Z0({Re > 0}) / Z0(D)
  double boundary_half_fraction = 0.0;  // Z0_boundary({Re > 0}) / Z0_boundary(dD)
};

struct VolumeLawSample {
  std::vector<TripleDraw> draws;
  std::vector<double> replica_log_weights;
  double effective_sample_size = 0.0;
};

// Draws of (V, L, normalized measures) by importance resampling over chaos replicas.
// Replica weight Z0_b^{-2 s/gamma} int y^{2 s/gamma - 1} e^{-mu y^2 R - mu_b y} dy, then
// y from that one-dimensional density by inverse CDF on a log grid.
VolumeLawSample sample_liouville_triples(const InsertionSet& ins, const ChaosBackground& bg, std::size_t n_replicas,
                                         std::size_t n_draws, std::uint64_t seed, int workers);
TripleDraw sample_liouville_triple(const InsertionSet& ins, RngStream& rng, std::size_t n_replicas = 256);

struct PartitionEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double log_value = 0.0;
  double quadrature_value = 0.0;  // numeric c-integral path
  double closed_form_value = 0.0;  // Gamma reduction (mu_boundary = 0 only, else NaN)
  std::size_t replicas = 0;
};

PartitionEstimate partition_from_replicas(const InsertionSet& ins, const std::vector<ReplicaChaos>& reps);
PartitionEstimate partition_estimate(const InsertionSet& ins, const ChaosBackground& bg, std::size_t n_replicas,
                                     std::uint64_t seed, int workers, std::size_t offset = 0);
PartitionEstimate partition_estimate(const InsertionSet& ins, std::size_t n_replicas, RngStream& rng);

// prod_i |psi'(z_i)|^{-2 Delta_alpha_i} prod_j |psi'(s_j)|^{-Delta_beta_j}, in log form.
double kpz_log_weight(const InsertionSet& ins, const MobiusMap& psi);

struct UnitVolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double effective_sample_size = 0.0;
  bool degenerate_weights = false;  // ESS < 10
};

// E[f(Z0/Z0(D)) Z0(D)^{-p}] / E[Z0(D)^{-p}], p = 3/2 - Q/gamma, f(Z) = int g dZ / Z(D).
UnitVolumeEstimate unit_volume_expectation(const InsertionSet& ins, const PointFunction& g, const ChaosBackground& bg,
                                           std::size_t n_replicas, std::uint64_t seed, int workers);

}  // namespace lqft
