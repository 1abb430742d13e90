#pragma once

#include <cstdint>
#include <vector>

#include "lqft/gmc.hpp"

namespace lqft {

struct EpsLadder {
  std::vector<double> eps;
  void validate() const;  // strictly decreasing, all in (0, 1)
  static EpsLadder dyadic(int k_min, int k_max);  // eps_k = 2^-k
};

// sqrt(ln 1/eps) eps^2
double seneta_heyde_factor(double eps);
// sqrt(ln N) / N, the nominal boundary factor at cutoff eps = 1/N.
double seneta_heyde_boundary_factor(int n_modes);

// mass_i = sqrt(ln 1/eps) eps^2 e^{2 X_i} area_i
AtomicMeasure seneta_heyde_bulk(const FieldRealization& field, double eps, const std::vector<double>& cell_areas);

// Fourier cutoff N = trace.n_modes():
// mass_m = sqrt(Var_N / 2) e^{X_b(theta_m) - Var_N / 2} 2 pi / n_arcs.
AtomicMeasure seneta_heyde_boundary(const BoundaryTrace& trace, int n_arcs);

struct MomentDiagnostic {
  double moment = 0.0;
  double se = 0.0;  // jackknife
  bool outside_guarantee = false;  // q >= 1
};

MomentDiagnostic moment_diagnostic(const std::vector<double>& totals, double q);
MomentDiagnostic moment_diagnostic(const std::vector<AtomicMeasure>& measures, double q);

// Totals per ladder level and replica, with and without the sqrt(ln) factor.
struct LadderResult {
  std::vector<double> scale;                    // eps (bulk) or N (boundary) per level
  std::vector<std::vector<double>> normalized;  // [level][replica]
  std::vector<std::vector<double>> plain;       // same without the Seneta-Heyde factor
};

// Bulk ladder on nested square lattices inside |x| <= rho, eps_k = 2^-k. All levels
// are sampled jointly (one Gaussian vector per replica), so they share randomness.
LadderResult bulk_critical_ladder(double rho, int k_min, int k_max, std::size_t replicas, std::uint64_t seed,
                                  int workers);

// Boundary ladder: one trace with max(modes) coefficients per replica, truncated at each level.
LadderResult boundary_critical_ladder(const std::vector<int>& modes, int n_arcs, std::size_t replicas,
                                      std::uint64_t seed, int workers);

}  // namespace lqft
