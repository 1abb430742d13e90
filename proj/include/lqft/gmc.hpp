#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lqft/disk_geometry.hpp"
#include "lqft/gff.hpp"
#include "lqft/grid.hpp"

namespace lqft {

enum class SupportKind { bulk, boundary };

struct Atom {
  DiskPoint location;
  double mass;
};

struct AtomicMeasure {
  SupportKind support = SupportKind::bulk;
  std::vector<Atom> atoms;
  double gamma = 0.0;
  double eps_or_modes = 0.0;  // eps for bulk measures, mode count for boundary ones
  std::uint64_t seed = 0;
  bool critical = false;

  double total() const;
};

// mass_i = eps_i^{gamma^2/2} e^{gamma X_i} area_i, gamma in (0, 2).
AtomicMeasure bulk_measure(const FieldRealization& field, double gamma, const std::vector<double>& cell_areas);

// mass_m = e^{-gamma^2/8} e^{(gamma/2) X_b(theta_m) - (gamma^2/8) Var_N} 2 pi / n_arcs.
AtomicMeasure boundary_measure(const BoundaryTrace& trace, double gamma, int n_arcs);

double integrate(const AtomicMeasure& measure, const std::function<double(const DiskPoint&)>& f);

// Atoms moved to psi(location), masses unchanged.
AtomicMeasure push_forward(const AtomicMeasure& measure, const MobiusMap& psi);

void write_measure_csv(const AtomicMeasure& measure, const std::string& csv_path, const std::string& json_path);

// Batch drivers: total masses for replicas [0, n), replica r using stream ids
// stream_id(r, bulk) / stream_id(r, boundary).
std::vector<double> bulk_total_masses(const PointGrid& grid, const GaussianSampler& sampler, double gamma,
                                      std::uint64_t seed, std::size_t n_replicas, int workers);
std::vector<double> boundary_total_masses(int n_modes, int n_arcs, double gamma, std::uint64_t seed,
                                          std::size_t n_replicas, int workers);

// E[bulk total] for the atomization on this grid: sum (1 - |x|^2)^{-gamma^2/2} area.
double bulk_expected_total(const PointGrid& grid, double gamma);

void check_subcritical(double gamma);

}  // namespace lqft
