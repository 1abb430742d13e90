#pragma once

#include <vector>

#include "lqft/disk_geometry.hpp"

namespace lqft {

// Annular sector r0 <= |x| <= r1, t0 <= arg x <= t1 (t in [0, 2 pi]).
struct PolarCell {
  double r0, r1, t0, t1;
};

// Point set carrying what a midpoint-rule atomization needs.
struct PointGrid {
  std::vector<DiskPoint> points;
  std::vector<double> eps;       // circle-average radius per point
  std::vector<double> areas;     // cell area per point
  std::vector<double> diameter;  // cell diameter per point, for exclusion zones
  std::vector<PolarCell> cells;  // cell geometry when the grid is polar, else empty

  int size() const { return static_cast<int>(points.size()); }
  double total_area() const;
};

// Polar grid graded toward the boundary. A uniform core of inner_rings rings
// covers r <= 1/2 (the first ring is a central disk cell); band b = 1..bands
// covers 1 - 2^-b <= r <= 1 - 2^-(b+1) with rings_per_band rings; one last ring
// reaches r = 1. Each ring gets ceil(2 pi r / (aspect * width)) sectors, rounded
// up to a multiple of sector_multiple. eps per ring is the largest radius that
// keeps all circles inside the disk and pairwise disjoint.
struct GradedGridSpec {
  int inner_rings = 6;
  int bands = 7;
  int rings_per_band = 1;
  double aspect = 4.0;
  int sector_multiple = 4;
};

PointGrid graded_polar_grid(const GradedGridSpec& spec);

// Square lattice of spacing 2 eps restricted to |x| <= rho, circles of radius eps.
// Lattices at eps and eps/2 are nested (every coarse center is a fine cell corner).
PointGrid square_lattice(double eps, double rho);

// Drop points closer than their own cell diameter to any of the given locations.
PointGrid exclude_near(const PointGrid& grid, const std::vector<DiskPoint>& marks);

}  // namespace lqft
