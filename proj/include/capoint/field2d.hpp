#pragma once

#include <functional>
#include <string>
#include <vector>

#include "capoint/geom2d.hpp"

namespace capoint {

// Boundary handling: Dirichlet everywhere, or Dirichlet on the side walls
// x=0 and x=1 with a reflecting (zero normal flux) curved wall. Mixed mode
// requires a profile-strip domain.
enum class BCMode { Dirichlet, Mixed };

struct SolveStats {
  std::string method;  // "cg", "sor", or "banded_lu"
  long iterations = 0;
  double rel_residual = 0.0;
  // worst excursion of interior values outside the boundary-data range
  double max_principle_violation = 0.0;
};

// Solution values per grid unknown.
struct ScalarField2D {
  std::vector<double> values;
  SolveStats stats;
};

// Laplace solve with boundary data bc(x, y) on the whole boundary.
ScalarField2D solve_dirichlet(const Grid2D& g,
                              const std::function<double(double, double)>& bc);

// Harmonic function with boundary data ln|z - p| evaluated back at p.
// p must lie strictly inside the domain.
double robin_value(const Grid2D& g, double px, double py);

// Sweep of robin_value over candidate points: the y=0 axis nodes for profile
// strips, every unknown at least 2h from the boundary for disks. Repeated
// right-hand sides share one banded LU factorization when the sweep is large
// enough. The best candidate is refined by golden-section search (fresh solve
// per probe) to a bracket width of h/10; ties break toward smaller x.
struct RobinSweep {
  std::vector<std::array<double, 2>> candidates;
  std::vector<double> values;
  int argmax_index = -1;
  double refined_x = 0.0;
  double refined_y = 0.0;
  SolveStats stats;
};

RobinSweep harmonic_center(const Grid2D& g);

// Principal Dirichlet/mixed eigenpair by inverse power iteration.
struct EigenPair2D {
  double lambda = 0.0;
  std::vector<double> values;  // per unknown, scaled to max = 1
  int argmax_i = -1, argmax_j = -1;
  double m_x = 0.0, m_y = 0.0;  // refined peak location
  SolveStats stats;
};

EigenPair2D principal_eigen2d(const Grid2D& g, BCMode mode);

// Capacity probe: pins u = 1 on the lattice disk of radius eps around p,
// u = 0 on the (Dirichlet part of the) outer boundary, and measures the
// total flux out of the pinned set on two concentric lattice contours.
struct FluxProbeResult {
  double flux = 0.0;        // outer contour
  double flux_check = 0.0;  // inner contour
  double contour_gap_rel = 0.0;
  double effective_radius = 0.0;
  int mask_nodes = 0;
  SolveStats stats;
};

FluxProbeResult flux_probe(const Grid2D& g, BCMode mode, double px, double py, double eps);

// Grid-refinement experiment: capacity-like point c_x (harmonic center in
// Dirichlet mode, flux-minimizing axis point with eps = 5h in mixed mode)
// against the warmest point m_x, across a ladder of spacings.
struct ExperimentLevel {
  double h = 0.0;
  double c_x = 0.0;
  double m_x = 0.0;
  double gap = 0.0;  // |m_x - c_x|
};

struct ExperimentReport {
  std::string domain;
  std::string bc;  // "dirichlet" or "mixed"
  std::vector<ExperimentLevel> levels;
  double extrapolated_c = 0.0;
  double extrapolated_m = 0.0;
  double order_c = 0.0;
  double order_m = 0.0;
  // "supports" when extrapolated c_x + 3*drift < extrapolated m_x,
  // "contradicts" for the reverse inequality, else "unresolved"; drift is the
  // largest change of c_x or m_x over the finest refinement step.
  std::string status;
};

// Requires 3 to 6 spacings, each half the previous one.
ExperimentReport open_problem_experiment(const DomainSpec& spec, BCMode mode,
                                         const std::vector<double>& hs);

// Euclidean distance from an interior point to the domain boundary.
double boundary_distance(const DomainSpec& spec, double x, double y);

}  // namespace capoint
