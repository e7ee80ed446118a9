#pragma once

#include <functional>
#include <vector>

#include "capoint/cap1d.hpp"
#include "capoint/coeffs.hpp"

namespace capoint {

// Phase trace of the shooting problem in the time variable t = R(x):
// theta' = -sin^2(theta) - lambda*A(t)*cos^2(theta), theta(0) = pi/2, with
// A(t) = a(x(t)). theta is strictly decreasing whenever lambda > 0.
struct PruferTrace {
  double lambda = 0.0;
  double total_time = 0.0;  // T = R(1)
  int steps = 0;
  std::vector<double> t;      // steps+1 uniform samples
  std::vector<double> theta;  // phase at those samples
  double t_zero = -1.0;       // time of the theta = 0 crossing, -1 if absent
};

// Eigenpair of (a u')' = -lambda u with u(0) = u(1) = 0, sampled on the
// uniform time grid mapped back to x. u is scaled to max |u| = 1 and the
// endpoint values are exactly 0.
struct EigenPair1D {
  int k = 0;  // number of interior zeros
  double lambda = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  double argmax_x = 0.0;       // warmest point m (for k = 0)
  std::vector<double> nodes;   // k interior zeros, increasing
};

// Half-interval comparison data for the principal mode, in time units around
// the peak: phi(tau) = -theta(t_m - tau), psi(tau) = theta(t_m + tau).
struct ComparisonWitness {
  std::vector<double> tau;
  std::vector<double> phi;
  std::vector<double> psi;
  double t_m = 0.0;
  double total_time = 0.0;
  double tau_star = 0.0;       // time for psi to reach pi/2 beyond t_m
  double margin = 0.0;         // min over tau > 0 of phi - psi
  double end_residual = 0.0;   // |theta(T) + pi/2| of the converged shot
};

// Capacity/warmest summary for one profile.
struct ProfileCheck {
  double c = 0.0;
  double m = 0.0;
  double margin = 0.0;   // witness margin
  bool pass = false;     // c <= m and margin >= -1e-9
};

// Argmax trajectory of a heat evolution.
struct HeatSample {
  double time = 0.0;
  double argmax_x = 0.0;
  double max_value = 0.0;
};

struct HeatTrajectory {
  std::vector<HeatSample> samples;
  int cells = 0;
};

// Result of the per-nodal-interval capacity/warmest comparison for a k-th
// eigenfunction: each interval [x_left, x_right] is rescaled to [0,1].
struct NodalIntervalCheck {
  double x_left = 0.0;
  double x_right = 0.0;
  double c_sub = 0.0;  // capacity point of the restricted profile
  double m_sub = 0.0;  // |u| peak inside the interval
  bool pass = false;   // c_sub <= m_sub + tolerance
};

// Integrates the phase ODE with lambda fixed (classical RK4, `steps` steps).
PruferTrace prufer_shoot(const ResistanceMap& rm, double lambda, int steps = 4096);

// Principal eigenpair via bisection on the shooting angle. Performs one
// step-doubling consistency check and throws NumericalError if the refined
// eigenvalue estimate shifts by more than 1e-7 relative.
EigenPair1D principal_eigen(const ResistanceMap& rm, int steps = 4096);

// k-th eigenpair (k interior zeros), same method with target angle shifted
// by k*pi.
EigenPair1D kth_eigen(const ResistanceMap& rm, int k, int steps = 4096);

// Phase-symmetry witness around the peak of the principal mode. For a
// nondecreasing coefficient the margin is nonnegative up to integration
// error, and t_m >= T/2, i.e. m lies at or beyond the capacity point.
ComparisonWitness comparison_witness(const ResistanceMap& rm, int steps = 4096);

// Runs capacity point, warmest point, and witness for one profile.
ProfileCheck check_profile(const ResistanceMap& rm, int steps = 4096);

// Splits the k-th eigenfunction at its nodes and compares the capacity point
// of each restricted profile with the in-interval |u| peak.
std::vector<NodalIntervalCheck> nodal_interval_check(const ResistanceMap& rm, int k,
                                                     int steps = 4096);

// Crank-Nicolson evolution of u_t = (a u_x)_x with Dirichlet ends on a
// uniform grid of `cells` cells; records the argmax location and value at
// every step including t = 0. u0 must be nonnegative, not identically zero,
// and (near) zero at both ends.
HeatTrajectory heat_evolve(const CoefficientProfile& a, const std::function<double(double)>& u0,
                           double t_end, double dt, int cells = 4096);

// Independent finite-difference eigenpair on a uniform x grid with n interior
// nodes: conservative second-order stencil plus shifted inverse iteration
// with deflation. Used to cross-check the shooting method.
EigenPair1D fd_eigen(const CoefficientProfile& a, int n, int k);

}  // namespace capoint
