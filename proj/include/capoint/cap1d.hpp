#pragma once

#include <vector>

#include "capoint/coeffs.hpp"

namespace capoint {

// Sampled flux curve over the interior of [0,1].
struct FluxCurve {
  std::vector<double> s;
  std::vector<double> flux;
  int argmin_index = -1;       // first index attaining the sampled minimum
  double minimizer = 0.0;      // refined location of the minimum
  bool refined_by_search = true;  // false when golden-section refinement was skipped
};

// Two-sided flux through the cross-section at s: 1/R(s) + 1/(R(1)-R(s)).
double flux(const ResistanceMap& rm, double s);

// Same quantity from one-sided second-order difference quotients of the
// harmonic profiles on either side of s; step h with [s-h, s+h] in (0,1).
double flux_direct(const ResistanceMap& rm, double s, double h);

// The point c with R(c) = R(1)/2, located by bisection until
// |R(c) - R(1)/2| <= rm.tol(). Ties in discrete scans break toward smaller s.
double capacity_point(const ResistanceMap& rm);

// Flux sampled at n interior points s_i = i/(n+1), i = 1..n.
FluxCurve flux_curve(const ResistanceMap& rm, int n);

// Location of the flux minimum: coarse scan over the n-point curve, then
// golden-section refinement between the neighbors of the best sample.
double flux_argmin(const ResistanceMap& rm, int n);

}  // namespace capoint
