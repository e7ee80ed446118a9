#include "capoint/cap1d.hpp"

#include <cmath>

#include "capoint/numerics.hpp"

namespace capoint {

double flux(const ResistanceMap& rm, double s) {
  if (!(s > 0.0 && s < 1.0))
    throw ValidationError("flux cross-section must lie strictly inside (0,1)");
  const double r = rm.resistance(s);
  const double rest = rm.total() - r;
  if (r <= 0.0 || rest <= 0.0)
    throw NumericalError("degenerate resistance split at s=" + num::format_num(s));
  return 1.0 / r + 1.0 / rest;
}

// One-sided three-point difference quotients at spacing h/2, second order.
// The left harmonic profile is u(x) = R(x)/R(s); the right one mirrors it.
double flux_direct(const ResistanceMap& rm, double s, double h) {
  if (!(h > 0.0) || !(s - h > 0.0 && s + h < 1.0))
    throw ValidationError("difference stencil [s-h, s+h] must lie inside (0,1)");
  const double rs = rm.resistance(s);
  const double rt = rm.total();
  const double a_s = rm.profile()(s);
  const double q = 0.5 * h;
  const double ul0 = 1.0;
  const double ul1 = rm.resistance(s - q) / rs;
  const double ul2 = rm.resistance(s - 2.0 * q) / rs;
  const double dleft = (3.0 * ul0 - 4.0 * ul1 + ul2) / (2.0 * q);
  const double ur0 = 1.0;
  const double ur1 = (rt - rm.resistance(s + q)) / (rt - rs);
  const double ur2 = (rt - rm.resistance(s + 2.0 * q)) / (rt - rs);
  const double dright = (3.0 * ur0 - 4.0 * ur1 + ur2) / (2.0 * q);
  return a_s * (dleft + dright);
}

double capacity_point(const ResistanceMap& rm) {
  const double target = 0.5 * rm.total();
  double lo = 0.0, hi = 1.0;
  double mid = 0.5;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double g = rm.resistance(mid) - target;
    if (std::abs(g) <= rm.tol()) return mid;
    if (g < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  throw NumericalError("capacity point bisection did not converge");
}

FluxCurve flux_curve(const ResistanceMap& rm, int n) {
  if (n < 3) throw ValidationError("flux curve needs at least 3 samples");
  FluxCurve curve;
  curve.s.resize(n);
  curve.flux.resize(n);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1) / (n + 1);
    const double f = flux(rm, s);
    curve.s[i] = s;
    curve.flux[i] = f;
    if (i == 0 || f < best) {  // strict: ties keep the smaller s
      best = f;
      curve.argmin_index = i;
    }
  }
  const int k = curve.argmin_index;
  const double lo = k == 0 ? curve.s[0] : curve.s[k - 1];
  const double hi = k == n - 1 ? curve.s[n - 1] : curve.s[k + 1];
  if (hi > lo) {
    curve.minimizer =
        num::golden_min([&rm](double s) { return flux(rm, s); }, lo, hi, 1e-12);
    curve.refined_by_search = true;
  } else {
    curve.minimizer = curve.s[k];
    curve.refined_by_search = false;
  }
  return curve;
}

double flux_argmin(const ResistanceMap& rm, int n) { return flux_curve(rm, n).minimizer; }

}  // namespace capoint
