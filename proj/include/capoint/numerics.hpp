#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "capoint/errors.hpp"

namespace capoint::num {

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, int max_depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= max_depth)
    throw NumericalError("quadrature did not converge within refinement depth " +
                         std::to_string(max_depth));
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

// Adaptive Simpson quadrature with absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 0, max_depth);
}

// Golden-section search for a minimum of f on [lo, hi]; stops once the bracket
// width drops below width_tol and returns the bracket midpoint.
template <class F>
double golden_min(F&& f, double lo, double hi, double width_tol, int max_iter = 300) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > width_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Vertex abscissa of the parabola through three points; falls back to x1 when
// the points are (near-)collinear, and clamps into [x0, x2].
inline double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double p = (x1 - x0) * (y1 - y2);
  const double q = (x1 - x2) * (y1 - y0);
  const double denom = p - q;
  const double scale = std::abs(y0) + std::abs(y1) + std::abs(y2) + 1.0;
  if (std::abs(denom) < 1e-14 * scale) return x1;
  const double v = x1 - 0.5 * ((x1 - x0) * p - (x1 - x2) * q) / denom;
  return std::clamp(v, std::min(x0, x2), std::max(x0, x2));
}

// Plain bisection on a sign change; returns the midpoint after `iters` halvings.
template <class F>
double bisect_root(F&& f, double lo, double hi, int iters = 100) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Shortest decimal form that round-trips the double exactly. All precisions
// are scanned because %g can produce a longer scientific form at a lower
// precision than the plain form of a higher one (1e+01 vs 10).
inline std::string format_num(double v) {
  char buf[40];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v && (best.empty() || std::strlen(buf) < best.size()))
      best = buf;
  }
  return best;
}

// Worker count for embarrassingly parallel sweeps: CAPOINT_THREADS if set,
// otherwise the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("CAPOINT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1 && n <= 256) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) across worker_count() threads. Each index is
// processed exactly once; fn must be safe to call concurrently on distinct i.
// The first exception thrown by any worker is rethrown after the join.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace capoint::num
