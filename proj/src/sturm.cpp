#include "capoint/sturm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <lapacke.h>

#include "capoint/numerics.hpp"

namespace capoint {

namespace {

constexpr double kPi = std::numbers::pi;

// Coefficient and position tables in the time variable, sampled on a uniform
// grid fine enough to serve RK4 at `steps` and at 2*steps (half-step values
// included for both resolutions).
struct ShootCtx {
  double T = 0.0;
  int half_n = 0;  // tables hold half_n + 1 entries at t_i = i*T/half_n
  std::vector<double> A;
  std::vector<double> x;

  double a_at(double t) const {
    const double pos = std::clamp(t, 0.0, T) / T * half_n;
    const int i = std::min(half_n - 1, static_cast<int>(pos));
    const double w = pos - i;
    return A[i] + w * (A[i + 1] - A[i]);
  }
};

ShootCtx build_ctx(const ResistanceMap& rm, int steps) {
  ShootCtx c;
  c.T = rm.total();
  c.half_n = 4 * steps;
  c.A.resize(c.half_n + 1);
  c.x.resize(c.half_n + 1);
  const auto& a = rm.profile();
  for (int i = 0; i <= c.half_n; ++i) {
    const double t = c.T * i / c.half_n;
    const double xi = rm.inverse_resistance(std::min(t, c.T));
    c.x[i] = xi;
    c.A[i] = a(xi);
  }
  return c;
}

double phase_rate(double theta, double aval, double lambda) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return -(s * s) - lambda * aval * (c * c);
}

// RK4 integration of the phase ODE; optionally records the full trace.
double shoot_theta(const ShootCtx& c, double lambda, int nsteps, std::vector<double>* trace) {
  const int stride = c.half_n / nsteps;
  const double h = c.T / nsteps;
  double th = 0.5 * kPi;
  if (trace) {
    trace->clear();
    trace->reserve(nsteps + 1);
    trace->push_back(th);
  }
  for (int j = 0; j < nsteps; ++j) {
    const double a0 = c.A[j * stride];
    const double am = c.A[j * stride + stride / 2];
    const double a1 = c.A[(j + 1) * stride];
    const double k1 = phase_rate(th, a0, lambda);
    const double k2 = phase_rate(th + 0.5 * h * k1, am, lambda);
    const double k3 = phase_rate(th + 0.5 * h * k2, am, lambda);
    const double k4 = phase_rate(th + h * k3, a1, lambda);
    th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (trace) trace->push_back(th);
  }
  return th;
}

// RK4 on the first-order system U' = V, V' = -lambda*A*U from (0, 1).
void shoot_uv(const ShootCtx& c, double lambda, int nsteps, std::vector<double>& U,
              std::vector<double>& V) {
  const int stride = c.half_n / nsteps;
  const double h = c.T / nsteps;
  U.assign(nsteps + 1, 0.0);
  V.assign(nsteps + 1, 0.0);
  double u = 0.0, v = 1.0;
  U[0] = u;
  V[0] = v;
  for (int j = 0; j < nsteps; ++j) {
    const double a0 = c.A[j * stride];
    const double am = c.A[j * stride + stride / 2];
    const double a1 = c.A[(j + 1) * stride];
    const double ku1 = v, kv1 = -lambda * a0 * u;
    const double ku2 = v + 0.5 * h * kv1, kv2 = -lambda * am * (u + 0.5 * h * ku1);
    const double ku3 = v + 0.5 * h * kv2, kv3 = -lambda * am * (u + 0.5 * h * ku2);
    const double ku4 = v + h * kv3, kv4 = -lambda * a1 * (u + h * ku3);
    u += h / 6.0 * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
    v += h / 6.0 * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    U[j + 1] = u;
    V[j + 1] = v;
  }
}

double hermite(double t, double t0, double t1, double y0, double y1, double d0, double d1) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + y1 * (3.0 * s2 - 2.0 * s3) +
         h * (d0 * (s3 - 2.0 * s2 + s) + d1 * (s3 - s2));
}

// Phase value at arbitrary time from the trace, cubic Hermite with the ODE
// supplying exact derivatives at the samples.
double theta_at(const ShootCtx& c, const std::vector<double>& theta, double lambda, double t) {
  const int nsteps = static_cast<int>(theta.size()) - 1;
  const double h = c.T / nsteps;
  const double pos = std::clamp(t, 0.0, c.T) / h;
  const int j = std::min(nsteps - 1, static_cast<int>(pos));
  const double t0 = j * h, t1 = (j + 1) * h;
  const int stride = c.half_n / nsteps;
  const double d0 = phase_rate(theta[j], c.A[j * stride], lambda);
  const double d1 = phase_rate(theta[j + 1], c.A[(j + 1) * stride], lambda);
  return hermite(t, t0, t1, theta[j], theta[j + 1], d0, d1);
}

// Downward zero crossing of a sampled function with known derivative values;
// linear interpolation refined by two Newton steps on the Hermite model.
double refine_crossing(const ShootCtx& c, double t0, double t1, double y0, double y1, double d0,
                       double d1, double lambda, bool phase) {
  double t = t0 + (t1 - t0) * (y0 / (y0 - y1));
  for (int it = 0; it < 3; ++it) {
    const double y = hermite(t, t0, t1, y0, y1, d0, d1);
    double slope;
    if (phase) {
      slope = phase_rate(y, c.a_at(t), lambda);
    } else {
      // derivative of the Hermite cubic itself
      const double h = t1 - t0;
      const double s = (t - t0) / h;
      slope = (6.0 * s * s - 6.0 * s) * (y0 - y1) / h + d0 * (3.0 * s * s - 4.0 * s + 1.0) +
              d1 * (3.0 * s * s - 2.0 * s);
    }
    if (slope == 0.0) break;
    const double tn = t - y / slope;
    t = std::clamp(tn, t0, t1);
  }
  return t;
}

struct EigenInternal {
  ShootCtx ctx;
  double lambda = 0.0;
  int steps = 0;
  std::vector<double> theta;
  std::vector<double> U, V;
  double t_peak = -1.0;  // first V = 0 crossing
  double end_residual = 0.0;
};

void check_shoot_inputs(const ResistanceMap&, int steps) {
  if (steps < 16 || steps > (1 << 22))
    throw ValidationError("shooting step count must lie in [16, 4194304]");
}

EigenInternal solve_eigen_internal(const ResistanceMap& rm, int k, int steps) {
  check_shoot_inputs(rm, steps);
  if (k < 0 || k > 64) throw ValidationError("eigenpair index must lie in [0, 64]");
  EigenInternal e;
  e.ctx = build_ctx(rm, steps);
  e.steps = steps;
  const double target = -0.5 * kPi - k * kPi;

  auto g = [&](double lambda, int n) { return shoot_theta(e.ctx, lambda, n, nullptr) - target; };

  double lo = 0.0, hi = 1.0;
  double glo = g(lo, steps);
  double ghi = g(hi, steps);
  int guard = 0;
  while (ghi > 0.0) {
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    if (++guard > 60) throw NumericalError("eigenvalue bracket not found below 2^60");
    ghi = g(hi, steps);
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid, steps);
    if (gm > 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  e.lambda = 0.5 * (lo + hi);

  // step-doubling consistency check: estimate how far the eigenvalue would
  // move at twice the resolution, via the local slope of the shooting angle
  const double slope = (ghi - glo) / (hi - lo);
  const double residual_fine = g(e.lambda, 2 * steps);
  if (slope != 0.0) {
    const double shift = std::abs(residual_fine / slope);
    if (shift > 1e-7 * std::max(1.0, e.lambda))
      throw NumericalError(
          "step-doubling check failed: eigenvalue estimate shifted by " +
          num::format_num(shift) + "; increase the step count");
  }

  e.end_residual = std::abs(shoot_theta(e.ctx, e.lambda, steps, &e.theta) - target);
  shoot_uv(e.ctx, e.lambda, steps, e.U, e.V);
  e.U[steps] = 0.0;  // boundary condition, clears the integrator residual

  // first peak: V crosses zero downward
  const double h = e.ctx.T / steps;
  for (int j = 0; j < steps; ++j) {
    if (e.V[j] > 0.0 && e.V[j + 1] <= 0.0) {
      const double d0 = -e.lambda * e.ctx.A[j * (e.ctx.half_n / steps)] * e.U[j];
      const double d1 = -e.lambda * e.ctx.A[(j + 1) * (e.ctx.half_n / steps)] * e.U[j + 1];
      e.t_peak = refine_crossing(e.ctx, j * h, (j + 1) * h, e.V[j], e.V[j + 1], d0, d1,
                                 e.lambda, false);
      break;
    }
  }
  if (e.t_peak < 0.0) throw NumericalError("no interior peak found in eigenfunction");
  return e;
}

EigenPair1D eigen_from_internal(const ResistanceMap& rm, const EigenInternal& e, int k) {
  EigenPair1D out;
  out.k = k;
  out.lambda = e.lambda;
  const int n = e.steps;
  const int stride = e.ctx.half_n / n;
  out.x.resize(n + 1);
  out.u.resize(n + 1);
  double umax = 0.0;
  for (int j = 0; j <= n; ++j) {
    out.x[j] = e.ctx.x[j * stride];
    umax = std::max(umax, std::abs(e.U[j]));
  }
  if (umax == 0.0) throw NumericalError("degenerate eigenfunction");
  for (int j = 0; j <= n; ++j) out.u[j] = e.U[j] / umax;

  // interior zeros: strict sign changes of U
  const double h = e.ctx.T / n;
  for (int j = 1; j < n; ++j) {
    if (out.u[j] == 0.0) {
      out.nodes.push_back(out.x[j]);
    } else if (out.u[j] * out.u[j + 1] < 0.0) {
      const double d0 = e.V[j] / umax;
      const double d1 = e.V[j + 1] / umax;
      const double tz = refine_crossing(e.ctx, j * h, (j + 1) * h, out.u[j], out.u[j + 1], d0,
                                        d1, e.lambda, false);
      out.nodes.push_back(rm.inverse_resistance(tz));
    }
  }
  if (static_cast<int>(out.nodes.size()) != k)
    throw NumericalError("eigenfunction has " + std::to_string(out.nodes.size()) +
                         " interior zeros, expected " + std::to_string(k));

  if (k == 0) {
    out.argmax_x = rm.inverse_resistance(e.t_peak);
  } else {
    int best = 0;
    for (int j = 1; j <= n; ++j)
      if (std::abs(out.u[j]) > std::abs(out.u[best])) best = j;
    if (best > 0 && best < n) {
      out.argmax_x = num::parabola_vertex(out.x[best - 1], std::abs(out.u[best - 1]),
                                          out.x[best], std::abs(out.u[best]), out.x[best + 1],
                                          std::abs(out.u[best + 1]));
    } else {
      out.argmax_x = out.x[best];
    }
  }
  return out;
}

}  // namespace

PruferTrace prufer_shoot(const ResistanceMap& rm, double lambda, int steps) {
  check_shoot_inputs(rm, steps);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  const ShootCtx ctx = build_ctx(rm, steps);
  PruferTrace tr;
  tr.lambda = lambda;
  tr.total_time = ctx.T;
  tr.steps = steps;
  shoot_theta(ctx, lambda, steps, &tr.theta);
  tr.t.resize(steps + 1);
  const double h = ctx.T / steps;
  for (int j = 0; j <= steps; ++j) tr.t[j] = j * h;
  for (int j = 0; j < steps; ++j) {
    if (tr.theta[j] > 0.0 && tr.theta[j + 1] <= 0.0) {
      const double d0 = phase_rate(tr.theta[j], ctx.A[j * (ctx.half_n / steps)], lambda);
      const double d1 =
          phase_rate(tr.theta[j + 1], ctx.A[(j + 1) * (ctx.half_n / steps)], lambda);
      tr.t_zero =
          refine_crossing(ctx, j * h, (j + 1) * h, tr.theta[j], tr.theta[j + 1], d0, d1, lambda,
                          true);
      break;
    }
  }
  return tr;
}

EigenPair1D principal_eigen(const ResistanceMap& rm, int steps) {
  const EigenInternal e = solve_eigen_internal(rm, 0, steps);
  return eigen_from_internal(rm, e, 0);
}

EigenPair1D kth_eigen(const ResistanceMap& rm, int k, int steps) {
  const EigenInternal e = solve_eigen_internal(rm, k, steps);
  return eigen_from_internal(rm, e, k);
}

ComparisonWitness comparison_witness(const ResistanceMap& rm, int steps) {
  const EigenInternal e = solve_eigen_internal(rm, 0, steps);
  ComparisonWitness w;
  w.t_m = e.t_peak;
  w.total_time = e.ctx.T;
  w.end_residual = e.end_residual;
  w.tau_star = e.ctx.T - e.t_peak;
  const double tau_max = std::min(w.tau_star, e.t_peak);
  const int n = steps;
  w.tau.resize(n + 1);
  w.phi.resize(n + 1);
  w.psi.resize(n + 1);
  double margin = 0.0;
  bool first = true;
  for (int j = 0; j <= n; ++j) {
    const double tau = tau_max * j / n;
    w.tau[j] = tau;
    w.phi[j] = -theta_at(e.ctx, e.theta, e.lambda, e.t_peak - tau);
    w.psi[j] = theta_at(e.ctx, e.theta, e.lambda, e.t_peak + tau);
    if (j >= 1) {
      const double d = w.phi[j] - w.psi[j];
      if (first || d < margin) {
        margin = d;
        first = false;
      }
    }
  }
  w.margin = margin;
  return w;
}

ProfileCheck check_profile(const ResistanceMap& rm, int steps) {
  ProfileCheck r;
  r.c = capacity_point(rm);
  const ComparisonWitness w = comparison_witness(rm, steps);
  r.m = rm.inverse_resistance(std::min(w.t_m, rm.total()));
  r.margin = w.margin;
  r.pass = (r.c <= r.m + 1e-9) && (w.margin >= -1e-9);
  return r;
}

std::vector<NodalIntervalCheck> nodal_interval_check(const ResistanceMap& rm, int k, int steps) {
  const EigenInternal e = solve_eigen_internal(rm, k, steps);
  const EigenPair1D eig = eigen_from_internal(rm, e, k);

  std::vector<double> bounds;
  bounds.push_back(0.0);
  for (double z : eig.nodes) bounds.push_back(z);
  bounds.push_back(1.0);

  std::vector<NodalIntervalCheck> out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    NodalIntervalCheck nc;
    nc.x_left = bounds[i];
    nc.x_right = bounds[i + 1];
    // capacity point of the restricted profile, exact through the global map:
    // the point splitting the interval's reciprocal integral in half
    const double rl = rm.resistance(nc.x_left);
    const double rr = rm.resistance(nc.x_right);
    const double p = rm.inverse_resistance(0.5 * (rl + rr));
    nc.c_sub = (p - nc.x_left) / (nc.x_right - nc.x_left);

    // peak of |u| inside the interval from the sampled eigenfunction
    int best = -1;
    for (std::size_t j = 0; j < eig.x.size(); ++j) {
      if (eig.x[j] <= nc.x_left || eig.x[j] >= nc.x_right) continue;
      if (best < 0 || std::abs(eig.u[j]) > std::abs(eig.u[best])) best = static_cast<int>(j);
    }
    if (best <= 0 || best + 1 >= static_cast<int>(eig.x.size()))
      throw NumericalError("nodal interval contains no interior samples");
    const double xm = num::parabola_vertex(eig.x[best - 1], std::abs(eig.u[best - 1]),
                                           eig.x[best], std::abs(eig.u[best]),
                                           eig.x[best + 1], std::abs(eig.u[best + 1]));
    nc.m_sub = (xm - nc.x_left) / (nc.x_right - nc.x_left);
    nc.pass = nc.c_sub <= nc.m_sub + 1e-6;
    out.push_back(nc);
  }
  return out;
}

HeatTrajectory heat_evolve(const CoefficientProfile& a, const std::function<double(double)>& u0,
                           double t_end, double dt, int cells) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!(t_end >= 0.0)) throw ValidationError("end time must be nonnegative");
  if (cells < 16 || cells > (1 << 20))
    throw ValidationError("heat grid cell count must lie in [16, 1048576]");

  const int n = cells - 1;  // interior nodes
  const double h = 1.0 / cells;
  std::vector<double> u(cells + 1);
  double umax = 0.0;
  for (int i = 0; i <= cells; ++i) {
    u[i] = u0(i * h);
    if (u[i] < 0.0)
      throw ValidationError("initial data negative at x=" + num::format_num(i * h));
    umax = std::max(umax, u[i]);
  }
  if (std::abs(u[0]) > 1e-7 || std::abs(u[cells]) > 1e-7)
    throw ValidationError("initial data must vanish at both endpoints");
  if (umax == 0.0) throw ValidationError("initial data is identically zero");
  u[0] = 0.0;
  u[cells] = 0.0;

  std::vector<double> am(cells);
  for (int i = 0; i < cells; ++i) am[i] = a((i + 0.5) * h);

  // Crank-Nicolson: (I - dt/2 L) u_next = (I + dt/2 L) u
  const double r = 0.5 * dt / (h * h);
  std::vector<double> dl(n), dg(n), du(n);
  std::vector<double> cp(n), rhs(n);
  auto factor = [&](double rr) {
    for (int i = 0; i < n; ++i) {
      dg[i] = 1.0 + rr * (am[i] + am[i + 1]);
      dl[i] = -rr * am[i];      // coupling to node i-1 (interior index i-1)
      du[i] = -rr * am[i + 1];  // coupling to node i+1
    }
    cp[0] = du[0] / dg[0];
    for (int i = 1; i < n; ++i) cp[i] = du[i] / (dg[i] - dl[i] * cp[i - 1]);
  };
  auto solve_into = [&](std::vector<double>& b) {
    b[0] /= dg[0];
    for (int i = 1; i < n; ++i) b[i] = (b[i] - dl[i] * b[i - 1]) / (dg[i] - dl[i] * cp[i - 1]);
    for (int i = n - 2; i >= 0; --i) b[i] -= cp[i] * b[i + 1];
  };
  factor(r);

  HeatTrajectory traj;
  traj.cells = cells;
  auto record = [&](double time) {
    int best = 0;
    for (int i = 1; i <= cells; ++i)
      if (u[i] > u[best]) best = i;
    HeatSample smp;
    smp.time = time;
    smp.max_value = u[best];
    if (best > 0 && best < cells) {
      smp.argmax_x = num::parabola_vertex((best - 1) * h, u[best - 1], best * h, u[best],
                                          (best + 1) * h, u[best + 1]);
    } else {
      smp.argmax_x = best * h;
    }
    traj.samples.push_back(smp);
  };
  record(0.0);

  const long nsteps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
  if (nsteps > 4'000'000) throw ValidationError("too many time steps requested");
  double time = 0.0;
  for (long s = 0; s < nsteps; ++s) {
    double step = dt;
    if (s == nsteps - 1) {
      step = t_end - time;
      if (std::abs(step - dt) > 1e-12 * dt) factor(0.5 * step / (h * h));
    }
    const double rr = 0.5 * step / (h * h);
    for (int i = 1; i <= n; ++i) {
      rhs[i - 1] = u[i] + rr * (am[i] * (u[i + 1] - u[i]) - am[i - 1] * (u[i] - u[i - 1]));
    }
    solve_into(rhs);
    for (int i = 1; i <= n; ++i) u[i] = rhs[i - 1];
    time += step;
    record(time);
  }
  return traj;
}

EigenPair1D fd_eigen(const CoefficientProfile& a, int n, int k) {
  if (n < 15 || n > (1 << 20)) throw ValidationError("fd grid size must lie in [15, 1048576]");
  if (k < 0 || k > 64) throw ValidationError("eigenpair index must lie in [0, 64]");
  const double h = 1.0 / (n + 1);
  std::vector<double> am(n + 1);
  for (int j = 0; j <= n; ++j) am[j] = a((j + 0.5) * h);

  const double ih2 = 1.0 / (h * h);
  std::vector<double> diag(n), off(n - 1);
  for (int i = 0; i < n; ++i) diag[i] = (am[i] + am[i + 1]) * ih2;
  for (int i = 0; i + 1 < n; ++i) off[i] = -am[i + 1] * ih2;

  auto dot = [&](const std::vector<double>& a2, const std::vector<double>& b2) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a2[i] * b2[i];
    return s;
  };
  // quadratic form sum a*(du)^2 over the edges: every term is nonnegative,
  // so the quotient avoids the cancellation that w^T (T w) suffers at 1/h^2
  auto rayleigh = [&](const std::vector<double>& w) {
    double s = am[0] * w[0] * w[0] + am[n] * w[n - 1] * w[n - 1];
    for (int i = 1; i < n; ++i) {
      const double dw = w[i] - w[i - 1];
      s += am[i] * dw * dw;
    }
    return s * ih2;
  };
  double tnorm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = diag[i];
    if (i > 0) row += std::abs(off[i - 1]);
    if (i + 1 < n) row += std::abs(off[i]);
    tnorm = std::max(tnorm, row);
  }

  std::vector<std::vector<double>> found;
  std::vector<double> lambdas;
  std::vector<double> v(n), y(n);
  std::vector<double> sdl(n - 1), sd(n), sdu(n - 1);

  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i < n; ++i) v[i] = std::sin((j + 1) * kPi * (i + 1) * h);
    for (const auto& f : found) {
      const double p = dot(v, f);
      for (int i = 0; i < n; ++i) v[i] -= p * f[i];
    }
    double nv = std::sqrt(dot(v, v));
    for (int i = 0; i < n; ++i) v[i] /= nv;

    double sigma = 0.0;
    double lambda = 0.0, prev = -1.0;
    bool ok = false;
    for (int it = 0; it < 5000; ++it) {
      for (int i = 0; i < n; ++i) sd[i] = diag[i] - sigma;
      for (int i = 0; i + 1 < n; ++i) {
        sdl[i] = off[i];
        sdu[i] = off[i];
      }
      y = v;
      lapack_int info = LAPACKE_dgtsv(LAPACK_ROW_MAJOR, n, 1, sdl.data(), sd.data(), sdu.data(),
                                      y.data(), 1);
      if (info != 0) {
        sigma += 1e-10 * (1.0 + std::abs(sigma));
        continue;
      }
      for (const auto& f : found) {
        const double p = dot(y, f);
        for (int i = 0; i < n; ++i) y[i] -= p * f[i];
      }
      const double ny = std::sqrt(dot(y, y));
      if (ny == 0.0) throw NumericalError("inverse iteration produced a zero vector");
      // a solve amplification of order 1/(eps*||T||) means the shift already
      // matches an eigenvalue of the deflated operator to rounding accuracy
      const bool at_floor = ny * (64.0 * std::numeric_limits<double>::epsilon() * tnorm) >= 1.0;
      for (int i = 0; i < n; ++i) y[i] /= ny;
      lambda = rayleigh(y);
      v = y;
      if (at_floor ||
          (it >= 1 && std::abs(lambda - prev) <= 1e-12 * std::max(1.0, std::abs(lambda)))) {
        ok = true;
        break;
      }
      prev = lambda;
      if (it >= 3) sigma = lambda;
    }
    if (!ok) throw NumericalError("inverse iteration did not converge");
    found.push_back(v);
    lambdas.push_back(lambda);
    if (j > 0 && lambdas[j] <= lambdas[j - 1])
      throw NumericalError("inverse iteration produced out-of-order eigenvalues");
  }

  EigenPair1D out;
  out.k = k;
  out.lambda = lambdas[k];
  const std::vector<double>& uk = found[k];
  out.x.resize(n + 2);
  out.u.resize(n + 2);
  out.x[0] = 0.0;
  out.u[0] = 0.0;
  out.x[n + 1] = 1.0;
  out.u[n + 1] = 0.0;
  double umax = 0.0;
  for (int i = 0; i < n; ++i) umax = std::max(umax, std::abs(uk[i]));
  const double sign = uk[0] >= 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    out.x[i + 1] = (i + 1) * h;
    out.u[i + 1] = sign * uk[i] / umax;
  }

  int zeros = 0;
  for (int i = 1; i < n; ++i)
    if (out.u[i] * out.u[i + 1] < 0.0) ++zeros;
  if (zeros != k) throw NumericalError("inverse iteration converged to the wrong mode");
  for (int i = 1; i < n; ++i) {
    if (out.u[i] * out.u[i + 1] < 0.0) {
      const double w = out.u[i] / (out.u[i] - out.u[i + 1]);
      out.nodes.push_back(out.x[i] + w * h);
    }
  }

  int best = 1;
  for (int i = 2; i <= n; ++i)
    if (std::abs(out.u[i]) > std::abs(out.u[best])) best = i;
  out.argmax_x = num::parabola_vertex(out.x[best - 1], std::abs(out.u[best - 1]), out.x[best],
                                      std::abs(out.u[best]), out.x[best + 1],
                                      std::abs(out.u[best + 1]));
  return out;
}

}  // namespace capoint
