#include "capoint/field2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <lapacke.h>

#include "capoint/numerics.hpp"

namespace capoint {

namespace {

constexpr double kPi = std::numbers::pi;

// documented contract for every iterative Laplace/eigen solve
constexpr double kSolveTol = 1e-10;

// ---------- geometry helpers ----------

// Nearest point on the curved wall y = sign * f(t) to a query point.
std::array<double, 2> nearest_curve_point(const Expr& f, double qx, double qy) {
  const double sign = qy >= 0.0 ? 1.0 : -1.0;
  const double ay = std::abs(qy);
  auto dist2 = [&](double t) {
    const double dx = t - qx;
    const double dy = f(t) - ay;
    return dx * dx + dy * dy;
  };
  const double w = 0.15;
  const double lo = std::clamp(qx - w, 0.0, 1.0);
  const double hi = std::clamp(qx + w, 0.0, 1.0);
  int best = 0;
  const int ns = 151;
  double bestv = 0.0;
  for (int i = 0; i < ns; ++i) {
    const double t = lo + (hi - lo) * i / (ns - 1);
    const double v = dist2(t);
    if (i == 0 || v < bestv) {
      bestv = v;
      best = i;
    }
  }
  const double tb = lo + (hi - lo) * best / (ns - 1);
  const double step = (hi - lo) / (ns - 1);
  const double t = num::golden_min(dist2, std::max(lo, tb - step), std::min(hi, tb + step), 1e-12);
  return {t, sign * f(t)};
}

}  // namespace

double boundary_distance(const DomainSpec& spec, double x, double y) {
  if (spec.level(x, y) <= 0.0)
    throw ValidationError("boundary distance queried outside the domain");
  if (spec.kind() == DomainSpec::Kind::Disk)
    return spec.radius() - std::hypot(x - spec.center_x(), y - spec.center_y());
  const auto top = nearest_curve_point(spec.halfwidth(), x, std::abs(y));
  const double dt = std::hypot(top[0] - x, top[1] - std::abs(y));
  const auto bot = nearest_curve_point(spec.halfwidth(), x, -std::abs(y));
  const double db = std::hypot(bot[0] - x, bot[1] + std::abs(y));
  return std::min({x, 1.0 - x, dt, db});
}

namespace {

// ---------- linear system assembly ----------

struct System {
  const Grid2D* g = nullptr;
  BCMode mode = BCMode::Dirichlet;
  int n = 0;
  std::vector<int> sys_of_u;  // grid unknown -> system row, -1 when pinned
  std::vector<int> u_of_sys;
  // CSR of the h^2-scaled operator (regular rows: diag 4, offdiag -1)
  std::vector<int> rp, ci;
  std::vector<double> val;
  std::vector<int> diag_idx;
  // boundary-data terms: b[row] += bw * bc(bbx, bby)
  std::vector<int> brp;
  std::vector<double> bw, bbx, bby;
  // pinned-value terms: b[row] += pin_coef * pin_value
  std::vector<double> pin_coef;
  bool symmetric = true;
};

struct RowAccum {
  std::vector<std::pair<int, double>> cols;
  std::vector<std::array<double, 3>> data;  // weight, bx, by
  double pin = 0.0;
  double diag = 0.0;
};

// Reflected-ghost contribution for a mixed-mode leg that leaves through the
// curved wall: value sources for u(ghost), or a plain fold onto the center
// node when the reflection cannot be interpolated.
struct GhostTerm {
  std::vector<std::pair<int, double>> cols;  // system column, weight
  std::vector<std::array<double, 3>> data;   // weight, bx, by (snapped wall corners)
  double pin = 0.0;
  double self = 0.0;
};

GhostTerm resolve_ghost(const Grid2D& g, const std::vector<char>& pinned, int i, int j, int d) {
  GhostTerm t;
  const DomainSpec& spec = g.spec;
  const double gx = g.xc(i) + g.h * kDirX[d];
  const double gy = g.yc(j) + g.h * kDirY[d];
  auto fold = [&] {
    t = GhostTerm{};
    t.self = 1.0;
    return t;
  };
  if (spec.level(gx, gy) > -1e-12) return fold();  // ghost sits on the wall

  const auto b = nearest_curve_point(spec.halfwidth(), gx, gy);
  const double rx = 2.0 * b[0] - gx;
  const double ry = 2.0 * b[1] - gy;
  if (!(spec.level(rx, ry) > 0.0)) return fold();

  const double fi = (rx - g.x0) / g.h;
  const double fj = (ry - g.y0) / g.h;
  if (fi < 0.0 || fi > g.nx - 1 || fj < 0.0 || fj > g.ny - 1) return fold();
  const int i0 = std::min(g.nx - 2, static_cast<int>(fi));
  const int j0 = std::min(g.ny - 2, static_cast<int>(fj));
  const double wx = fi - i0;
  const double wy = fj - j0;
  const double weights[4] = {(1.0 - wx) * (1.0 - wy), wx * (1.0 - wy), (1.0 - wx) * wy,
                             wx * wy};
  const int ci2[4] = {i0, i0 + 1, i0, i0 + 1};
  const int cj[4] = {j0, j0, j0 + 1, j0 + 1};
  for (int kq = 0; kq < 4; ++kq) {
    if (weights[kq] <= 1e-14) continue;
    const int v = g.id(ci2[kq], cj[kq]);
    const int u = g.unknown[v];
    if (u >= 0) {
      if (pinned[u])
        t.pin += weights[kq];
      else
        t.cols.push_back({u, weights[kq]});
      continue;
    }
    if (g.cls[v] == NodeClass::Snapped && spec.on_side_wall(g.xc(ci2[kq]), g.yc(cj[kq]))) {
      t.data.push_back({weights[kq], g.xc(ci2[kq]), g.yc(cj[kq])});
      continue;
    }
    return fold();  // corner carries no value
  }
  return t;
}

System assemble(const Grid2D& g, BCMode mode, const std::vector<char>& pinned) {
  if (mode == BCMode::Mixed && g.spec.kind() != DomainSpec::Kind::Profile)
    throw ValidationError("mixed boundary mode requires a profile-strip domain");

  System S;
  S.g = &g;
  S.mode = mode;
  S.sys_of_u.assign(g.n_unknowns, -1);
  for (int u = 0; u < g.n_unknowns; ++u) {
    if (!pinned[u]) {
      S.sys_of_u[u] = S.n++;
      S.u_of_sys.push_back(u);
    }
  }
  if (S.n == 0) throw ValidationError("no unknowns left after pinning");

  std::vector<RowAccum> rows(S.n);
  for (int row = 0; row < S.n; ++row) {
    const int u = S.u_of_sys[row];
    const int v = g.node[u];
    const int i = v % g.nx;
    const int j = v / g.nx;
    RowAccum& acc = rows[row];

    for (int axis = 0; axis < 2; ++axis) {
      const int dpos = axis == 0 ? 0 : 2;
      const int dneg = axis == 0 ? 1 : 3;
      // side descriptors: alpha plus how the off-center value is supplied
      double alpha[2] = {1.0, 1.0};
      int kind[2] = {0, 0};  // 0 = unknown, 1 = pinned, 2 = data, 3 = ghost
      int ucol[2] = {-1, -1};
      BoundaryLeg legv[2];
      GhostTerm ghost[2];
      const int dirs[2] = {dpos, dneg};
      for (int s = 0; s < 2; ++s) {
        const int d = dirs[s];
        const int w = g.nbr[u][d];
        if (w >= 0) {
          if (pinned[w]) {
            kind[s] = 1;
          } else {
            kind[s] = 0;
            ucol[s] = S.sys_of_u[w];
          }
          continue;
        }
        legv[s] = g.leg[u][d];
        const bool wall = g.spec.on_side_wall(legv[s].bx, legv[s].by);
        if (mode == BCMode::Dirichlet || wall) {
          kind[s] = 2;
          alpha[s] = legv[s].alpha;
        } else {
          kind[s] = 3;  // reflecting curve: full-step ghost
          ghost[s] = resolve_ghost(g, pinned, i, j, d);
        }
      }
      const double a0 = alpha[0], a1 = alpha[1];
      acc.diag += 2.0 / (a0 * a1);
      const double coef[2] = {2.0 / (a0 * (a0 + a1)), 2.0 / (a1 * (a0 + a1))};
      for (int s = 0; s < 2; ++s) {
        const double c = coef[s];
        switch (kind[s]) {
          case 0:
            acc.cols.push_back({ucol[s], -c});
            break;
          case 1:
            acc.pin += c;
            break;
          case 2:
            acc.data.push_back({c, legv[s].bx, legv[s].by});
            break;
          case 3: {
            const GhostTerm& t = ghost[s];
            acc.diag -= c * t.self;
            acc.pin += c * t.pin;
            for (const auto& [uu, wgt] : t.cols) {
              const int col = S.sys_of_u[uu];
              if (col == row)
                acc.diag -= c * wgt;
              else if (col >= 0)
                acc.cols.push_back({col, -c * wgt});
              else
                acc.pin += c * wgt;  // corner pinned
            }
            for (const auto& dd : t.data) acc.data.push_back({c * dd[0], dd[1], dd[2]});
            break;
          }
        }
      }
    }
  }

  // accumulate into CSR with merged duplicate columns
  S.rp.assign(S.n + 1, 0);
  S.brp.assign(S.n + 1, 0);
  S.pin_coef.assign(S.n, 0.0);
  S.diag_idx.assign(S.n, -1);
  for (int row = 0; row < S.n; ++row) {
    auto& acc = rows[row];
    acc.cols.push_back({row, acc.diag});
    std::sort(acc.cols.begin(), acc.cols.end());
    int kept = 0;
    for (std::size_t k = 0; k < acc.cols.size(); ++k) {
      if (kept > 0 && acc.cols[kept - 1].first == acc.cols[k].first)
        acc.cols[kept - 1].second += acc.cols[k].second;
      else
        acc.cols[kept++] = acc.cols[k];
    }
    acc.cols.resize(kept);
    S.rp[row + 1] = S.rp[row] + kept;
    S.brp[row + 1] = S.brp[row] + static_cast<int>(acc.data.size());
    S.pin_coef[row] = acc.pin;
  }
  S.ci.resize(S.rp[S.n]);
  S.val.resize(S.rp[S.n]);
  S.bw.resize(S.brp[S.n]);
  S.bbx.resize(S.brp[S.n]);
  S.bby.resize(S.brp[S.n]);
  for (int row = 0; row < S.n; ++row) {
    int k = S.rp[row];
    for (const auto& [col, vv] : rows[row].cols) {
      if (col == row) S.diag_idx[row] = k;
      S.ci[k] = col;
      S.val[k] = vv;
      ++k;
    }
    int bk = S.brp[row];
    for (const auto& dd : rows[row].data) {
      S.bw[bk] = dd[0];
      S.bbx[bk] = dd[1];
      S.bby[bk] = dd[2];
      ++bk;
    }
    if (S.diag_idx[row] < 0) throw NumericalError("assembly produced a row without a diagonal");
  }

  // symmetry test: compare each entry against its transpose partner
  S.symmetric = true;
  for (int row = 0; row < S.n && S.symmetric; ++row) {
    for (int k = S.rp[row]; k < S.rp[row + 1]; ++k) {
      const int col = S.ci[k];
      if (col == row) continue;
      double tr = 0.0;
      bool found = false;
      for (int k2 = S.rp[col]; k2 < S.rp[col + 1]; ++k2) {
        if (S.ci[k2] == row) {
          tr = S.val[k2];
          found = true;
          break;
        }
      }
      if (!found || std::abs(tr - S.val[k]) > 1e-12 * (std::abs(S.val[k]) + 1.0)) {
        S.symmetric = false;
        break;
      }
    }
  }
  return S;
}

System assemble(const Grid2D& g, BCMode mode) {
  return assemble(g, mode, std::vector<char>(g.n_unknowns, 0));
}

void apply(const System& S, const std::vector<double>& x, std::vector<double>& out) {
  for (int r = 0; r < S.n; ++r) {
    double s = 0.0;
    for (int k = S.rp[r]; k < S.rp[r + 1]; ++k) s += S.val[k] * x[S.ci[k]];
    out[r] = s;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Right-hand side for boundary data bc and pin value; also reports the data
// range for the maximum-principle check.
void rhs_for(const System& S, const std::function<double(double, double)>& bc, double pin_value,
             std::vector<double>& b, double& bc_min, double& bc_max) {
  b.assign(S.n, 0.0);
  bool any_pin = false, any_data = false;
  double dmin = 0.0, dmax = 0.0;
  for (int r = 0; r < S.n; ++r) {
    double s = S.pin_coef[r] * pin_value;
    if (S.pin_coef[r] != 0.0) any_pin = true;
    for (int k = S.brp[r]; k < S.brp[r + 1]; ++k) {
      const double v = bc(S.bbx[k], S.bby[k]);
      s += S.bw[k] * v;
      if (!any_data) {
        dmin = dmax = v;
        any_data = true;
      } else {
        dmin = std::min(dmin, v);
        dmax = std::max(dmax, v);
      }
    }
    b[r] = s;
  }
  if (any_pin && any_data) {
    bc_min = std::min(dmin, pin_value);
    bc_max = std::max(dmax, pin_value);
  } else if (any_pin) {
    bc_min = bc_max = pin_value;
  } else if (any_data) {
    bc_min = dmin;
    bc_max = dmax;
  } else {
    bc_min = bc_max = 0.0;
  }
}

// ---------- solvers ----------

long cg_solve(const System& S, const std::vector<double>& b, std::vector<double>& x, double tol,
              long maxit, double& rel_out) {
  const double nb = std::sqrt(dot(b, b));
  if (nb == 0.0) {
    x.assign(S.n, 0.0);
    rel_out = 0.0;
    return 0;
  }
  if (static_cast<int>(x.size()) != S.n) x.assign(S.n, 0.0);
  std::vector<double> r(S.n), p(S.n), ap(S.n);
  apply(S, x, ap);
  for (int i = 0; i < S.n; ++i) r[i] = b[i] - ap[i];
  p = r;
  double rs = dot(r, r);
  long it = 0;
  for (; it < maxit; ++it) {
    if (std::sqrt(rs) <= tol * nb) break;
    apply(S, p, ap);
    const double alpha = rs / dot(p, ap);
    for (int i = 0; i < S.n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rs2 = dot(r, r);
    for (int i = 0; i < S.n; ++i) p[i] = r[i] + (rs2 / rs) * p[i];
    rs = rs2;
  }
  rel_out = std::sqrt(rs) / nb;
  if (rel_out > tol) throw NumericalError("conjugate gradient did not converge");
  return it;
}

long sor_solve(const System& S, const std::vector<double>& b, std::vector<double>& x, double tol,
               long maxit, double& rel_out) {
  const double nb = std::sqrt(dot(b, b));
  if (nb == 0.0) {
    x.assign(S.n, 0.0);
    rel_out = 0.0;
    return 0;
  }
  if (static_cast<int>(x.size()) != S.n) x.assign(S.n, 0.0);
  constexpr double omega = 1.8;
  std::vector<double> r(S.n);
  long it = 0;
  for (; it < maxit; ++it) {
    for (int row = 0; row < S.n; ++row) {
      double s = b[row];
      double d = 0.0;
      for (int k = S.rp[row]; k < S.rp[row + 1]; ++k) {
        if (S.ci[k] == row)
          d = S.val[k];
        else
          s -= S.val[k] * x[S.ci[k]];
      }
      x[row] += omega * (s / d - x[row]);
    }
    if (it % 8 == 7 || it == maxit - 1) {
      apply(S, x, r);
      double rr = 0.0;
      for (int i = 0; i < S.n; ++i) {
        const double d = b[i] - r[i];
        rr += d * d;
      }
      rel_out = std::sqrt(rr) / nb;
      if (rel_out <= tol) return it + 1;
    }
  }
  throw NumericalError("SOR iteration did not converge");
}

// Band storage LU via LAPACK, for sweeps that reuse one matrix with many
// right-hand sides.
struct BandedLU {
  int n = 0, kl = 0, ku = 0, ldab = 0;
  std::vector<double> ab;
  std::vector<lapack_int> ipiv;

  void factor(const System& S) {
    n = S.n;
    int bw = 0;
    for (int r = 0; r < n; ++r)
      for (int k = S.rp[r]; k < S.rp[r + 1]; ++k) bw = std::max(bw, std::abs(S.ci[k] - r));
    kl = ku = bw;
    ldab = 2 * kl + ku + 1;
    if (static_cast<long long>(ldab) * n > 300'000'000LL)
      throw NumericalError("banded factorization would exceed the memory budget");
    ab.assign(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int k = S.rp[r]; k < S.rp[r + 1]; ++k) {
        const int c = S.ci[k];
        ab[static_cast<std::size_t>(c) * ldab + (kl + ku + r - c)] = S.val[k];
      }
    ipiv.assign(n, 0);
    const lapack_int info =
        LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, ipiv.data());
    if (info != 0) throw NumericalError("banded LU factorization failed");
  }

  void solve(std::vector<double>& b) const {
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab,
                                           ipiv.data(), b.data(), n);
    if (info != 0) throw NumericalError("banded LU solve failed");
  }
};

double max_principle_violation(const std::vector<double>& x, double bc_min, double bc_max) {
  double lo = x.empty() ? 0.0 : x[0], hi = lo;
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::max({0.0, hi - bc_max, bc_min - lo});
}

ScalarField2D solve_with(const System& S, const std::vector<double>& b, double bc_min,
                         double bc_max) {
  ScalarField2D f;
  double rel = 0.0;
  long iters;
  if (S.symmetric) {
    f.stats.method = "cg";
    iters = cg_solve(S, b, f.values, kSolveTol, 20000 + 4L * S.n, rel);
  } else {
    f.stats.method = "sor";
    iters = sor_solve(S, b, f.values, kSolveTol, 400000, rel);
  }
  f.stats.iterations = iters;
  f.stats.rel_residual = rel;
  f.stats.max_principle_violation = max_principle_violation(f.values, bc_min, bc_max);
  return f;
}

int node_unknown_at(const Grid2D& g, double px, double py) {
  const double fi = (px - g.x0) / g.h;
  const double fj = (py - g.y0) / g.h;
  const int i = static_cast<int>(std::lround(fi));
  const int j = static_cast<int>(std::lround(fj));
  if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return -1;
  if (std::abs(fi - i) > 1e-9 || std::abs(fj - j) > 1e-9) return -1;
  return g.unknown[g.id(i, j)];
}

double field_value_at(const Grid2D& g, const std::vector<double>& x,
                      const std::vector<int>& sys_of_u, double px, double py) {
  const int direct = node_unknown_at(g, px, py);
  if (direct >= 0 && sys_of_u[direct] >= 0) return x[sys_of_u[direct]];
  const double fi = (px - g.x0) / g.h;
  const double fj = (py - g.y0) / g.h;
  const int i0 = static_cast<int>(std::floor(fi));
  const int j0 = static_cast<int>(std::floor(fj));
  if (i0 < 0 || i0 + 1 >= g.nx || j0 < 0 || j0 + 1 >= g.ny)
    throw ValidationError("evaluation point outside the lattice");
  const double wx = fi - i0, wy = fj - j0;
  const double w[4] = {(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy};
  const int ii[4] = {i0, i0 + 1, i0, i0 + 1};
  const int jj[4] = {j0, j0, j0 + 1, j0 + 1};
  double s = 0.0;
  for (int k = 0; k < 4; ++k) {
    const int u = g.unknown[g.id(ii[k], jj[k])];
    if (u < 0 || sys_of_u[u] < 0) {
      if (w[k] > 1e-12)
        throw ValidationError("evaluation point too close to the boundary to interpolate");
      continue;
    }
    s += w[k] * x[sys_of_u[u]];
  }
  return s;
}

}  // namespace

ScalarField2D solve_dirichlet(const Grid2D& g,
                              const std::function<double(double, double)>& bc) {
  const System S = assemble(g, BCMode::Dirichlet);
  std::vector<double> b;
  double lo, hi;
  rhs_for(S, bc, 0.0, b, lo, hi);
  return solve_with(S, b, lo, hi);
}

double robin_value(const Grid2D& g, double px, double py) {
  if (!(g.spec.level(px, py) > 0.0))
    throw ValidationError("probe point must lie strictly inside the domain");
  if (boundary_distance(g.spec, px, py) < 2.0 * g.h - 1e-12)
    throw ValidationError("probe point must be at least 2h from the boundary");
  const System S = assemble(g, BCMode::Dirichlet);
  auto bc = [px, py](double bx, double by) { return std::log(std::hypot(bx - px, by - py)); };
  std::vector<double> b;
  double lo, hi;
  rhs_for(S, bc, 0.0, b, lo, hi);
  const ScalarField2D f = solve_with(S, b, lo, hi);
  return field_value_at(g, f.values, S.sys_of_u, px, py);
}

RobinSweep harmonic_center(const Grid2D& g) {
  const System S = assemble(g, BCMode::Dirichlet);
  RobinSweep sweep;
  if (g.spec.kind() == DomainSpec::Kind::Profile) {
    sweep.candidates = axis_candidates(g);
  } else {
    sweep.candidates.reserve(g.n_unknowns);
    for (int u = 0; u < g.n_unknowns; ++u) {
      const int v = g.node[u];
      const double cx = g.xc(v % g.nx);
      const double cy = g.yc(v / g.nx);
      if (boundary_distance(g.spec, cx, cy) < 2.0 * g.h - 1e-12) continue;
      sweep.candidates.push_back({cx, cy});
    }
    if (sweep.candidates.empty())
      throw ValidationError("no sweep candidates at least 2h from the boundary");
  }
  const int nc = static_cast<int>(sweep.candidates.size());
  sweep.values.assign(nc, 0.0);

  const bool use_lu = nc >= 16;
  BandedLU lu;
  if (use_lu) lu.factor(S);
  std::vector<double> violations(nc, 0.0);

  num::parallel_for(nc, [&](int c) {
    const double px = sweep.candidates[c][0];
    const double py = sweep.candidates[c][1];
    auto bc = [px, py](double bx, double by) { return std::log(std::hypot(bx - px, by - py)); };
    std::vector<double> b;
    double lo, hi;
    rhs_for(S, bc, 0.0, b, lo, hi);
    std::vector<double> x;
    if (use_lu) {
      lu.solve(b);
      x = std::move(b);
    } else {
      double rel;
      if (S.symmetric)
        cg_solve(S, b, x, kSolveTol, 20000 + 4L * S.n, rel);
      else
        sor_solve(S, b, x, kSolveTol, 400000, rel);
    }
    violations[c] = max_principle_violation(x, lo, hi);
    sweep.values[c] = field_value_at(g, x, S.sys_of_u, px, py);
  });

  sweep.argmax_index = 0;
  for (int c = 1; c < nc; ++c)
    if (sweep.values[c] > sweep.values[sweep.argmax_index]) sweep.argmax_index = c;

  sweep.stats.method = use_lu ? "banded_lu" : (S.symmetric ? "cg" : "sor");
  sweep.stats.iterations = nc;
  sweep.stats.max_principle_violation = *std::max_element(violations.begin(), violations.end());

  // golden-section refinement bracketed by the lattice neighbors of the best
  // candidate; every probe is a fresh solve against the shared system
  auto probe = [&](double qx, double qy) {
    auto bc = [qx, qy](double bx, double by) { return std::log(std::hypot(bx - qx, by - qy)); };
    std::vector<double> b;
    double lo, hi;
    rhs_for(S, bc, 0.0, b, lo, hi);
    std::vector<double> x;
    if (use_lu) {
      lu.solve(b);
      x = std::move(b);
    } else {
      double rel;
      if (S.symmetric)
        cg_solve(S, b, x, kSolveTol, 20000 + 4L * S.n, rel);
      else
        sor_solve(S, b, x, kSolveTol, 400000, rel);
    }
    return field_value_at(g, x, S.sys_of_u, qx, qy);
  };

  const int k = sweep.argmax_index;
  const double bx = sweep.candidates[k][0];
  const double by = sweep.candidates[k][1];
  const double h = g.h;
  auto has_candidate = [&](double qx, double qy) {
    for (int c = 0; c < nc; ++c)
      if (std::abs(sweep.candidates[c][0] - qx) < 1e-9 &&
          std::abs(sweep.candidates[c][1] - qy) < 1e-9)
        return true;
    return false;
  };
  const double xlo = has_candidate(bx - h, by) ? bx - h : bx;
  const double xhi = has_candidate(bx + h, by) ? bx + h : bx;
  sweep.refined_x =
      xhi > xlo ? num::golden_min([&](double q) { return -probe(q, by); }, xlo, xhi, h / 10.0)
                : bx;
  sweep.refined_y = by;
  if (g.spec.kind() == DomainSpec::Kind::Disk) {
    const double ylo = has_candidate(bx, by - h) ? by - h : by;
    const double yhi = has_candidate(bx, by + h) ? by + h : by;
    if (yhi > ylo)
      sweep.refined_y = num::golden_min([&](double q) { return -probe(sweep.refined_x, q); },
                                        ylo, yhi, h / 10.0);
  }
  return sweep;
}

EigenPair2D principal_eigen2d(const Grid2D& g, BCMode mode) {
  const System S = assemble(g, mode);
  if (S.n < 4) throw ValidationError("grid too coarse for an eigenvalue solve");

  EigenPair2D eig;
  std::vector<double> v(S.n, 1.0), y, av(S.n);
  double nv = std::sqrt(dot(v, v));
  for (auto& z : v) z /= nv;

  double lambda_h2 = 0.0, prev = -1.0;
  long inner_total = 0;
  bool converged = false;
  for (int outer = 0; outer < 500; ++outer) {
    double rel;
    if (S.symmetric)
      inner_total += cg_solve(S, v, y, kSolveTol, 20000 + 4L * S.n, rel);
    else
      inner_total += sor_solve(S, v, y, kSolveTol, 400000, rel);
    const double ny = std::sqrt(dot(y, y));
    if (ny == 0.0) throw NumericalError("inverse power iteration produced a zero vector");
    for (auto& z : y) z /= ny;
    apply(S, y, av);
    lambda_h2 = dot(y, av);
    v = y;
    if (outer >= 1 && std::abs(lambda_h2 - prev) <= 1e-11 * std::max(1.0, lambda_h2)) {
      converged = true;
      break;
    }
    prev = lambda_h2;
  }
  if (!converged) throw NumericalError("inverse power iteration did not converge");

  // fix sign, scale to max 1
  int best = 0;
  for (int r = 1; r < S.n; ++r)
    if (std::abs(v[r]) > std::abs(v[best])) best = r;
  const double scale = v[best];
  eig.values.assign(g.n_unknowns, 0.0);
  for (int r = 0; r < S.n; ++r) eig.values[S.u_of_sys[r]] = v[r] / scale;

  apply(S, v, av);
  double rnorm = 0.0;
  for (int r = 0; r < S.n; ++r) {
    const double d = av[r] - lambda_h2 * v[r];
    rnorm += d * d;
  }
  eig.lambda = lambda_h2 / (g.h * g.h);
  eig.stats.method = S.symmetric ? "cg" : "sor";
  eig.stats.iterations = inner_total;
  eig.stats.rel_residual = std::sqrt(rnorm) / lambda_h2;

  const int vbest = g.node[S.u_of_sys[best]];
  const int bi = vbest % g.nx;
  const int bj = vbest / g.nx;
  eig.argmax_i = bi;
  eig.argmax_j = bj;
  eig.m_x = g.xc(bi);
  eig.m_y = g.yc(bj);
  auto val_at = [&](int i, int j) -> const double* {
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return nullptr;
    const int u = g.unknown[g.id(i, j)];
    if (u < 0) return nullptr;
    return &eig.values[u];
  };
  const double center = eig.values[g.unknown[vbest]];
  if (const double *l = val_at(bi - 1, bj), *r = val_at(bi + 1, bj); l && r)
    eig.m_x = num::parabola_vertex(g.xc(bi - 1), *l, g.xc(bi), center, g.xc(bi + 1), *r);
  if (const double *dn = val_at(bi, bj - 1), *up = val_at(bi, bj + 1); dn && up)
    eig.m_y = num::parabola_vertex(g.yc(bj - 1), *dn, g.yc(bj), center, g.yc(bj + 1), *up);
  return eig;
}

FluxProbeResult flux_probe(const Grid2D& g, BCMode mode, double px, double py, double eps) {
  const double h = g.h;
  if (!(g.spec.level(px, py) > 0.0))
    throw ValidationError("probe point must lie strictly inside the domain");
  if (eps < 3.0 * h - 1e-12)
    throw ValidationError("probe radius must be at least 3h");
  double clearance;
  if (mode == BCMode::Dirichlet) {
    clearance = boundary_distance(g.spec, px, py);
    if (clearance < eps + 3.0 * h - 1e-12)
      throw ValidationError("probe needs eps + 3h clearance from the boundary");
  } else {
    clearance = std::min(px, 1.0 - px);
    if (clearance < eps + 3.0 * h - 1e-12)
      throw ValidationError("probe needs eps + 3h clearance from the side walls");
  }

  std::vector<char> pinned(g.n_unknowns, 0);
  int mask_nodes = 0;
  for (int u = 0; u < g.n_unknowns; ++u) {
    const int v = g.node[u];
    if (std::hypot(g.xc(v % g.nx) - px, g.yc(v / g.nx) - py) <= eps) {
      pinned[u] = 1;
      ++mask_nodes;
    }
  }
  if (mask_nodes == 0) throw ValidationError("probe mask contains no lattice nodes");

  const System S = assemble(g, mode, pinned);
  std::vector<double> b;
  double lo, hi;
  rhs_for(S, [](double, double) { return 0.0; }, 1.0, b, lo, hi);
  const ScalarField2D f = solve_with(S, b, std::min(lo, 0.0), std::max(hi, 1.0));

  auto node_value = [&](int i, int j, double& out) {
    const int u = g.unknown[g.id(i, j)];
    if (u < 0) return false;
    out = pinned[u] ? 1.0 : f.values[S.sys_of_u[u]];
    return true;
  };
  auto contour_flux = [&](double r) {
    double total = 0.0;
    for (int u = 0; u < g.n_unknowns; ++u) {
      const int v = g.node[u];
      const int i = v % g.nx;
      const int j = v / g.nx;
      const double dv = std::hypot(g.xc(i) - px, g.yc(j) - py);
      if (dv > r) continue;
      double uv = 0.0;
      node_value(i, j, uv);
      for (int d = 0; d < 4; ++d) {
        const int ni = i + kDirX[d];
        const int nj = j + kDirY[d];
        if (ni < 0 || ni >= g.nx || nj < 0 || nj >= g.ny) continue;
        if (std::hypot(g.xc(ni) - px, g.yc(nj) - py) <= r) continue;
        double uw;
        if (!node_value(ni, nj, uw)) continue;  // reflecting or exterior side
        total += uv - uw;
      }
    }
    return total;
  };

  FluxProbeResult res;
  const double gap = clearance - eps;
  res.flux = contour_flux(eps + 0.5 * gap);
  res.flux_check = contour_flux(eps + 0.3 * gap);
  if (!(res.flux > 0.0)) throw NumericalError("probe flux is not positive");
  res.contour_gap_rel = std::abs(res.flux - res.flux_check) / res.flux;
  res.effective_radius = h * std::sqrt(static_cast<double>(mask_nodes) / kPi);
  res.mask_nodes = mask_nodes;
  res.stats = f.stats;
  return res;
}

namespace {

// Richardson estimates from the last levels of a refinement ladder.
void extrapolate(const std::vector<double>& v, double& order, double& limit) {
  const std::size_t L = v.size();
  order = 2.0;
  if (L >= 3) {
    const double d1 = v[L - 2] - v[L - 3];
    const double d2 = v[L - 1] - v[L - 2];
    if (d2 != 0.0 && d1 * d2 > 0.0) {
      const double ratio = d1 / d2;
      if (ratio > 1.0) order = std::log2(ratio);
    }
  }
  const double factor = std::pow(2.0, order) - 1.0;
  limit = v[L - 1] + (v[L - 1] - v[L - 2]) / factor;
}

}  // namespace

ExperimentReport open_problem_experiment(const DomainSpec& spec, BCMode mode,
                                         const std::vector<double>& hs) {
  if (hs.size() < 3 || hs.size() > 6)
    throw ValidationError("experiment needs between 3 and 6 refinement levels");
  for (std::size_t i = 0; i + 1 < hs.size(); ++i)
    if (std::abs(hs[i] - 2.0 * hs[i + 1]) > 1e-12 * hs[i])
      throw ValidationError("experiment levels must halve the spacing");

  ExperimentReport rep;
  rep.domain = spec.describe();
  rep.bc = mode == BCMode::Dirichlet ? "dirichlet" : "mixed";

  for (double h : hs) {
    const Grid2D g = build_grid(spec, h);
    ExperimentLevel lev;
    lev.h = h;

    if (mode == BCMode::Dirichlet) {
      lev.c_x = harmonic_center(g).refined_x;
    } else {
      const double eps = 5.0 * h;
      const auto cands = axis_candidates(g);
      std::vector<std::array<double, 2>> usable;
      for (const auto& p : cands)
        if (std::min(p[0], 1.0 - p[0]) >= eps + 3.0 * h - 1e-12) usable.push_back(p);
      if (usable.size() < 3)
        throw ValidationError("too few usable flux candidates at h=" + num::format_num(h));
      std::vector<double> fluxes(usable.size());
      num::parallel_for(static_cast<int>(usable.size()), [&](int c) {
        fluxes[c] = flux_probe(g, mode, usable[c][0], usable[c][1], eps).flux;
      });
      int bi = 0;
      for (std::size_t c = 1; c < usable.size(); ++c)
        if (fluxes[c] < fluxes[bi]) bi = static_cast<int>(c);
      lev.c_x = usable[bi][0];
      if (bi > 0 && bi + 1 < static_cast<int>(usable.size()))
        lev.c_x = num::parabola_vertex(usable[bi - 1][0], fluxes[bi - 1], usable[bi][0],
                                       fluxes[bi], usable[bi + 1][0], fluxes[bi + 1]);
    }

    const EigenPair2D eig = principal_eigen2d(g, mode);
    lev.m_x = eig.m_x;
    lev.gap = std::abs(lev.m_x - lev.c_x);
    rep.levels.push_back(lev);
  }

  std::vector<double> cs, ms;
  for (const auto& l : rep.levels) {
    cs.push_back(l.c_x);
    ms.push_back(l.m_x);
  }
  extrapolate(cs, rep.order_c, rep.extrapolated_c);
  extrapolate(ms, rep.order_m, rep.extrapolated_m);

  // conservative call: a side must clear the other by three times the
  // finest level-to-level drift before the report takes a position
  const std::size_t L = rep.levels.size();
  const double drift =
      std::max(std::abs(cs[L - 1] - cs[L - 2]), std::abs(ms[L - 1] - ms[L - 2]));
  if (rep.extrapolated_c + 3.0 * drift < rep.extrapolated_m)
    rep.status = "supports";
  else if (rep.extrapolated_m + 3.0 * drift < rep.extrapolated_c)
    rep.status = "contradicts";
  else
    rep.status = "unresolved";
  return rep;
}

}  // namespace capoint
