#include "capoint/geom2d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "capoint/numerics.hpp"

namespace capoint {

DomainSpec DomainSpec::profile_strip(const Expr& f, int samples) {
  if (f.empty()) throw ValidationError("empty halfwidth expression");
  if (samples < 1001) throw ValidationError("validation sample count must be at least 1001");
  DomainSpec d;
  d.kind_ = Kind::Profile;
  d.f_ = f;
  double maxv = 0.0;
  double prev = 0.0;
  bool nondecreasing = true;
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / (samples - 1);
    const double v = f(x);
    if (!std::isfinite(v)) throw ValidationError("halfwidth not finite at x=" + num::format_num(x));
    if (!(v > 0.0)) throw ValidationError("halfwidth nonpositive at x=" + num::format_num(x));
    maxv = std::max(maxv, v);
    if (i > 0 && v < prev) nondecreasing = false;
    prev = v;
  }
  d.mono_ = nondecreasing ? Monotone::Verified : Monotone::Violated;
  d.max_halfwidth_ = maxv;
  return d;
}

DomainSpec DomainSpec::disk(double cx, double cy, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(cx) || !std::isfinite(cy))
    throw ValidationError("disk requires a positive radius and finite center");
  DomainSpec d;
  d.kind_ = Kind::Disk;
  d.cx_ = cx;
  d.cy_ = cy;
  d.radius_ = radius;
  d.max_halfwidth_ = radius;
  return d;
}

double DomainSpec::level(double x, double y) const {
  if (kind_ == Kind::Disk) return radius_ - std::hypot(x - cx_, y - cy_);
  const double side = std::min(x, 1.0 - x);
  if (side <= 0.0) return side;
  return std::min(side, f_(x) - std::abs(y));
}

bool DomainSpec::on_side_wall(double bx, double) const {
  return kind_ == Kind::Profile && (bx <= 1e-9 || bx >= 1.0 - 1e-9);
}

std::string DomainSpec::describe() const {
  if (kind_ == Kind::Disk)
    return "disk r=" + num::format_num(radius_) + " at (" + num::format_num(cx_) + "," +
           num::format_num(cy_) + ")";
  return "profile f=" + f_.str();
}

namespace {

// Boundary crossing on the segment from inside point P toward P + h*d,
// located by bisection to 1e-12 in the segment coordinate.
BoundaryLeg find_crossing(const DomainSpec& spec, double px, double py, int dir, double h) {
  const double qx = px + h * kDirX[dir];
  const double qy = py + h * kDirY[dir];
  double lo = 0.0, hi = 1.0;
  // level(P) > 0, level(Q) <= 0
  for (int it = 0; it < 60 && (hi - lo) * h > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = spec.level(px + (qx - px) * mid, py + (qy - py) * mid);
    if (v > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  BoundaryLeg legv;
  legv.alpha = hi;
  legv.bx = px + (qx - px) * hi;
  legv.by = py + (qy - py) * hi;
  return legv;
}

}  // namespace

Grid2D build_grid(const DomainSpec& spec, double h) {
  if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
  const double inv = 1.0 / h;
  const long n = std::lround(inv);
  if (std::abs(inv - n) > 1e-9 * inv || n < 2 || n > 4096)
    throw ValidationError("1/h must be an integer in [2, 4096]");

  Grid2D g;
  g.spec = spec;
  g.h = h;
  if (spec.kind() == DomainSpec::Kind::Profile) {
    const int half_rows = static_cast<int>(std::floor(spec.max_halfwidth() / h)) + 1;
    g.nx = static_cast<int>(n) + 1;
    g.ny = 2 * half_rows + 1;
    g.x0 = 0.0;
    g.y0 = -half_rows * h;
    g.axis_row = half_rows;
  } else {
    const int m = static_cast<int>(std::ceil(spec.radius() / h)) + 1;
    g.nx = g.ny = 2 * m + 1;
    g.x0 = spec.center_x() - m * h;
    g.y0 = spec.center_y() - m * h;
    g.axis_row = -1;
    for (int j = 0; j < g.ny; ++j) {
      if (std::abs(g.yc(j)) <= 1e-12) {
        g.axis_row = j;
        break;
      }
    }
  }

  const int nn = g.nx * g.ny;
  g.cls.assign(nn, NodeClass::Exterior);
  g.unknown.assign(nn, -1);

  std::vector<char> inside(nn, 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (spec.level(g.xc(i), g.yc(j)) > 0.0) inside[g.id(i, j)] = 1;

  // crossing legs toward exterior neighbors; nodes with a leg shorter than
  // 1e-6*h are snapped onto the boundary
  std::vector<BoundaryLeg> cross(static_cast<std::size_t>(nn) * 4);
  std::vector<char> has_cross(static_cast<std::size_t>(nn) * 4, 0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int v = g.id(i, j);
      if (!inside[v]) continue;
      bool snap = false;
      for (int d = 0; d < 4; ++d) {
        const int ni = i + kDirX[d];
        const int nj = j + kDirY[d];
        if (ni < 0 || ni >= g.nx || nj < 0 || nj >= g.ny)
          throw NumericalError("lattice margin too small for the domain");
        if (inside[g.id(ni, nj)]) continue;
        const BoundaryLeg legv = find_crossing(spec, g.xc(i), g.yc(j), d, h);
        cross[static_cast<std::size_t>(v) * 4 + d] = legv;
        has_cross[static_cast<std::size_t>(v) * 4 + d] = 1;
        if (legv.alpha < 1e-6) snap = true;
      }
      if (snap) g.cls[v] = NodeClass::Snapped;
    }
  }

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int v = g.id(i, j);
      if (!inside[v] || g.cls[v] == NodeClass::Snapped) continue;
      g.unknown[v] = g.n_unknowns++;
      g.node.push_back(v);
    }
  }

  g.nbr.assign(g.n_unknowns, {-1, -1, -1, -1});
  g.leg.assign(g.n_unknowns, {});
  for (int u = 0; u < g.n_unknowns; ++u) {
    const int v = g.node[u];
    const int i = v % g.nx;
    const int j = v / g.nx;
    bool all_linked = true;
    for (int d = 0; d < 4; ++d) {
      const int w = g.id(i + kDirX[d], j + kDirY[d]);
      if (g.unknown[w] >= 0) {
        g.nbr[u][d] = g.unknown[w];
        continue;
      }
      all_linked = false;
      if (g.cls[w] == NodeClass::Snapped) {
        g.leg[u][d] = {1.0, g.xc(i + kDirX[d]), g.yc(j + kDirY[d])};
      } else {
        g.leg[u][d] = cross[static_cast<std::size_t>(v) * 4 + d];
      }
    }
    g.cls[v] = all_linked ? NodeClass::Interior : NodeClass::NearBoundary;
  }

  if (g.n_unknowns == 0) throw ValidationError("grid too coarse: domain contains no unknowns");
  return g;
}

std::vector<int> axis_unknowns(const Grid2D& g) {
  if (g.axis_row < 0)
    throw ValidationError("lattice has no y=0 row for axis candidates");
  std::vector<int> out;
  for (int i = 0; i < g.nx; ++i) {
    const int u = g.unknown[g.id(i, g.axis_row)];
    if (u >= 0) out.push_back(u);
  }
  if (out.empty()) throw ValidationError("y=0 row carries no unknowns");
  return out;
}

std::vector<std::array<double, 2>> axis_candidates(const Grid2D& g) {
  std::vector<std::array<double, 2>> pts;
  for (int u : axis_unknowns(g)) {
    const int v = g.node[u];
    pts.push_back({g.xc(v % g.nx), g.yc(v / g.nx)});
  }
  return pts;
}

void write_grid_csv(const Grid2D& g, std::ostream& out) {
  out << "x,y,class\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const char* name = "exterior";
      switch (g.cls[g.id(i, j)]) {
        case NodeClass::Interior:
          name = "interior";
          break;
        case NodeClass::NearBoundary:
          name = "near_boundary";
          break;
        case NodeClass::Snapped:
          name = "snapped";
          break;
        case NodeClass::Exterior:
          break;
      }
      out << num::format_num(g.xc(i)) << ',' << num::format_num(g.yc(j)) << ',' << name << '\n';
    }
  }
}

}  // namespace capoint
