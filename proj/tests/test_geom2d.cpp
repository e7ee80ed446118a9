#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capoint/expr.hpp"
#include "capoint/geom2d.hpp"
#include "doctest.h"

using namespace capoint;

namespace {

DomainSpec strip(const std::string& f) { return DomainSpec::profile_strip(parse(f)); }

std::set<std::array<double, 2>> unknown_points(const Grid2D& g) {
  std::set<std::array<double, 2>> pts;
  for (int u = 0; u < g.n_unknowns; ++u) {
    const int v = g.node[u];
    pts.insert({g.xc(v % g.nx), g.yc(v / g.nx)});
  }
  return pts;
}

}  // namespace

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(strip("x-0.1"), ValidationError);                      // nonpositive near 0
  CHECK_THROWS_AS(strip("0.5-x"), ValidationError);                      // vanishes at 0.5
  CHECK_THROWS_AS(DomainSpec::profile_strip(Expr{}), ValidationError);   // empty expression
  CHECK_THROWS_AS(DomainSpec::profile_strip(parse("1"), 100), ValidationError);
  CHECK_THROWS_AS(DomainSpec::disk(0.0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(DomainSpec::disk(0.0, 0.0, -1.0), ValidationError);
  const DomainSpec rect = strip("0.5");
  CHECK(rect.kind() == DomainSpec::Kind::Profile);
  CHECK(rect.max_halfwidth() == doctest::Approx(0.5));
  CHECK(rect.halfwidth_monotone() == Monotone::Verified);
  CHECK(strip("0.5-0.2*sin(pi*x)").halfwidth_monotone() == Monotone::Violated);
}

TEST_CASE("level function and side walls") {
  const DomainSpec rect = strip("0.5");
  CHECK(rect.level(0.5, 0.0) > 0.0);
  CHECK(rect.level(0.5, 0.6) < 0.0);
  CHECK(rect.level(-0.1, 0.0) < 0.0);
  CHECK(rect.on_side_wall(0.0, 0.2));
  CHECK(rect.on_side_wall(1.0, -0.3));
  CHECK(!rect.on_side_wall(0.5, 0.5));
  const DomainSpec d = DomainSpec::disk(0.0, 0.0, 1.0);
  CHECK(d.level(0.0, 0.0) > 0.0);
  CHECK(d.level(1.5, 0.0) < 0.0);
}

TEST_CASE("rectangle at h=1/4 has exactly the nine hand-counted unknowns") {
  const Grid2D g = build_grid(strip("0.5"), 0.25);
  CHECK(g.n_unknowns == 9);
  const auto pts = unknown_points(g);
  for (double x : {0.25, 0.5, 0.75})
    for (double y : {-0.25, 0.0, 0.25}) CHECK(pts.count({x, y}) == 1);
  // wall-aligned lattices need no snapping: every boundary leg runs the
  // full spacing and ends exactly on a wall
  int snapped = 0;
  for (const NodeClass c : g.cls) snapped += c == NodeClass::Snapped;
  CHECK(snapped == 0);
  for (int u = 0; u < g.n_unknowns; ++u) {
    for (int dir = 0; dir < 4; ++dir) {
      if (g.nbr[u][dir] != -1) continue;
      CHECK(g.leg[u][dir].alpha == 1.0);
      const double bx = g.leg[u][dir].bx;
      const double by = g.leg[u][dir].by;
      CHECK((bx == 0.0 || bx == 1.0 || std::abs(by) == 0.5));
    }
  }
  CHECK(g.unknown[g.id(0, g.axis_row)] == -1);
}

TEST_CASE("coarse unit disk keeps the full dihedral symmetry of the lattice") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 0.5);
  const auto pts = unknown_points(g);
  CHECK(!pts.empty());
  for (const auto& p : pts) {
    CHECK(pts.count({-p[0], p[1]}) == 1);
    CHECK(pts.count({p[0], -p[1]}) == 1);
    CHECK(pts.count({p[1], p[0]}) == 1);
  }
}

TEST_CASE("interior node count tracks the domain area") {
  const Grid2D g = build_grid(strip("0.2+0.3*x"), 0.01);
  const double area = 0.7;  // 2 * integral of f
  const double expected = area / (0.01 * 0.01);
  CHECK(std::abs(g.n_unknowns - expected) <= 0.02 * expected);
}

TEST_CASE("axis candidates list the y=0 unknowns in x order") {
  const Grid2D coarse = build_grid(strip("0.5"), 0.25);
  const auto cands = axis_candidates(coarse);
  REQUIRE(cands.size() == 3);
  CHECK(cands[0][0] == doctest::Approx(0.25));
  CHECK(cands[1][0] == doctest::Approx(0.5));
  CHECK(cands[2][0] == doctest::Approx(0.75));
  for (const auto& c : cands) CHECK(c[1] == 0.0);

  const auto nine = axis_candidates(build_grid(strip("0.2+0.3*x"), 0.1));
  REQUIRE(nine.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(nine[i][0] == doctest::Approx(0.1 * (i + 1)));

  // off-axis disk: lattice rows never meet y=0
  const Grid2D off = build_grid(DomainSpec::disk(0.0, 10.0, 0.4), 0.125);
  CHECK_THROWS_AS(axis_unknowns(off), ValidationError);
}

TEST_CASE("boundary legs are fractional and interior nodes are fully linked") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 16);
  int interior = 0, near = 0;
  for (int u = 0; u < g.n_unknowns; ++u) {
    const int v = g.node[u];
    bool all = true;
    for (int d = 0; d < 4; ++d) {
      if (g.nbr[u][d] >= 0) continue;
      all = false;
      const BoundaryLeg& leg = g.leg[u][d];
      CHECK(leg.alpha > 0.0);
      CHECK(leg.alpha <= 1.0);
      // the leg endpoint sits on the circle
      CHECK(std::hypot(leg.bx, leg.by) == doctest::Approx(1.0).epsilon(1e-9));
    }
    if (all) {
      CHECK(g.cls[v] == NodeClass::Interior);
      ++interior;
    } else {
      CHECK(g.cls[v] == NodeClass::NearBoundary);
      ++near;
    }
  }
  CHECK(interior > 0);
  CHECK(near > 0);
}

TEST_CASE("nodes landing on the boundary are snapped") {
  // radius 0.375 at h=1/8: the nodes (±0.375, 0), (0, ±0.375) lie exactly on the circle
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 0.375), 0.125);
  int snapped = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.cls[g.id(i, j)] == NodeClass::Snapped) {
        ++snapped;
        CHECK(std::abs(std::hypot(g.xc(i), g.yc(j)) - 0.375) <= 1e-7);
      }
  CHECK(snapped == 0);  // exact-boundary nodes are exterior (level = 0 is not inside)

  // pull the radius in by a hair so those nodes fall barely inside: they must snap
  const Grid2D g2 = build_grid(DomainSpec::disk(0.0, 0.0, 0.375 + 1e-9), 0.125);
  int snapped2 = 0;
  for (const NodeClass c : g2.cls) snapped2 += c == NodeClass::Snapped;
  CHECK(snapped2 == 4);
}

TEST_CASE("spacing validation") {
  const DomainSpec rect = strip("0.5");
  CHECK_THROWS_WITH_AS(build_grid(rect, 0.3), "1/h must be an integer in [2, 4096]",
                       ValidationError);
  CHECK_THROWS_WITH_AS(build_grid(rect, 1.0), "1/h must be an integer in [2, 4096]",
                       ValidationError);
  CHECK_THROWS_WITH_AS(build_grid(rect, 1.0 / 8192), "1/h must be an integer in [2, 4096]",
                       ValidationError);
  CHECK_THROWS_AS(build_grid(rect, -0.1), ValidationError);
  // representable spacings pass the integrality check
  CHECK_NOTHROW(build_grid(rect, 1.0 / 3.0));
  // a disk below the snap threshold turns its only interior node into a
  // boundary carrier, leaving nothing to solve for
  CHECK_THROWS_WITH_AS(build_grid(DomainSpec::disk(0.0, 0.0, 1e-9), 0.5),
                       "grid too coarse: domain contains no unknowns", ValidationError);
}

TEST_CASE("mirrored profiles produce mirrored masks") {
  const Grid2D a = build_grid(strip("0.2+0.3*x"), 1.0 / 16);
  const Grid2D b = build_grid(strip("0.2+0.3*(1-x)"), 1.0 / 16);
  REQUIRE(a.n_unknowns == b.n_unknowns);
  const auto pa = unknown_points(a);
  for (const auto& p : unknown_points(b)) {
    const double mx = 1.0 - p[0];
    bool found = false;
    for (const auto& q : pa)
      if (std::abs(q[0] - mx) < 1e-9 && std::abs(q[1] - p[1]) < 1e-9) {
        found = true;
        break;
      }
    CHECK(found);
  }
}

TEST_CASE("halving the spacing keeps every unknown of the coarse grid") {
  const DomainSpec spec = strip("0.2+0.3*x");
  const Grid2D coarse = build_grid(spec, 1.0 / 16);
  const Grid2D fine = build_grid(spec, 1.0 / 32);
  const auto fine_pts = unknown_points(fine);
  int missing = 0;
  for (const auto& p : unknown_points(coarse)) {
    bool found = false;
    for (const auto& q : fine_pts)
      if (std::abs(q[0] - p[0]) < 1e-9 && std::abs(q[1] - p[1]) < 1e-9) {
        found = true;
        break;
      }
    missing += !found;
  }
  CHECK(missing == 0);
}

TEST_CASE("grid csv lists every lattice node with its class") {
  const Grid2D g = build_grid(strip("0.5"), 0.25);
  std::ostringstream os;
  write_grid_csv(g, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "x,y,class");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == g.nx * g.ny);
}
