#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "capoint/errors.hpp"
#include "capoint/expr.hpp"
#include "capoint/field2d.hpp"
#include "capoint/geom2d.hpp"
#include "doctest.h"

using namespace capoint;

namespace {

constexpr double kPi = std::numbers::pi;

DomainSpec strip(const std::string& f) { return DomainSpec::profile_strip(parse(f)); }

double max_err_vs(const Grid2D& g, const ScalarField2D& f,
                  const std::function<double(double, double)>& exact) {
  double worst = 0.0;
  for (int u = 0; u < g.n_unknowns; ++u) {
    const int v = g.node[u];
    worst = std::max(worst, std::abs(f.values[u] - exact(g.xc(v % g.nx), g.yc(v / g.nx))));
  }
  return worst;
}

}  // namespace

TEST_CASE("constant and linear boundary data are reproduced to solver accuracy") {
  // constants and linears are in the stencil's null space, so the only
  // error left is iteration error: relative residual 1e-10 times a
  // condition number of order 1/h^2 puts the value error near 1e-7
  for (const auto& spec : {strip("0.2+0.3*x"), DomainSpec::disk(0.0, 0.0, 1.0)}) {
    const Grid2D g = build_grid(spec, 1.0 / 32);
    const ScalarField2D ones = solve_dirichlet(g, [](double, double) { return 1.0; });
    CHECK(max_err_vs(g, ones, [](double, double) { return 1.0; }) <= 1e-6);
    const ScalarField2D lin = solve_dirichlet(g, [](double x, double) { return x; });
    CHECK(max_err_vs(g, lin, [](double x, double) { return x; }) <= 1e-6);
    CHECK(lin.stats.max_principle_violation <= 1e-10);
    CHECK((lin.stats.method == "cg" || lin.stats.method == "sor"));
  }
}

TEST_CASE("quadratic harmonic data is exact and quartic data converges at second order") {
  const DomainSpec disk = DomainSpec::disk(0.0, 0.0, 1.0);
  // x^2 - y^2 lies in the null space of the corrected stencil: only solver
  // noise remains, so it cannot drive a convergence-ratio estimate
  const auto saddle = [](double x, double y) { return x * x - y * y; };
  const Grid2D g32 = build_grid(disk, 1.0 / 32);
  CHECK(max_err_vs(g32, solve_dirichlet(g32, saddle), saddle) <= 1e-7);

  const auto quartic = [](double x, double y) {
    return x * x * x * x - 6.0 * x * x * y * y + y * y * y * y;  // Re((x+iy)^4)
  };
  const Grid2D g16 = build_grid(disk, 1.0 / 16);
  const Grid2D g64 = build_grid(disk, 1.0 / 64);
  const double e16 = max_err_vs(g16, solve_dirichlet(g16, quartic), quartic);
  const double e32 = max_err_vs(g32, solve_dirichlet(g32, quartic), quartic);
  const double e64 = max_err_vs(g64, solve_dirichlet(g64, quartic), quartic);
  CHECK(e16 / e32 > 2.5);
  CHECK(e32 / e64 > 2.5);
  CHECK(e16 / e32 < 8.0);
  CHECK(e32 / e64 < 8.0);
}

TEST_CASE("the discrete maximum principle holds on every solve") {
  const auto osc = [](double x, double y) { return std::sin(3.0 * x) * std::cos(2.0 * y); };
  for (const auto& spec : {strip("0.3+0.2*x"), DomainSpec::disk(0.0, 0.0, 1.0)}) {
    const Grid2D g = build_grid(spec, 1.0 / 32);
    const ScalarField2D f = solve_dirichlet(g, osc);
    CHECK(f.stats.max_principle_violation <= 1e-10);
    CHECK(f.stats.rel_residual <= 1e-10);
  }
}

TEST_CASE("probe values on the unit disk follow the image-charge closed form") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 64);
  CHECK(std::abs(robin_value(g, 0.0, 0.0) - 0.0) <= 1e-3);
  CHECK(std::abs(robin_value(g, 0.5, 0.0) - std::log(0.75)) <= 1e-2);

  const Grid2D fine = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 128);
  for (double p : {0.0, 0.25, 0.5}) {
    CAPTURE(p);
    CHECK(std::abs(robin_value(fine, p, 0.0) - std::log(1.0 - p * p)) <= 5e-3);
  }
}

TEST_CASE("probe placement is validated") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 32);
  CHECK_THROWS_AS(robin_value(g, 2.0, 0.0), ValidationError);
  CHECK_THROWS_WITH_AS(robin_value(g, 0.999, 0.0),
                       "probe point must be at least 2h from the boundary", ValidationError);
}

TEST_CASE("mirror symmetry of probe values on the rectangle") {
  const Grid2D g = build_grid(strip("0.5"), 1.0 / 32);
  const double a = robin_value(g, 0.375, 0.0);
  const double b = robin_value(g, 0.625, 0.0);
  CHECK(std::abs(a - b) <= 1e-8);
}

TEST_CASE("harmonic center lands on the symmetry point") {
  const Grid2D rect = build_grid(strip("0.5"), 1.0 / 16);
  const RobinSweep rs = harmonic_center(rect);
  CHECK(std::abs(rs.refined_x - 0.5) <= 2.0 / 16);
  CHECK(rs.refined_y == 0.0);
  REQUIRE(rs.argmax_index >= 0);
  REQUIRE(rs.candidates.size() == rs.values.size());
  // candidates on the axis, ordered by x
  for (std::size_t i = 1; i < rs.candidates.size(); ++i)
    CHECK(rs.candidates[i][0] > rs.candidates[i - 1][0]);

  const Grid2D disk = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 32);
  const RobinSweep ds = harmonic_center(disk);
  CHECK(std::hypot(ds.refined_x, ds.refined_y) <= 2.0 / 32);
}

TEST_CASE("principal eigenpair matches separation of variables on the unit square") {
  const Grid2D g = build_grid(strip("0.5"), 1.0 / 64);
  const EigenPair2D ep = principal_eigen2d(g, BCMode::Dirichlet);
  CHECK(std::abs(ep.lambda - 2.0 * kPi * kPi) <= 0.01 * 2.0 * kPi * kPi);
  CHECK(std::abs(ep.m_x - 0.5) <= 2.0 / 64);
  CHECK(std::abs(ep.m_y - 0.0) <= 2.0 / 64);
  double vmax = 0.0;
  for (double v : ep.values) {
    CHECK(v > 0.0);
    vmax = std::max(vmax, v);
  }
  CHECK(vmax == 1.0);
}

TEST_CASE("eigenvalue error on square and disk shrinks by at least 3x per halving") {
  const double square_exact = 2.0 * kPi * kPi;
  std::vector<double> se;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const Grid2D g = build_grid(strip("0.5"), h);
    se.push_back(std::abs(principal_eigen2d(g, BCMode::Dirichlet).lambda - square_exact));
  }
  CHECK(se[0] / se[1] >= 3.0);
  CHECK(se[1] / se[2] >= 3.0);

  const double disk_exact = 5.783185962946785;  // square of the first Bessel J0 zero
  std::vector<double> de;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), h);
    de.push_back(std::abs(principal_eigen2d(g, BCMode::Dirichlet).lambda - disk_exact));
  }
  CHECK(de[0] / de[1] >= 3.0);
  CHECK(de[1] / de[2] >= 3.0);
}

TEST_CASE("reflecting walls on a thin rectangle reduce the spectrum to one dimension") {
  const Grid2D g = build_grid(strip("0.1"), 1.0 / 64);
  const EigenPair2D ep = principal_eigen2d(g, BCMode::Mixed);
  CHECK(std::abs(ep.lambda - kPi * kPi) <= 0.02 * kPi * kPi);
  CHECK(std::abs(ep.m_x - 0.5) <= 2.0 / 64);
  CHECK_THROWS_WITH_AS(principal_eigen2d(build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 16),
                                         BCMode::Mixed),
                       "mixed boundary mode requires a profile-strip domain", ValidationError);
}

TEST_CASE("mirrored domains mirror both located points") {
  const Grid2D a = build_grid(strip("0.2+0.3*x"), 1.0 / 32);
  const Grid2D b = build_grid(strip("0.2+0.3*(1-x)"), 1.0 / 32);
  const double ca = harmonic_center(a).refined_x;
  const double cb = harmonic_center(b).refined_x;
  CHECK(std::abs(cb - (1.0 - ca)) <= 2.0 / 32);
  const double ma = principal_eigen2d(a, BCMode::Dirichlet).m_x;
  const double mb = principal_eigen2d(b, BCMode::Dirichlet).m_x;
  CHECK(std::abs(mb - (1.0 - ma)) <= 2.0 / 32);
}

TEST_CASE("condenser flux approaches the logarithmic capacity asymptotic") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 128);
  const FluxProbeResult fr = flux_probe(g, BCMode::Dirichlet, 0.0, 0.0, 0.05);
  const double v0 = 0.0;  // probe value at the disk center
  CHECK(std::abs(fr.flux * (std::log(1.0 / 0.05) + v0) / (2.0 * kPi) - 1.0) <= 0.05);
  CHECK(fr.contour_gap_rel <= 1e-6);
  CHECK(fr.mask_nodes > 0);
  CHECK(fr.effective_radius == doctest::Approx(0.05).epsilon(0.15));
}

TEST_CASE("flux is symmetric across the rectangle midline") {
  const Grid2D g = build_grid(strip("0.5"), 1.0 / 32);
  const double fa = flux_probe(g, BCMode::Dirichlet, 0.375, 0.0, 0.125).flux;
  const double fb = flux_probe(g, BCMode::Dirichlet, 0.625, 0.0, 0.125).flux;
  CHECK(std::abs(fa - fb) <= 1e-6 * fa);
}

TEST_CASE("flux probe placement is validated") {
  const Grid2D g = build_grid(DomainSpec::disk(0.0, 0.0, 1.0), 1.0 / 32);
  CHECK_THROWS_WITH_AS(flux_probe(g, BCMode::Dirichlet, 0.0, 0.0, 0.05),
                       "probe radius must be at least 3h", ValidationError);
  CHECK_THROWS_AS(flux_probe(g, BCMode::Dirichlet, 0.8, 0.0, 0.2), ValidationError);
  CHECK_THROWS_AS(flux_probe(g, BCMode::Dirichlet, 3.0, 0.0, 0.2), ValidationError);
}

TEST_CASE("experiment on the symmetric rectangle stays at the midline and unresolved") {
  const ExperimentReport rep = open_problem_experiment(
      strip("0.5"), BCMode::Dirichlet, {1.0 / 16, 1.0 / 32, 1.0 / 64});
  REQUIRE(rep.levels.size() == 3);
  for (const auto& lev : rep.levels) {
    CHECK(std::abs(lev.c_x - lev.m_x) <= 2.0 * lev.h);
    CHECK(lev.gap == std::abs(lev.m_x - lev.c_x));
  }
  CHECK(rep.status == "unresolved");
  CHECK(rep.bc == "dirichlet");
  CHECK(rep.order_c > 0.0);
}

TEST_CASE("experiment level lists are validated") {
  const DomainSpec spec = strip("0.5");
  CHECK_THROWS_WITH_AS(
      open_problem_experiment(spec, BCMode::Dirichlet, {1.0 / 16, 1.0 / 32}),
      "experiment needs between 3 and 6 refinement levels", ValidationError);
  CHECK_THROWS_WITH_AS(
      open_problem_experiment(spec, BCMode::Dirichlet, {1.0 / 16, 1.0 / 24, 1.0 / 32}),
      "experiment levels must halve the spacing", ValidationError);
  CHECK_THROWS_AS(open_problem_experiment(
                      spec, BCMode::Dirichlet,
                      {0.5, 0.25, 0.125, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}),
                  ValidationError);
}

TEST_CASE("interior distance to the boundary") {
  CHECK(boundary_distance(DomainSpec::disk(0.0, 0.0, 1.0), 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(boundary_distance(DomainSpec::disk(0.0, 0.0, 1.0), 0.5, 0.0) == doctest::Approx(0.5));
  const DomainSpec rect = strip("0.5");
  CHECK(boundary_distance(rect, 0.5, 0.0) == doctest::Approx(0.5));
  CHECK(boundary_distance(rect, 0.1, 0.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(boundary_distance(rect, -0.5, 0.0), ValidationError);
}
