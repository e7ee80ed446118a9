#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "capoint/cap1d.hpp"
#include "capoint/expr.hpp"
#include "capoint/sturm.hpp"
#include "doctest.h"

using namespace capoint;

namespace {

constexpr double kPi = std::numbers::pi;

ResistanceMap rmap(const std::string& src) {
  return ResistanceMap(CoefficientProfile::from_expr(parse(src)));
}

// linear interpolant of sampled data, for feeding eigenfunctions back in as u0
std::function<double(double)> interp(std::vector<double> xs, std::vector<double> ys) {
  return [xs = std::move(xs), ys = std::move(ys)](double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const std::size_t i = (it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + w * (ys[i + 1] - ys[i]);
  };
}

}  // namespace

TEST_CASE("phase trace hits the Dirichlet target at the known eigenvalue") {
  const ResistanceMap rm = rmap("1");
  const PruferTrace tr = prufer_shoot(rm, kPi * kPi);
  CHECK(tr.theta.front() == kPi / 2.0);
  CHECK(std::abs(tr.theta.back() + kPi / 2.0) <= 1e-8);
  CHECK(tr.t_zero == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(tr.total_time == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t i = 1; i < tr.theta.size(); ++i) CHECK(tr.theta[i] < tr.theta[i - 1]);
}

TEST_CASE("undershooting eigenvalues leave the phase above the target") {
  const ResistanceMap rm = rmap("1");
  CHECK(prufer_shoot(rm, kPi * kPi / 4.0).theta.back() > -kPi / 2.0);
  CHECK(prufer_shoot(rm, 1e-6).theta.back() > -kPi / 2.0);
  CHECK(prufer_shoot(rm, 1e-6).theta.back() > 0.0);
  CHECK_THROWS_AS(prufer_shoot(rm, -1.0), ValidationError);
  CHECK_THROWS_AS(prufer_shoot(rm, 1.0, 8), ValidationError);
}

TEST_CASE("principal eigenpair of the constant coefficient") {
  const EigenPair1D ep = principal_eigen(rmap("1"));
  CHECK(std::abs(ep.lambda - kPi * kPi) <= 1e-6 * kPi * kPi);
  CHECK(std::abs(ep.argmax_x - 0.5) <= 1e-6);
  CHECK(ep.k == 0);
  CHECK(ep.nodes.empty());
  REQUIRE(ep.u.size() == ep.x.size());
  CHECK(ep.u.front() == 0.0);
  CHECK(ep.u.back() == 0.0);
  CHECK(*std::max_element(ep.u.begin(), ep.u.end()) == 1.0);
  for (std::size_t i = 1; i + 1 < ep.u.size(); ++i) CHECK(ep.u[i] > 0.0);
  // samples track sin(pi x) after normalization
  for (std::size_t i = 0; i < ep.u.size(); i += 97)
    CHECK(ep.u[i] == doctest::Approx(std::sin(kPi * ep.x[i])).epsilon(1e-6));
}

TEST_CASE("shooting matches the independent finite-difference eigensolver") {
  for (const char* src : {"exp(x)", "1+5*x"}) {
    CAPTURE(src);
    const CoefficientProfile a = CoefficientProfile::from_expr(parse(src));
    const EigenPair1D shot = principal_eigen(ResistanceMap(a));
    const EigenPair1D fd = fd_eigen(a, 1 << 15, 0);
    CHECK(std::abs(shot.lambda - fd.lambda) <= 1e-4 * fd.lambda);
    CHECK(std::abs(shot.argmax_x - fd.argmax_x) <= 1e-4);
  }
}

TEST_CASE("finite-difference eigensolver hits the known spectrum and converges at second order") {
  const CoefficientProfile one = CoefficientProfile::from_expr(parse("1"));
  CHECK(std::abs(fd_eigen(one, 4096, 0).lambda - kPi * kPi) <= 1e-5 * kPi * kPi);
  CHECK(std::abs(fd_eigen(one, 4096, 1).lambda - 4.0 * kPi * kPi) <= 1e-4 * 4.0 * kPi * kPi);

  const CoefficientProfile lin = CoefficientProfile::from_expr(parse("1+x"));
  const double l1 = fd_eigen(lin, 2048, 0).lambda;
  const double l2 = fd_eigen(lin, 4096, 0).lambda;
  const double l3 = fd_eigen(lin, 8192, 0).lambda;
  const double ratio = (l1 - l2) / (l2 - l3);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("overtones carry the declared number of interior nodes") {
  const ResistanceMap one = rmap("1");
  const EigenPair1D e1 = kth_eigen(one, 1);
  CHECK(std::abs(e1.lambda - 4.0 * kPi * kPi) <= 1e-5 * 4.0 * kPi * kPi);
  REQUIRE(e1.nodes.size() == 1);
  CHECK(e1.nodes[0] == doctest::Approx(0.5).epsilon(1e-6));

  // |u| peaks of sin(2 pi x) sit at the quarter points
  double best_lo = 0.0, best_hi = 0.0, max_lo = -1.0, max_hi = -1.0;
  for (std::size_t i = 0; i < e1.u.size(); ++i) {
    const double v = std::abs(e1.u[i]);
    if (e1.x[i] < 0.5 && v > max_lo) {
      max_lo = v;
      best_lo = e1.x[i];
    }
    if (e1.x[i] > 0.5 && v > max_hi) {
      max_hi = v;
      best_hi = e1.x[i];
    }
  }
  CHECK(best_lo == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(best_hi == doctest::Approx(0.75).epsilon(1e-3));

  const EigenPair1D e2 = kth_eigen(one, 2);
  REQUIRE(e2.nodes.size() == 2);
  CHECK(e2.nodes[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(e2.nodes[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));

  CHECK(kth_eigen(rmap("exp(x)"), 1).nodes.size() == 1);
  CHECK_THROWS_AS(kth_eigen(one, 65), ValidationError);
}

TEST_CASE("sub-interval capacity points stay left of the in-interval peaks") {
  const auto checks1 = nodal_interval_check(rmap("1"), 1);
  REQUIRE(checks1.size() == 2);
  CHECK(checks1[0].x_left == 0.0);
  CHECK(checks1[0].x_right == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(checks1[1].x_left == checks1[0].x_right);
  CHECK(checks1[1].x_right == 1.0);
  // c_sub and m_sub live in interval-local [0,1] coordinates, so for a
  // constant coefficient both sit at the local midpoint on either interval
  for (const auto& c : checks1) {
    CHECK(c.pass);
    CHECK(c.c_sub == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(c.m_sub == doctest::Approx(0.5).epsilon(1e-4));
  }

  const auto checks_e = nodal_interval_check(rmap("exp(x)"), 1);
  REQUIRE(checks_e.size() == 2);
  for (const auto& c : checks_e) {
    CHECK(c.pass);
    CHECK(c.c_sub < c.m_sub);
  }

  const auto checks3 = nodal_interval_check(rmap("1+x"), 2);
  REQUIRE(checks3.size() == 3);
  for (const auto& c : checks3) {
    CHECK(c.pass);
    CHECK(c.c_sub < c.m_sub);
  }
}

TEST_CASE("phase witness is flat for constant coefficients and one-sided for rising ones") {
  const ComparisonWitness flat = comparison_witness(rmap("1"));
  REQUIRE(!flat.tau.empty());
  CHECK(flat.tau.front() == 0.0);
  // both fronts sample the interpolated phase at t_m, one with its sign
  // flipped, so they agree up to the zero-crossing interpolation error
  CHECK(flat.phi.front() == -flat.psi.front());
  CHECK(std::abs(flat.psi.front()) <= 1e-9);
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.tau.size(); ++i)
    worst = std::max(worst, std::abs(flat.phi[i] - flat.psi[i]));
  CHECK(worst <= 1e-9);
  CHECK(std::abs(flat.margin) <= 1e-9);

  for (const char* src : {"exp(x)", "1+5*x"}) {
    CAPTURE(src);
    const ComparisonWitness w = comparison_witness(rmap(src));
    CHECK(w.margin >= 0.0);
    CHECK(w.t_m >= 0.5 * w.total_time);
    CHECK(std::abs(w.t_m + w.tau_star - w.total_time) <= 1e-6);
    CHECK(w.end_residual <= 1e-8);
  }
}

TEST_CASE("profile check compares capacity point against the warm point") {
  const ProfileCheck flat = check_profile(rmap("1"));
  CHECK(flat.pass);
  CHECK(std::abs(flat.c - flat.m) <= 1e-6);

  const ProfileCheck rising = check_profile(rmap("1+2*x"));
  CHECK(rising.pass);
  CHECK(rising.c < rising.m);
  CHECK(rising.m - rising.c > 1e-6);
  CHECK(rising.c == doctest::Approx(capacity_point(rmap("1+2*x"))).epsilon(1e-10));
}

TEST_CASE("eigenvalue scales with the coefficient while the peak stays put") {
  const EigenPair1D base = principal_eigen(rmap("1+x"));
  const EigenPair1D scaled = principal_eigen(rmap("3*(1+x)"));
  CHECK(scaled.lambda == doctest::Approx(3.0 * base.lambda).epsilon(1e-8));
  CHECK(std::abs(scaled.argmax_x - base.argmax_x) <= 1e-8);
}

TEST_CASE("reflection mirrors the warm point") {
  const double m = principal_eigen(rmap("exp(x)")).argmax_x;
  const double mr = principal_eigen(rmap("exp(1-x)")).argmax_x;
  CHECK(std::abs(mr - (1.0 - m)) <= 1e-7);
}

TEST_CASE("heat flow drives a rough bump profile to the warm point") {
  const CoefficientProfile a = CoefficientProfile::from_expr(parse("exp(x)"));
  const double m = principal_eigen(ResistanceMap(a)).argmax_x;
  const auto u0 = [](double x) { return x * (1.0 - x) * (1.0 + 0.5 * std::sin(7.0 * kPi * x)); };
  // dt must be small enough that the trapezoidal step damps the rough
  // initial data's grid-frequency content well below the surviving mode
  const HeatTrajectory tr = heat_evolve(a, u0, 1.0, 1e-4, 1024);
  REQUIRE(!tr.samples.empty());
  CHECK(tr.cells == 1024);
  CHECK(tr.samples.front().time == 0.0);
  CHECK(std::abs(tr.samples.back().argmax_x - m) <= 2.0 / 1024.0);
  CHECK(tr.samples.back().max_value < tr.samples.front().max_value);
}

TEST_CASE("the principal mode decays in place at its own rate") {
  const CoefficientProfile a = CoefficientProfile::from_expr(parse("1+x"));
  const EigenPair1D ep = principal_eigen(ResistanceMap(a));
  const HeatTrajectory tr = heat_evolve(a, interp(ep.x, ep.u), 0.05, 5e-4, 2048);
  REQUIRE(tr.samples.size() > 60);
  for (const auto& s : tr.samples)
    CHECK(std::abs(s.argmax_x - tr.samples.front().argmax_x) <= 1.0 / 2048.0 + 1e-12);
  // fit the decay rate over the tail of the run
  const auto& mid = tr.samples[tr.samples.size() / 2];
  const auto& end = tr.samples.back();
  const double rate = std::log(end.max_value / mid.max_value) / (end.time - mid.time);
  CHECK(rate == doctest::Approx(-ep.lambda).epsilon(0.01));
}

TEST_CASE("heat evolution validates its inputs") {
  const CoefficientProfile a = CoefficientProfile::from_expr(parse("1"));
  const auto ok = [](double x) { return x * (1.0 - x); };
  CHECK_THROWS_AS(heat_evolve(a, ok, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(heat_evolve(a, ok, -1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(heat_evolve(a, [](double x) { return x - 0.5; }, 1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(heat_evolve(a, [](double) { return 0.0; }, 1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(heat_evolve(a, [](double) { return 1.0; }, 1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(heat_evolve(a, ok, 1.0, 0.01, 8), ValidationError);
}
