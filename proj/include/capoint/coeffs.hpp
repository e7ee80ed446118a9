#pragma once

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "capoint/expr.hpp"

namespace capoint {

enum class Monotone { Verified, Violated, Unknown };

// Positive coefficient a(x) on [0,1], backed by either an expression or a
// piecewise-linear table. Factories validate positivity on a uniform sample
// grid of `samples` points (>= 1001) and record sampled monotonicity.
class CoefficientProfile {
 public:
  static constexpr int kDefaultSamples = 2001;

  static CoefficientProfile from_expr(const Expr& a, int samples = kDefaultSamples);
  // Knots (x_i, a_i) with x strictly increasing from 0 to 1.
  static CoefficientProfile from_table(std::vector<std::array<double, 2>> knots,
                                       int samples = kDefaultSamples);
  // CSV file with header "x,a".
  static CoefficientProfile load_table_csv(const std::string& path,
                                           int samples = kDefaultSamples);

  double operator()(double x) const;

  Monotone monotone() const;
  double min_sampled() const;
  int validation_samples() const;
  bool is_table() const;
  // Table knots; empty for expression-backed profiles.
  const std::vector<std::array<double, 2>>& knots() const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
  explicit CoefficientProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

// Deterministic random nondecreasing table profile (piecewise linear, 5-9
// knots, values in [0.5, 2.5]); used by sweep drivers and tests.
CoefficientProfile random_monotone_profile(std::mt19937_64& rng);

// Cumulative reciprocal map R(s) = integral of 1/a over [0, s] and its
// inverse. Expression-backed profiles are integrated by adaptive quadrature
// to absolute tolerance `tol`; table profiles use per-segment closed forms.
class ResistanceMap {
 public:
  explicit ResistanceMap(CoefficientProfile profile, double tol = 1e-10);

  double total() const;  // R(1)

  // R(s) for s in [0,1]; absolute error at most tol.
  double resistance(double s) const;

  // x with R(x) = t, for t in [0, total()]; satisfies |R(x) - t| <= 10*tol.
  double inverse_resistance(double t) const;

  double tol() const { return tol_; }
  const CoefficientProfile& profile() const { return profile_; }

 private:
  CoefficientProfile profile_;
  double tol_;
  bool table_backend_;
  // expression backend: cumulative values on a uniform cell grid
  // table backend: exact cumulative values at the knots
  std::vector<double> grid_x_;
  std::vector<double> cum_;

  double segment_resistance(std::size_t cell, double x) const;
};

}  // namespace capoint
