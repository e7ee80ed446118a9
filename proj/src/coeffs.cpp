#include "capoint/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "capoint/numerics.hpp"

namespace capoint {

struct CoefficientProfile::Impl {
  Expr expr;
  std::vector<std::array<double, 2>> knots;
  bool table = false;
  Monotone mono = Monotone::Unknown;
  double min_sampled = 0.0;
  int samples = 0;
};

namespace {

double table_eval(const std::vector<std::array<double, 2>>& knots, double x) {
  if (x <= knots.front()[0]) return knots.front()[1];
  if (x >= knots.back()[0]) return knots.back()[1];
  auto it = std::upper_bound(knots.begin(), knots.end(), x,
                             [](double v, const std::array<double, 2>& k) { return v < k[0]; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (x - lo[0]) / (hi[0] - lo[0]);
  return lo[1] + w * (hi[1] - lo[1]);
}

void validate_samples(CoefficientProfile::Impl& impl) {
  if (impl.samples < 1001)
    throw ValidationError("validation sample count must be at least 1001, got " +
                          std::to_string(impl.samples));
  const int m = impl.samples;
  double min_v = 0.0;
  double prev = 0.0;
  bool nondecreasing = true;
  for (int i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / (m - 1);
    const double v = impl.table ? table_eval(impl.knots, x) : impl.expr(x);
    if (!std::isfinite(v))
      throw ValidationError("coefficient not finite at x=" + num::format_num(x));
    if (!(v > 0.0)) throw ValidationError("coefficient nonpositive at x=" + num::format_num(x));
    if (i == 0) {
      min_v = v;
    } else {
      min_v = std::min(min_v, v);
      if (v < prev) nondecreasing = false;
    }
    prev = v;
  }
  impl.min_sampled = min_v;
  impl.mono = nondecreasing ? Monotone::Verified : Monotone::Violated;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

CoefficientProfile CoefficientProfile::from_expr(const Expr& a, int samples) {
  if (a.empty()) throw ValidationError("empty coefficient expression");
  auto impl = std::make_shared<Impl>();
  impl->expr = a;
  impl->table = false;
  impl->samples = samples;
  validate_samples(*impl);
  return CoefficientProfile(std::move(impl));
}

CoefficientProfile CoefficientProfile::from_table(std::vector<std::array<double, 2>> knots,
                                                  int samples) {
  if (knots.size() < 2) throw ValidationError("table needs at least two knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i][0] > knots[i - 1][0]))
      throw ValidationError("table x values must be strictly increasing (knot " +
                            std::to_string(i) + ")");
  }
  if (std::abs(knots.front()[0]) > 1e-12 || std::abs(knots.back()[0] - 1.0) > 1e-12)
    throw ValidationError("table must span x=0 to x=1");
  knots.front()[0] = 0.0;
  knots.back()[0] = 1.0;
  for (const auto& k : knots) {
    if (!std::isfinite(k[1]))
      throw ValidationError("coefficient not finite at x=" + num::format_num(k[0]));
    if (!(k[1] > 0.0))
      throw ValidationError("coefficient nonpositive at x=" + num::format_num(k[0]));
  }
  auto impl = std::make_shared<Impl>();
  impl->knots = std::move(knots);
  impl->table = true;
  impl->samples = samples;
  validate_samples(*impl);
  return CoefficientProfile(std::move(impl));
}

CoefficientProfile CoefficientProfile::load_table_csv(const std::string& path, int samples) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open table file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("table file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,a")
    throw ValidationError("table file '" + path + "' must start with header \"x,a\"");
  std::vector<std::array<double, 2>> knots;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    if (end == s || *end != ',')
      throw ValidationError("table file '" + path + "' line " + std::to_string(lineno) +
                            ": expected two comma-separated numbers");
    s = end + 1;
    const double a = std::strtod(s, &end);
    if (end == s || *end != '\0')
      throw ValidationError("table file '" + path + "' line " + std::to_string(lineno) +
                            ": expected two comma-separated numbers");
    knots.push_back({x, a});
  }
  if (knots.size() < 2)
    throw ValidationError("table file '" + path + "' needs at least two knots");
  return from_table(std::move(knots), samples);
}

double CoefficientProfile::operator()(double x) const {
  return impl_->table ? table_eval(impl_->knots, x) : impl_->expr(x);
}

Monotone CoefficientProfile::monotone() const { return impl_->mono; }
double CoefficientProfile::min_sampled() const { return impl_->min_sampled; }
int CoefficientProfile::validation_samples() const { return impl_->samples; }
bool CoefficientProfile::is_table() const { return impl_->table; }
const std::vector<std::array<double, 2>>& CoefficientProfile::knots() const {
  return impl_->knots;
}

CoefficientProfile random_monotone_profile(std::mt19937_64& rng) {
  const int nk = 5 + static_cast<int>(rng() % 5);
  std::vector<double> xs(nk);
  xs.front() = 0.0;
  xs.back() = 1.0;
  for (int i = 1; i + 1 < nk; ++i) xs[i] = 0.05 + 0.9 * uniform01(rng);
  std::sort(xs.begin(), xs.end());
  // keep knots separated so segment slopes stay tame
  for (int i = 1; i < nk; ++i) xs[i] = std::max(xs[i], xs[i - 1] + 0.02);
  const double rescale = 1.0 / xs.back();
  for (auto& x : xs) x *= rescale;

  const double base = 0.5 + 0.7 * uniform01(rng);
  const double rise = 0.3 + uniform01(rng);  // total increase >= 0.3
  std::vector<double> inc(nk - 1);
  double sum = 0.0;
  for (auto& d : inc) {
    d = uniform01(rng);
    sum += d;
  }
  std::vector<std::array<double, 2>> knots(nk);
  double v = base;
  knots[0] = {xs[0], v};
  for (int i = 1; i < nk; ++i) {
    v += rise * (sum > 0.0 ? inc[i - 1] / sum : 1.0 / (nk - 1));
    knots[i] = {xs[i], v};
  }
  return CoefficientProfile::from_table(std::move(knots));
}

ResistanceMap::ResistanceMap(CoefficientProfile profile, double tol)
    : profile_(std::move(profile)), tol_(tol), table_backend_(profile_.is_table()) {
  if (!(tol >= 1e-14 && tol <= 1e-2))
    throw ValidationError("quadrature tolerance must lie in [1e-14, 1e-2]");
  if (table_backend_) {
    const auto& knots = profile_.knots();
    grid_x_.resize(knots.size());
    cum_.resize(knots.size());
    cum_[0] = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) grid_x_[i] = knots[i][0];
    for (std::size_t i = 1; i < knots.size(); ++i)
      cum_[i] = cum_[i - 1] + segment_resistance(i - 1, knots[i][0]);
  } else {
    constexpr int ncells = 1024;
    grid_x_.resize(ncells + 1);
    cum_.resize(ncells + 1);
    for (int i = 0; i <= ncells; ++i) grid_x_[i] = static_cast<double>(i) / ncells;
    cum_[0] = 0.0;
    const double cell_tol = tol_ / (2.0 * ncells);
    const auto& a = profile_;
    for (int i = 0; i < ncells; ++i) {
      cum_[i + 1] = cum_[i] + num::adaptive_simpson([&a](double x) { return 1.0 / a(x); },
                                                    grid_x_[i], grid_x_[i + 1], cell_tol);
    }
  }
}

// Reciprocal integral from grid_x_[cell] to x (x inside the cell). Table cells
// integrate 1/(linear) in closed form; expression cells use quadrature.
double ResistanceMap::segment_resistance(std::size_t cell, double x) const {
  const double x0 = grid_x_[cell];
  if (x <= x0) return 0.0;
  if (table_backend_) {
    const auto& knots = profile_.knots();
    const double x1 = knots[cell + 1][0];
    const double a0 = knots[cell][1];
    const double a1 = knots[cell + 1][1];
    const double slope = (a1 - a0) / (x1 - x0);
    const double ax = a0 + slope * (x - x0);
    if (std::abs(a1 - a0) <= 1e-13 * (a0 + a1)) return (x - x0) / a0;
    return std::log(ax / a0) / slope;
  }
  const auto& a = profile_;
  const double cell_tol = tol_ / (2.0 * (grid_x_.size() - 1));
  return num::adaptive_simpson([&a](double t) { return 1.0 / a(t); }, x0, x, cell_tol);
}

double ResistanceMap::total() const { return cum_.back(); }

double ResistanceMap::resistance(double s) const {
  if (!(s >= -1e-12 && s <= 1.0 + 1e-12))
    throw ValidationError("resistance query outside [0,1]: s=" + num::format_num(s));
  s = std::clamp(s, 0.0, 1.0);
  auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), s);
  const std::size_t cell = std::min<std::size_t>(grid_x_.size() - 2, it == grid_x_.begin()
                                                                         ? 0
                                                                         : (it - grid_x_.begin()) - 1);
  return cum_[cell] + segment_resistance(cell, s);
}

double ResistanceMap::inverse_resistance(double t) const {
  const double total_r = total();
  const double slack = 1e-12 * std::max(1.0, total_r);
  if (!(t >= -slack && t <= total_r + slack))
    throw ValidationError("inverse resistance query outside [0, R(1)]: t=" +
                          num::format_num(t));
  t = std::clamp(t, 0.0, total_r);
  auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
  const std::size_t cell =
      std::min<std::size_t>(cum_.size() - 2, it == cum_.begin() ? 0 : (it - cum_.begin()) - 1);
  const double t_rem = t - cum_[cell];
  const double xa = grid_x_[cell];
  const double xb = grid_x_[cell + 1];

  if (table_backend_) {
    const auto& knots = profile_.knots();
    const double a0 = knots[cell][1];
    const double a1 = knots[cell + 1][1];
    if (std::abs(a1 - a0) <= 1e-13 * (a0 + a1)) return std::min(xb, xa + a0 * t_rem);
    const double slope = (a1 - a0) / (xb - xa);
    const double x = xa + a0 * std::expm1(t_rem * slope) / slope;
    return std::clamp(x, xa, xb);
  }

  // safeguarded Newton on g(x) = R(x) - t, using g'(x) = 1/a(x)
  double lo = xa, hi = xb;
  double x = 0.5 * (lo + hi);
  for (int it2 = 0; it2 < 100; ++it2) {
    const double g = segment_resistance(cell, x) - t_rem;
    if (std::abs(g) <= 5.0 * tol_) return x;
    if (g < 0.0)
      lo = x;
    else
      hi = x;
    double xn = x - g * profile_(x);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x) return x;
    x = xn;
  }
  throw NumericalError("inverse resistance iteration did not converge");
}

}  // namespace capoint
