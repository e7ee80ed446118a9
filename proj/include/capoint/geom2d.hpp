#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "capoint/coeffs.hpp"
#include "capoint/expr.hpp"

namespace capoint {

// Planar domain: either a symmetric strip {0 < x < 1, |y| < f(x)} bounded by
// a positive halfwidth profile f, or a disk given by center and radius.
class DomainSpec {
 public:
  enum class Kind { Profile, Disk };

  // Validates f > 0 on `samples` uniform points of [0,1].
  static DomainSpec profile_strip(const Expr& f, int samples = 2001);
  static DomainSpec disk(double cx, double cy, double radius);

  Kind kind() const { return kind_; }
  const Expr& halfwidth() const { return f_; }
  Monotone halfwidth_monotone() const { return mono_; }
  double center_x() const { return cx_; }
  double center_y() const { return cy_; }
  double radius() const { return radius_; }
  double max_halfwidth() const { return max_halfwidth_; }

  // Signed inboard indicator: positive strictly inside the domain.
  double level(double x, double y) const;

  // True when a boundary point of a profile strip lies on a vertical side
  // wall x=0 or x=1 rather than on the curved top/bottom.
  bool on_side_wall(double bx, double by) const;

  std::string describe() const;

 private:
  DomainSpec() = default;
  Kind kind_ = Kind::Disk;
  Expr f_;
  Monotone mono_ = Monotone::Unknown;
  double cx_ = 0.0, cy_ = 0.0, radius_ = 0.0;
  double max_halfwidth_ = 0.0;
};

enum class NodeClass : unsigned char { Exterior, Interior, NearBoundary, Snapped };

// Where a lattice edge leaves the domain: fractional length alpha in (0,1]
// and the boundary point it reaches.
struct BoundaryLeg {
  double alpha = 1.0;
  double bx = 0.0;
  double by = 0.0;
};

// Lattice directions in the fixed order +x, -x, +y, -y.
inline constexpr int kDirX[4] = {1, -1, 0, 0};
inline constexpr int kDirY[4] = {0, 0, 1, -1};

// Uniform lattice restricted to a domain. Unknowns are the strictly interior
// nodes; nodes within 1e-6*h of the boundary are snapped onto it and act as
// boundary-value carriers.
struct Grid2D {
  DomainSpec spec = DomainSpec::disk(0.0, 0.0, 1.0);
  double h = 0.0;
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0;

  std::vector<NodeClass> cls;                 // per node, nx*ny
  std::vector<int> unknown;                   // node id -> unknown index or -1
  std::vector<int> node;                      // unknown index -> node id
  std::vector<std::array<int, 4>> nbr;        // unknown -> neighbor unknown or -1
  std::vector<std::array<BoundaryLeg, 4>> leg;  // used where nbr is -1
  int n_unknowns = 0;
  int axis_row = -1;  // row index with y = 0, or -1

  int id(int i, int j) const { return j * nx + i; }
  double xc(int i) const { return x0 + i * h; }
  double yc(int j) const { return y0 + j * h; }
};

// Builds the lattice at spacing h (1/h must be an integer in [2, 4096]).
// Boundary crossings are located by bisection to 1e-12.
Grid2D build_grid(const DomainSpec& spec, double h);

// Unknown indices on the y=0 row, ordered by x. Throws ValidationError when
// the lattice has no y=0 row or the row carries no unknowns.
std::vector<int> axis_unknowns(const Grid2D& g);

// Candidate points (x, 0) corresponding to axis_unknowns.
std::vector<std::array<double, 2>> axis_candidates(const Grid2D& g);

// Emits "x,y,class" rows for every lattice node.
void write_grid_csv(const Grid2D& g, std::ostream& out);

}  // namespace capoint
