#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qclab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
double dist(Point a, Point b);

// Grid arms in stencil order: +x, -x, +y, -y.
enum Arm : int { arm_east = 0, arm_west = 1, arm_north = 2, arm_south = 3 };

inline constexpr std::array<std::array<int, 2>, 4> arm_step = {
    {{{1, 0}}, {{-1, 0}}, {{0, 1}}, {{0, -1}}}};

enum class Boundary : std::uint8_t { outer = 0, inner = 1 };

// Node classification on the embedding lattice. "hole" marks nodes carved
// out of a ring domain; they are exterior for the PDE but remembered so the
// extension-by-M field can be assembled on the outer grid.
enum class Region : std::uint8_t { exterior = 0, interior = 1, hole = 2 };

/// Uniform Cartesian grid with interior mask, labeled boundary components and
/// per-arm boundary-cut fractions for curved Dirichlet boundaries.
struct GridDomain {
  double ox = 0.0, oy = 0.0;  // position of node (0,0)
  double h = 0.0;
  int nx = 0, ny = 0;

  std::vector<Region> region;              // nx*ny
  std::vector<std::array<double, 4>> cut;  // per-arm fraction in (0,1]
  std::vector<std::array<std::uint8_t, 4>> cut_label;  // Boundary per cut arm

  // Exact discrete mirror symmetry, when the shape provides it:
  // node (i,j) mirrors to (mirror_ix - i, j) resp. (i, mirror_iy - j).
  bool sym_x = false, sym_y = false;
  int mirror_ix = 0, mirror_iy = 0;

  bool has_inner = false;
  std::string shape;
  std::map<std::string, double> params;

  int idx(int i, int j) const { return j * nx + i; }
  double x(int i) const { return ox + i * h; }
  double y(int j) const { return oy + j * h; }
  bool in_bounds(int i, int j) const {
    return i >= 0 && i < nx && j >= 0 && j < ny;
  }
  bool is_interior(int i, int j) const {
    return in_bounds(i, j) && region[idx(i, j)] == Region::interior;
  }

  int interior_count() const;

  /// Cell-based area with half-cell correction at boundary cuts. First order
  /// or better on smooth shapes.
  double cut_area() const;

  /// Connected components (8-connectivity) of the boundary-adjacent interior
  /// nodes. 1 for simply connected domains, 2 for rings.
  int boundary_component_count() const;

  /// Checks mask connectivity, cut-fraction ranges and declared symmetries.
  /// Throws std::runtime_error on violation.
  void validate() const;
};

struct SegmentSample {
  Point p, q;
  int n = 0;
  std::vector<Point> points;
};

/// n equally spaced collinear points from p to q, endpoints exact.
SegmentSample sample_segment(Point p, Point q, int n);

/// Convex hole profile for ring domains: unit-scale shape, translated to x0
/// and scaled by eps at build time.
struct HoleSpec {
  enum class Kind { disk, polygon } kind = Kind::disk;
  double radius = 1.0;               // disk
  std::vector<Point> vertices;       // polygon, CCW convex
};

/// Stadium {|y|<1, |x| < a + cap(y)} with circular caps cap(y)=sqrt(1-y^2).
GridDomain build_stadium(double a, double h);

GridDomain build_disk_domain(Point center, double radius, double h);

/// Axis-aligned rectangle (x0,x1)x(y0,y1); boundary lies on grid lines when
/// the sides are multiples of h. Used for separable oracles.
GridDomain build_rect_domain(double x0, double x1, double y0, double y1, double h);

/// Ring outer \ closure(x0 + eps*hole) on the same lattice as `outer`.
GridDomain build_ring_domain(const GridDomain& outer, Point x0, double eps,
                             const HoleSpec& hole, double h);

}  // namespace qclab
