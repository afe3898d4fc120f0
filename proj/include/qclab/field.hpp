#pragma once

#include <memory>
#include <vector>

#include "qclab/geometry.hpp"

namespace qclab {

/// Nodal values over the interior of a GridDomain, plus the Dirichlet data per
/// boundary component. Values at non-interior lattice nodes are not owned by
/// the field; accessors substitute the boundary data there.
struct ScalarField {
  std::shared_ptr<const GridDomain> dom;
  std::vector<double> v;  // nx*ny, meaningful on interior nodes
  double bc_outer = 0.0;
  double bc_inner = 0.0;

  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const GridDomain> d, double fill = 0.0)
      : dom(std::move(d)), v(dom->nx * dom->ny, fill) {}

  double& at(int i, int j) { return v[dom->idx(i, j)]; }
  double at(int i, int j) const { return v[dom->idx(i, j)]; }

  /// Value with boundary data substituted outside the interior.
  double value_or_bc(int i, int j) const;

  double max_interior() const;
  double min_interior() const;

  /// Bilinear interpolation; lattice nodes outside the interior contribute
  /// their boundary-component value.
  double interp(double x, double y) const;
};

double linf_diff(const ScalarField& a, const ScalarField& b);

}  // namespace qclab
