#include "qclab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qclab {

double ScalarField::value_or_bc(int i, int j) const {
  if (!dom->in_bounds(i, j)) return bc_outer;
  const Region r = dom->region[dom->idx(i, j)];
  if (r == Region::interior) return v[dom->idx(i, j)];
  return r == Region::hole ? bc_inner : bc_outer;
}

double ScalarField::max_interior() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      if (dom->is_interior(i, j)) m = std::max(m, at(i, j));
  return m;
}

double ScalarField::min_interior() const {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      if (dom->is_interior(i, j)) m = std::min(m, at(i, j));
  return m;
}

double ScalarField::interp(double x, double y) const {
  const double fx = (x - dom->ox) / dom->h;
  const double fy = (y - dom->oy) / dom->h;
  int i = static_cast<int>(std::floor(fx));
  int j = static_cast<int>(std::floor(fy));
  i = std::clamp(i, 0, dom->nx - 2);
  j = std::clamp(j, 0, dom->ny - 2);
  const double tx = fx - i, ty = fy - j;
  const double v00 = value_or_bc(i, j), v10 = value_or_bc(i + 1, j);
  const double v01 = value_or_bc(i, j + 1), v11 = value_or_bc(i + 1, j + 1);
  return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) +
         ty * ((1.0 - tx) * v01 + tx * v11);
}

double linf_diff(const ScalarField& a, const ScalarField& b) {
  if (a.dom->nx != b.dom->nx || a.dom->ny != b.dom->ny)
    throw std::invalid_argument("linf_diff: fields live on different grids");
  double m = 0.0;
  for (int j = 0; j < a.dom->ny; ++j)
    for (int i = 0; i < a.dom->nx; ++i)
      if (a.dom->is_interior(i, j) && b.dom->is_interior(i, j))
        m = std::max(m, std::fabs(a.at(i, j) - b.at(i, j)));
  return m;
}

}  // namespace qclab
