#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qclab {

/// Monotone transition profile g with g=0 on (-inf,1], g=1 on [2,+inf) and
/// g' >= 0 everywhere. Two variants:
///   - smoothstep: quintic polynomial step on [1,2], C^2 across the junctions;
///   - oscillatory: g' proportional to a compactly supported C-infinity bump
///     whose second derivative changes sign infinitely often near 1+.
class CutoffFunction {
 public:
  enum class Variant { smoothstep, oscillatory };

  static CutoffFunction smoothstep();
  static CutoffFunction oscillatory();
  static CutoffFunction from_name(const std::string& name);

  double g(double s) const;
  double dg(double s) const;
  std::pair<double, double> eval(double s) const { return {g(s), dg(s)}; }

  Variant variant() const { return variant_; }
  /// Normalization of the oscillatory density (1/integral of theta over (1,2)).
  double kappa() const { return kappa_; }

 private:
  CutoffFunction() = default;

  Variant variant_ = Variant::smoothstep;
  double kappa_ = 0.0;
  // cumulative integral of theta on a uniform grid over [1,2], oscillatory only
  std::vector<double> cum_;
};

/// The oscillatory transition density on (1,2); zero outside.
double oscillatory_theta(double s);

}  // namespace qclab
