#pragma once

#include <memory>

#include "qclab/cutoff.hpp"
#include "qclab/elliptic.hpp"
#include "qclab/field.hpp"

namespace qclab {

/// Link-based discretization of the Dirichlet energy
///   I(u) = 1/2 int |grad u|^2 - int u
/// with zero boundary data: interior links contribute (u_Q - u_P)^2 / 2 and
/// boundary-cut arms u_P^2 / (2 t). Its exact gradient is -h^2 (Lap u + 1)
/// with the symmetric cut-arm Laplacian below, which keeps the descent loop
/// consistent: accepted steps decrease the exact discrete objective.
struct VariationalScheme {
  std::shared_ptr<const GridDomain> dom;
  std::vector<int> rows, row_of;
  std::vector<int> nE, nW, nN, nS;     // neighbor row or -1
  std::vector<double> wE, wW, wN, wS;  // 1 on interior arms, 1/t on cut arms
  std::vector<double> diag;            // (wE+wW+wN+wS)/h^2, positive
  double h = 0.0;

  explicit VariationalScheme(std::shared_ptr<const GridDomain> d);
  int nrows() const { return static_cast<int>(rows.size()); }
  void laplacian(const std::vector<double>& u, std::vector<double>& out) const;
  double energy(const std::vector<double>& u) const;
  double cell() const { return h * h; }
};

struct VarminOptions {
  double tol = 1e-7;       // Euler-Lagrange residual, infinity norm
  int max_steps = 400000;
  double constraint_tol = 1e-10;
  bool semi_implicit = false;
  double tau_semi = 0.5;
  LinearOptions linear;
};

struct VariationalResult {
  ScalarField u;        // the constrained minimizer u_a
  ScalarField torsion;  // v_a in the same scheme, for the comparison checks
  double mu = 0.0;      // Lagrange multiplier
  double energy = 0.0;
  double constraint_residual = 0.0;
  double el_residual = 0.0;
  double t_scale = 0.0;  // initial scaling factor t_a
  int iterations = 0;
  bool converged = false;
  bool energy_monotone = true;
};

/// Mass of the constraint at scale t: h^2 sum g(t u).
double constraint_integral(const ScalarField& u, const CutoffFunction& g);

/// The scaling t with int g(t v) = 1, located by bisection. Requires v > 0
/// somewhere and a domain of area > 1; throws when no scale can reach mass 1.
double constraint_scale(const ScalarField& v, const CutoffFunction& g);

/// Minimizes I over { int g(u) = 1 } by projected gradient descent with
/// tangent-space multiplier and scalar constraint restoration, initialized at
/// t_a v_a. Throws when the constraint gradient vanishes at an iterate.
VariationalResult constrained_minimize(std::shared_ptr<const GridDomain> dom,
                                       const CutoffFunction& g,
                                       const VarminOptions& opts = {});

struct BoundsReport {
  bool mu_positive = false;
  bool torsion_below = false;     // v < u at every interior node
  bool below_ceiling = false;     // u < (1 - y^2)/2 + 2
  bool max_above_one = false;
  bool constraint_ok = false;     // |int g(u) - 1| <= 1e-6
  bool positive = false;          // u > 0 at interior nodes
  bool symmetric = false;         // even in x and y to 1e-8
  bool monotone = false;          // nonincreasing along rays off the axes
  double min_gap_torsion = 0.0;
  double worst_ceiling_margin = 0.0;
  double asym_x = 0.0, asym_y = 0.0;
  double monotone_violation = 0.0;
  double multiplier_refit_error = 0.0;  // least-squares mu vs reported mu

  bool all() const {
    return mu_positive && torsion_below && below_ceiling && max_above_one &&
           constraint_ok && positive && symmetric && monotone;
  }
};

BoundsReport verify_solution_bounds(const VariationalResult& res,
                                    const CutoffFunction& g);

}  // namespace qclab
