#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qclab/field.hpp"
#include "qclab/geometry.hpp"

namespace qclab {

/// Coefficients of the operator L = div(A grad) + b·grad with A symmetric and
/// uniformly elliptic. Entries are constants unless a spatial override is set.
struct CoefficientField {
  double a11c = 1.0, a22c = 1.0, a12c = 0.0;
  double bxc = 0.0, byc = 0.0;
  std::function<double(double, double)> a11f, a22f, a12f, bxf, byf;
  double beta = 1.0;  // declared ellipticity floor

  double a11(double x, double y) const { return a11f ? a11f(x, y) : a11c; }
  double a22(double x, double y) const { return a22f ? a22f(x, y) : a22c; }
  double a12(double x, double y) const { return a12f ? a12f(x, y) : a12c; }
  double bx(double x, double y) const { return bxf ? bxf(x, y) : bxc; }
  double by(double x, double y) const { return byf ? byf(x, y) : byc; }

  bool has_drift() const {
    return bxf || byf || bxc != 0.0 || byc != 0.0;
  }
  bool has_cross() const { return a12f || a12c != 0.0; }
  bool diagonal_constant() const {
    return !a11f && !a22f && !has_cross();
  }

  static CoefficientField identity() { return {}; }
  static CoefficientField scaled_identity(double s) {
    CoefficientField c;
    c.a11c = c.a22c = s;
    c.beta = s;
    return c;
  }
};

/// Five-point (nine-point with cross terms) finite-difference operator with
/// Shortley-Weller unequal arms at boundary cuts. Stencil entries are stored
/// in fixed arm slots so that applying the operator on a mirror-symmetric
/// field is bitwise symmetric.
struct DiscreteOperator {
  std::shared_ptr<const GridDomain> dom;
  std::vector<int> rows;    // lattice index per row, row-major
  std::vector<int> row_of;  // lattice index -> row, or -1

  std::vector<double> c0, cE, cW, cN, cS;
  std::vector<int> nE, nW, nN, nS;          // neighbor row, -1 when cut
  std::vector<double> bE, bW, bN, bS;       // Dirichlet coefficient on cut arms
  std::vector<std::uint8_t> lE, lW, lN, lS; // boundary label on cut arms

  bool has_cross = false;
  std::vector<double> cNE, cNW, cSE, cSW;
  std::vector<int> nNE, nNW, nSE, nSW;
  std::vector<double> bNE, bNW, bSE, bSW;

  bool symmetric = false;  // b == 0 and A diagonal-constant
  bool has_cuts = false;   // any strict cut arm
  bool upwinded = false;
  double peclet = 0.0;

  int nrows() const { return static_cast<int>(rows.size()); }

  /// out = L u (boundary data excluded; see bc_contribution).
  void apply(const std::vector<double>& u, std::vector<double>& out) const;

  /// Per-row contribution of the Dirichlet data to L u.
  std::vector<double> bc_contribution(double bc_outer, double bc_inner) const;

  /// Same, with the Dirichlet trace sampled per cut arm.
  std::vector<double> bc_contribution(
      const std::function<double(int, int, int, double, Boundary)>& trace)
      const;

  std::vector<double> rx, ry;  // node coordinates per row

  std::vector<double> field_to_rows(const ScalarField& f) const;
  ScalarField rows_to_field(const std::vector<double>& u, double bc_outer = 0.0,
                            double bc_inner = 0.0) const;
};

/// Assembles L = div(A grad) + b·grad on the domain interior. The drift term
/// uses centered differences while the mesh Peclet number |b|h/(2 beta) stays
/// below 1 and one-sided differences (chosen so off-diagonal entries stay
/// nonnegative) otherwise. Throws on ellipticity violations and on cross
/// terms combined with boundary cuts.
DiscreteOperator assemble_operator(std::shared_ptr<const GridDomain> dom,
                                   const CoefficientField& coeffs);

struct LinearOptions {
  double tol = 1e-10;  // relative infinity-norm residual
  int max_iter = 50000;
};

struct LinearStats {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Solves (L + shift) u = rhs - (boundary contribution). Conjugate gradients
/// when the assembly is exactly symmetric, BiCGStab otherwise, both with
/// Jacobi preconditioning. Deterministic; optional warm start through u.
LinearStats solve_rows(const DiscreteOperator& op, double shift,
                       const std::vector<double>& rhs_rows,
                       std::vector<double>& u, const LinearOptions& opts);

struct LinearResult {
  ScalarField u;
  LinearStats stats;
};

LinearResult solve_linear_system(const DiscreteOperator& op,
                                 const ScalarField& rhs, double bc_outer,
                                 double bc_inner,
                                 const LinearOptions& opts = {});

/// L v = -1, zero boundary data.
LinearResult solve_torsion(std::shared_ptr<const GridDomain> dom,
                           const CoefficientField& coeffs,
                           const LinearOptions& opts = {});

struct EigenPair {
  double lambda1 = 0.0;
  ScalarField phi;  // positive, max = 1
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Principal Dirichlet eigenpair of -(L + zeta) by shifted inverse power
/// iteration. zeta may be empty (no zeroth-order term).
EigenPair principal_eigenpair(std::shared_ptr<const GridDomain> dom,
                              const CoefficientField& coeffs,
                              const std::function<double(double, double)>& zeta,
                              double tol = 1e-8, int max_iter = 400,
                              const LinearOptions& linear = {});

/// Nonlinearity f(x,s) with the structural data the solvers rely on.
struct NonlinearitySpec {
  std::string name;
  std::function<double(double, double, double)> f;     // (x, y, s)
  std::function<double(double, double)> zeta;          // lim f(x,s)/s at 0+
  double sup_bound = 0.0;                               // f <= sup_bound
  bool zero_at_zero = false;
  std::optional<double> decay_threshold;                // f <= 0 for s >= mu

  static NonlinearitySpec constant(double beta);
  /// f(s) = gamma s - s^p, p > 1.
  static NonlinearitySpec logistic(double gamma, double p);

  /// Sampled Lipschitz bound of s -> f(x,s) on [s_lo, s_hi], inflated by 1.5.
  double lipschitz_on(const GridDomain& dom, double s_lo, double s_hi) const;

  /// Sampled check that s -> f(x,s)/s is nonincreasing (log-spaced grid).
  bool ratio_nonincreasing(const GridDomain& dom, double s_hi) const;
};

/// Dirichlet trace of a candidate sub/supersolution at the cut point of a
/// boundary arm: (node i, j, arm, fraction t, boundary component).
using TraceFn =
    std::function<double(int i, int j, int arm, double t, Boundary which)>;

TraceFn constant_trace(double bc_outer, double bc_inner);

/// Quadratic extrapolation of a grid field along a cut arm; the source field
/// must be defined past the cut (e.g. a field on the un-carved outer domain).
TraceFn field_trace(const ScalarField& full, double scale);

struct FeasibilityReport {
  bool ok = false;
  double worst = 0.0;  // signed residual at the worst node
  int node_i = -1, node_j = -1;
};

/// Discrete subsolution check: L w + f(x,w) >= -tol at every interior node,
/// with the trace of w supplying Dirichlet data at cut arms.
FeasibilityReport check_subsolution(const DiscreteOperator& op,
                                    const NonlinearitySpec& f,
                                    const ScalarField& w, const TraceFn& trace,
                                    double tol);
FeasibilityReport check_supersolution(const DiscreteOperator& op,
                                      const NonlinearitySpec& f,
                                      const ScalarField& w, const TraceFn& trace,
                                      double tol);

struct MonotoneOptions {
  double tol = 1e-8;       // nonlinear residual, infinity norm
  int max_sweeps = 600;
  double tol_feas = 1e-6;  // sub/supersolution slack
  double order_slack = 1e-8;
  bool start_from_super = true;
  LinearOptions linear;
};

struct MonotoneResult {
  ScalarField u;
  int sweeps = 0;
  double residual = 0.0;
  double lipschitz = 0.0;
  bool converged = false;
};

/// Sub/supersolution monotone iteration for L u + f(x,u) = 0 with Dirichlet
/// data (bc_outer, bc_inner). Starts from the supersolution by default; the
/// iterates are verified to stay ordered each sweep and the bracket is
/// verified discretely before iterating. Throws std::runtime_error naming the
/// offending node when ordering fails.
MonotoneResult monotone_semilinear_solve(
    const DiscreteOperator& op, const NonlinearitySpec& f,
    const ScalarField& sub, const ScalarField& super, const TraceFn& sub_trace,
    const TraceFn& super_trace, double bc_outer, double bc_inner,
    const MonotoneOptions& opts = {});

/// || L u + f(x,u) ||_inf with the given Dirichlet data.
double nonlinear_residual(const DiscreteOperator& op, const NonlinearitySpec& f,
                          const std::vector<double>& u_rows, double bc_outer,
                          double bc_inner);

}  // namespace qclab
