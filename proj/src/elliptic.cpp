#include "qclab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qclab/krylov.hpp"

namespace qclab {

namespace {

void check_ellipticity(const GridDomain& d, const CoefficientField& c) {
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (!d.is_interior(i, j)) continue;
      const double x = d.x(i), y = d.y(j);
      const double a11 = c.a11(x, y), a22 = c.a22(x, y), a12 = c.a12(x, y);
      // axis and diagonal directions suffice for symmetric 2x2
      const double m = std::min(std::min(a11, a22),
                                std::min(0.5 * (a11 + a22) - a12,
                                         0.5 * (a11 + a22) + a12));
      if (m < c.beta - 1e-12)
        throw std::invalid_argument(
            "assemble_operator: ellipticity floor violated at node (" +
            std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

}  // namespace

void DiscreteOperator::apply(const std::vector<double>& u,
                             std::vector<double>& out) const {
  const int n = nrows();
  out.resize(n);
  for (int r = 0; r < n; ++r) {
    const double ue = nE[r] >= 0 ? u[nE[r]] : 0.0;
    const double uw = nW[r] >= 0 ? u[nW[r]] : 0.0;
    const double un = nN[r] >= 0 ? u[nN[r]] : 0.0;
    const double us = nS[r] >= 0 ? u[nS[r]] : 0.0;
    const double sx = cE[r] * ue + cW[r] * uw;
    const double sy = cN[r] * un + cS[r] * us;
    double v = c0[r] * u[r] + (sx + sy);
    if (has_cross) {
      const double une = nNE[r] >= 0 ? u[nNE[r]] : 0.0;
      const double usw = nSW[r] >= 0 ? u[nSW[r]] : 0.0;
      const double unw = nNW[r] >= 0 ? u[nNW[r]] : 0.0;
      const double use = nSE[r] >= 0 ? u[nSE[r]] : 0.0;
      v += (cNE[r] * une + cSW[r] * usw) + (cNW[r] * unw + cSE[r] * use);
    }
    out[r] = v;
  }
}

std::vector<double> DiscreteOperator::bc_contribution(double bc_outer,
                                                      double bc_inner) const {
  auto val = [&](std::uint8_t l) {
    return l == static_cast<std::uint8_t>(Boundary::inner) ? bc_inner
                                                           : bc_outer;
  };
  std::vector<double> out(nrows(), 0.0);
  for (int r = 0; r < nrows(); ++r) {
    double v = 0.0;
    if (nE[r] < 0) v += bE[r] * val(lE[r]);
    if (nW[r] < 0) v += bW[r] * val(lW[r]);
    if (nN[r] < 0) v += bN[r] * val(lN[r]);
    if (nS[r] < 0) v += bS[r] * val(lS[r]);
    if (has_cross) {
      if (nNE[r] < 0) v += bNE[r] * bc_outer;
      if (nNW[r] < 0) v += bNW[r] * bc_outer;
      if (nSE[r] < 0) v += bSE[r] * bc_outer;
      if (nSW[r] < 0) v += bSW[r] * bc_outer;
    }
    out[r] = v;
  }
  return out;
}

std::vector<double> DiscreteOperator::bc_contribution(
    const std::function<double(int, int, int, double, Boundary)>& trace) const {
  std::vector<double> out(nrows(), 0.0);
  for (int r = 0; r < nrows(); ++r) {
    const int i = rows[r] % dom->nx;
    const int j = rows[r] / dom->nx;
    const auto& cuts = dom->cut[rows[r]];
    const auto& labels = dom->cut_label[rows[r]];
    double v = 0.0;
    if (nE[r] < 0)
      v += bE[r] * trace(i, j, arm_east, cuts[arm_east],
                         static_cast<Boundary>(labels[arm_east]));
    if (nW[r] < 0)
      v += bW[r] * trace(i, j, arm_west, cuts[arm_west],
                         static_cast<Boundary>(labels[arm_west]));
    if (nN[r] < 0)
      v += bN[r] * trace(i, j, arm_north, cuts[arm_north],
                         static_cast<Boundary>(labels[arm_north]));
    if (nS[r] < 0)
      v += bS[r] * trace(i, j, arm_south, cuts[arm_south],
                         static_cast<Boundary>(labels[arm_south]));
    out[r] = v;
  }
  return out;
}

std::vector<double> DiscreteOperator::field_to_rows(
    const ScalarField& f) const {
  std::vector<double> u(nrows());
  for (int r = 0; r < nrows(); ++r) u[r] = f.v[rows[r]];
  return u;
}

ScalarField DiscreteOperator::rows_to_field(const std::vector<double>& u,
                                            double bc_outer,
                                            double bc_inner) const {
  ScalarField f(dom);
  f.bc_outer = bc_outer;
  f.bc_inner = bc_inner;
  for (int r = 0; r < nrows(); ++r) f.v[rows[r]] = u[r];
  return f;
}

DiscreteOperator assemble_operator(std::shared_ptr<const GridDomain> dom,
                                   const CoefficientField& coeffs) {
  const GridDomain& d = *dom;
  check_ellipticity(d, coeffs);

  DiscreteOperator op;
  op.dom = dom;
  op.row_of.assign(d.nx * d.ny, -1);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.is_interior(i, j)) {
        op.row_of[d.idx(i, j)] = static_cast<int>(op.rows.size());
        op.rows.push_back(d.idx(i, j));
      }
  const int n = op.nrows();

  for (const int p : op.rows)
    for (int arm = 0; arm < 4; ++arm)
      if (d.cut[p][arm] < 1.0) op.has_cuts = true;

  if (coeffs.has_cross() && op.has_cuts)
    throw std::invalid_argument(
        "assemble_operator: off-diagonal A together with boundary cuts is unsupported");

  // mesh Peclet number decides centered vs one-sided drift differences
  double max_b = 0.0;
  if (coeffs.has_drift())
    for (const int p : op.rows) {
      const double x = d.x(p % d.nx), y = d.y(p / d.nx);
      max_b = std::max(max_b, std::max(std::fabs(coeffs.bx(x, y)),
                                       std::fabs(coeffs.by(x, y))));
    }
  op.peclet = max_b * d.h / (2.0 * coeffs.beta);
  op.upwinded = op.peclet >= 1.0;
  op.symmetric = !coeffs.has_drift() && coeffs.diagonal_constant();

  op.c0.assign(n, 0.0);
  op.cE.assign(n, 0.0);
  op.cW.assign(n, 0.0);
  op.cN.assign(n, 0.0);
  op.cS.assign(n, 0.0);
  op.bE.assign(n, 0.0);
  op.bW.assign(n, 0.0);
  op.bN.assign(n, 0.0);
  op.bS.assign(n, 0.0);
  op.nE.assign(n, -1);
  op.nW.assign(n, -1);
  op.nN.assign(n, -1);
  op.nS.assign(n, -1);
  op.lE.assign(n, 0);
  op.lW.assign(n, 0);
  op.lN.assign(n, 0);
  op.lS.assign(n, 0);
  op.rx.resize(n);
  op.ry.resize(n);

  const double h = d.h;
  for (int r = 0; r < n; ++r) {
    const int p = op.rows[r];
    const int i = p % d.nx, j = p / d.nx;
    const double x = d.x(i), y = d.y(j);
    op.rx[r] = x;
    op.ry[r] = y;
    const auto& t = d.cut[p];
    const auto& lab = d.cut_label[p];

    // arm fractions; interior arms carry 1
    const double te = t[arm_east], tw = t[arm_west];
    const double tn = t[arm_north], ts = t[arm_south];

    // diffusion: flux form with coefficients at mid-arm points
    const double ae = coeffs.a11(x + 0.5 * te * h, y);
    const double aw = coeffs.a11(x - 0.5 * tw * h, y);
    const double an = coeffs.a22(x, y + 0.5 * tn * h);
    const double as = coeffs.a22(x, y - 0.5 * ts * h);
    const double fx = 2.0 / (h * h * (te + tw));
    const double fy = 2.0 / (h * h * (tn + ts));
    double ce = fx * ae / te, cw = fx * aw / tw;
    double cn = fy * an / tn, cs = fy * as / ts;
    double c0 = -(ce + cw) - (cn + cs);

    // drift
    const double bx = coeffs.bx(x, y), by = coeffs.by(x, y);
    if (bx != 0.0) {
      if (!op.upwinded) {
        const double hp = te * h, hm = tw * h;
        ce += bx * hm / (hp * (hp + hm));
        cw -= bx * hp / (hm * (hp + hm));
        c0 += bx * (hp - hm) / (hp * hm);
      } else if (bx > 0.0) {
        ce += bx / (te * h);
        c0 -= bx / (te * h);
      } else {
        cw += -bx / (tw * h);
        c0 -= -bx / (tw * h);
      }
    }
    if (by != 0.0) {
      if (!op.upwinded) {
        const double hp = tn * h, hm = ts * h;
        cn += by * hm / (hp * (hp + hm));
        cs -= by * hp / (hm * (hp + hm));
        c0 += by * (hp - hm) / (hp * hm);
      } else if (by > 0.0) {
        cn += by / (tn * h);
        c0 -= by / (tn * h);
      } else {
        cs += -by / (ts * h);
        c0 -= -by / (ts * h);
      }
    }

    op.c0[r] = c0;
    auto hook = [&](int arm, double coef, std::vector<double>& cA,
                    std::vector<int>& nA, std::vector<double>& bA,
                    std::vector<std::uint8_t>& lA) {
      const int ni = i + arm_step[arm][0], nj = j + arm_step[arm][1];
      if (d.is_interior(ni, nj)) {
        cA[r] = coef;
        nA[r] = op.row_of[d.idx(ni, nj)];
      } else {
        bA[r] = coef;
        nA[r] = -1;
        lA[r] = lab[arm];
      }
    };
    hook(arm_east, ce, op.cE, op.nE, op.bE, op.lE);
    hook(arm_west, cw, op.cW, op.nW, op.bW, op.lW);
    hook(arm_north, cn, op.cN, op.nN, op.bN, op.lN);
    hook(arm_south, cs, op.cS, op.nS, op.bS, op.lS);
  }

  if (coeffs.has_cross()) {
    op.has_cross = true;
    op.cNE.assign(n, 0.0);
    op.cNW.assign(n, 0.0);
    op.cSE.assign(n, 0.0);
    op.cSW.assign(n, 0.0);
    op.bNE.assign(n, 0.0);
    op.bNW.assign(n, 0.0);
    op.bSE.assign(n, 0.0);
    op.bSW.assign(n, 0.0);
    op.nNE.assign(n, -1);
    op.nNW.assign(n, -1);
    op.nSE.assign(n, -1);
    op.nSW.assign(n, -1);
    const double q = 1.0 / (4.0 * h * h);
    for (int r = 0; r < n; ++r) {
      const int p = op.rows[r];
      const int i = p % d.nx, j = p / d.nx;
      const double x = d.x(i), y = d.y(j);
      const double ce12 = coeffs.a12(x + h, y), cw12 = coeffs.a12(x - h, y);
      const double cn12 = coeffs.a12(x, y + h), cs12 = coeffs.a12(x, y - h);
      auto hook = [&](int di, int dj, double coef, std::vector<double>& cA,
                      std::vector<int>& nA, std::vector<double>& bA) {
        if (d.is_interior(i + di, j + dj)) {
          cA[r] = coef;
          nA[r] = op.row_of[d.idx(i + di, j + dj)];
        } else {
          bA[r] = coef;
        }
      };
      hook(1, 1, q * (ce12 + cn12), op.cNE, op.nNE, op.bNE);
      hook(-1, 1, -q * (cw12 + cn12), op.cNW, op.nNW, op.bNW);
      hook(1, -1, -q * (ce12 + cs12), op.cSE, op.nSE, op.bSE);
      hook(-1, -1, q * (cw12 + cs12), op.cSW, op.nSW, op.bSW);
    }
  }
  return op;
}

LinearStats solve_rows(const DiscreteOperator& op, double shift,
                       const std::vector<double>& rhs_rows,
                       std::vector<double>& u, const LinearOptions& opts) {
  const int n = op.nrows();
  if (static_cast<int>(u.size()) != n) u.assign(n, 0.0);

  // Solve A x = b with A = -(L + shift), an M-matrix with positive diagonal.
  std::vector<double> b(n);
  for (int r = 0; r < n; ++r) b[r] = -rhs_rows[r];
  std::vector<double> inv_diag(n);
  for (int r = 0; r < n; ++r) inv_diag[r] = -1.0 / (op.c0[r] + shift);
  auto matvec = [&](const std::vector<double>& x, std::vector<double>& out) {
    op.apply(x, out);
    for (int r = 0; r < n; ++r) out[r] = -(out[r] + shift * x[r]);
  };

  KrylovStats ks;
  if (op.symmetric && !op.has_cuts && shift <= 0.0)
    ks = cg_solve(matvec, b, u, inv_diag, opts.tol, opts.max_iter);
  else
    ks = bicgstab_solve(matvec, b, u, inv_diag, opts.tol, opts.max_iter);

  return {ks.iterations, ks.residual, ks.converged};
}

LinearResult solve_linear_system(const DiscreteOperator& op,
                                 const ScalarField& rhs, double bc_outer,
                                 double bc_inner, const LinearOptions& opts) {
  const auto bc = op.bc_contribution(bc_outer, bc_inner);
  std::vector<double> b = op.field_to_rows(rhs);
  for (int r = 0; r < op.nrows(); ++r) b[r] -= bc[r];
  std::vector<double> u;
  const LinearStats st = solve_rows(op, 0.0, b, u, opts);
  LinearResult res{op.rows_to_field(u, bc_outer, bc_inner), st};
  return res;
}

LinearResult solve_torsion(std::shared_ptr<const GridDomain> dom,
                           const CoefficientField& coeffs,
                           const LinearOptions& opts) {
  const auto op = assemble_operator(dom, coeffs);
  ScalarField rhs(dom);
  for (const int p : op.rows) rhs.v[p] = -1.0;
  return solve_linear_system(op, rhs, 0.0, 0.0, opts);
}

EigenPair principal_eigenpair(std::shared_ptr<const GridDomain> dom,
                              const CoefficientField& coeffs,
                              const std::function<double(double, double)>& zeta,
                              double tol, int max_iter,
                              const LinearOptions& linear) {
  if (dom->has_inner)
    throw std::invalid_argument(
        "principal_eigenpair: expects a single-component domain");
  DiscreteOperator op = assemble_operator(dom, coeffs);
  const int n = op.nrows();

  double zeta_max = 0.0;
  if (zeta)
    for (int r = 0; r < n; ++r) {
      const double z = zeta(op.rx[r], op.ry[r]);
      op.c0[r] += z;
      zeta_max = std::max(zeta_max, z);
    }
  // shift below the bottom of the spectrum of -(L + zeta)
  const double sigma = -zeta_max - 1.0;

  LinearOptions inner = linear;
  inner.tol = std::min(linear.tol, 1e-12);

  EigenPair ep;
  std::vector<double> phi(n, 1.0), w(n, 0.0), lphi(n);
  for (int it = 0; it < max_iter; ++it) {
    // (-L - sigma) w = phi  <=>  (L + sigma) w = -phi
    std::vector<double> rhs(n);
    for (int r = 0; r < n; ++r) rhs[r] = -phi[r];
    const LinearStats st = solve_rows(op, sigma, rhs, w, inner);
    if (!st.converged)
      throw std::runtime_error("principal_eigenpair: inner solve stagnated");
    double m = 0.0;
    for (const double v : w) m = std::max(m, v);
    if (m <= 0.0)
      throw std::runtime_error("principal_eigenpair: iterate lost positivity");
    for (int r = 0; r < n; ++r) phi[r] = w[r] / m;

    op.apply(phi, lphi);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < n; ++r) {
      num += -lphi[r] * phi[r];
      den += phi[r] * phi[r];
    }
    ep.lambda1 = num / den;
    double res = 0.0;
    for (int r = 0; r < n; ++r)
      res = std::max(res, std::fabs(-lphi[r] - ep.lambda1 * phi[r]));
    ep.residual = res;
    ep.iterations = it + 1;
    if (res <= tol) {
      ep.converged = true;
      break;
    }
  }
  ep.phi = op.rows_to_field(phi);
  return ep;
}

NonlinearitySpec NonlinearitySpec::constant(double beta) {
  NonlinearitySpec s;
  s.name = "constant";
  s.f = [beta](double, double, double) { return beta; };
  s.sup_bound = beta;
  s.zero_at_zero = beta == 0.0;
  return s;
}

NonlinearitySpec NonlinearitySpec::logistic(double gamma, double p) {
  if (p <= 1.0) throw std::invalid_argument("logistic: requires p > 1");
  NonlinearitySpec s;
  s.name = "logistic";
  s.f = [gamma, p](double, double, double v) {
    if (v <= 0.0) return gamma * v;
    return gamma * v - std::pow(v, p);
  };
  s.zeta = [gamma](double, double) { return gamma; };
  const double smax = std::pow(gamma / p, 1.0 / (p - 1.0));
  s.sup_bound = gamma * smax - std::pow(smax, p);
  s.zero_at_zero = true;
  s.decay_threshold = std::pow(gamma, 1.0 / (p - 1.0));
  return s;
}

namespace {

std::array<std::pair<double, double>, 5> probe_points(const GridDomain& d) {
  const double x0 = d.ox, x1 = d.ox + (d.nx - 1) * d.h;
  const double y0 = d.oy, y1 = d.oy + (d.ny - 1) * d.h;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  return {{{cx, cy},
           {0.5 * (x0 + cx), 0.5 * (y0 + cy)},
           {0.5 * (x1 + cx), 0.5 * (y0 + cy)},
           {0.5 * (x0 + cx), 0.5 * (y1 + cy)},
           {0.5 * (x1 + cx), 0.5 * (y1 + cy)}}};
}

}  // namespace

double NonlinearitySpec::lipschitz_on(const GridDomain& dom, double s_lo,
                                      double s_hi) const {
  if (s_hi <= s_lo) s_hi = s_lo + 1.0;
  const int grid = 1000;
  const double ds = (s_hi - s_lo) / grid;
  const double delta = 1e-3 * ds;
  double m = 0.0;
  for (const auto& [px, py] : probe_points(dom))
    for (int k = 0; k <= grid; ++k) {
      const double s = s_lo + k * ds;
      const double d =
          (f(px, py, s + delta) - f(px, py, s - delta)) / (2.0 * delta);
      m = std::max(m, std::fabs(d));
    }
  return 1.5 * m;
}

bool NonlinearitySpec::ratio_nonincreasing(const GridDomain& dom,
                                           double s_hi) const {
  const double s_lo = std::max(1e-8, 1e-6 * s_hi);
  const int grid = 64;
  for (const auto& [px, py] : probe_points(dom)) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid; ++k) {
      const double s = s_lo * std::pow(s_hi / s_lo, double(k) / grid);
      const double ratio = f(px, py, s) / s;
      if (ratio > prev + 1e-9 * (1.0 + std::fabs(prev))) return false;
      prev = ratio;
    }
  }
  return true;
}

TraceFn constant_trace(double bc_outer, double bc_inner) {
  return [bc_outer, bc_inner](int, int, int, double, Boundary which) {
    return which == Boundary::inner ? bc_inner : bc_outer;
  };
}

TraceFn field_trace(const ScalarField& full, double scale) {
  return [full, scale](int i, int j, int arm, double t, Boundary) {
    const auto& d = *full.dom;
    const int di = arm_step[arm][0], dj = arm_step[arm][1];
    const double p0 = full.at(i, j);
    if (d.is_interior(i + di, j + dj)) {
      const double p1 = full.at(i + di, j + dj);
      if (d.is_interior(i + 2 * di, j + 2 * dj)) {
        const double p2 = full.at(i + 2 * di, j + 2 * dj);
        // quadratic through the arm line at offsets 0, 1, 2
        return scale * (p0 * 0.5 * (t - 1.0) * (t - 2.0) + p1 * t * (2.0 - t) +
                        p2 * 0.5 * t * (t - 1.0));
      }
      return scale * ((1.0 - t) * p0 + t * p1);
    }
    // the cut point lies on the source field's own zero boundary
    return scale * full.bc_outer;
  };
}

namespace {

FeasibilityReport feasibility(const DiscreteOperator& op,
                              const NonlinearitySpec& f, const ScalarField& w,
                              const TraceFn& trace, double tol, int sign) {
  const auto u = op.field_to_rows(w);
  std::vector<double> lu;
  op.apply(u, lu);
  const auto bc = op.bc_contribution(trace);
  FeasibilityReport rep;
  rep.ok = true;
  double worst = sign > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
  for (int r = 0; r < op.nrows(); ++r) {
    const double res = lu[r] + bc[r] + f.f(op.rx[r], op.ry[r], u[r]);
    const bool bad = sign > 0 ? res < -tol : res > tol;
    const bool record = sign > 0 ? res < worst : res > worst;
    if (record) {
      worst = res;
      rep.worst = res;
      rep.node_i = op.rows[r] % op.dom->nx;
      rep.node_j = op.rows[r] / op.dom->nx;
    }
    if (bad) rep.ok = false;
  }
  return rep;
}

}  // namespace

FeasibilityReport check_subsolution(const DiscreteOperator& op,
                                    const NonlinearitySpec& f,
                                    const ScalarField& w, const TraceFn& trace,
                                    double tol) {
  return feasibility(op, f, w, trace, tol, +1);
}

FeasibilityReport check_supersolution(const DiscreteOperator& op,
                                      const NonlinearitySpec& f,
                                      const ScalarField& w, const TraceFn& trace,
                                      double tol) {
  return feasibility(op, f, w, trace, tol, -1);
}

double nonlinear_residual(const DiscreteOperator& op, const NonlinearitySpec& f,
                          const std::vector<double>& u_rows, double bc_outer,
                          double bc_inner) {
  std::vector<double> lu;
  op.apply(u_rows, lu);
  const auto bc = op.bc_contribution(bc_outer, bc_inner);
  double res = 0.0;
  for (int r = 0; r < op.nrows(); ++r)
    res = std::max(res, std::fabs(lu[r] + bc[r] +
                                  f.f(op.rx[r], op.ry[r], u_rows[r])));
  return res;
}

MonotoneResult monotone_semilinear_solve(
    const DiscreteOperator& op, const NonlinearitySpec& f,
    const ScalarField& sub, const ScalarField& super, const TraceFn& sub_trace,
    const TraceFn& super_trace, double bc_outer, double bc_inner,
    const MonotoneOptions& opts) {
  const int n = op.nrows();
  const auto lo = op.field_to_rows(sub);
  const auto hi = op.field_to_rows(super);

  for (int r = 0; r < n; ++r)
    if (lo[r] > hi[r] + opts.order_slack)
      throw std::runtime_error(
          "monotone_semilinear_solve: sub > super at node (" +
          std::to_string(op.rows[r] % op.dom->nx) + "," +
          std::to_string(op.rows[r] / op.dom->nx) + ")");

  // boundary ordering sub <= bc <= super at every cut point
  for (int r = 0; r < n; ++r) {
    const int i = op.rows[r] % op.dom->nx, j = op.rows[r] / op.dom->nx;
    const auto& cuts = op.dom->cut[op.rows[r]];
    const auto& labels = op.dom->cut_label[op.rows[r]];
    auto check_arm = [&](int arm, int nbr) {
      if (nbr >= 0) return;
      const auto which = static_cast<Boundary>(labels[arm]);
      const double bc = which == Boundary::inner ? bc_inner : bc_outer;
      const double s = sub_trace(i, j, arm, cuts[arm], which);
      const double S = super_trace(i, j, arm, cuts[arm], which);
      if (s > bc + opts.tol_feas || S < bc - opts.tol_feas)
        throw std::runtime_error(
            "monotone_semilinear_solve: boundary data not bracketed at node (" +
            std::to_string(i) + "," + std::to_string(j) + ")");
    };
    check_arm(arm_east, op.nE[r]);
    check_arm(arm_west, op.nW[r]);
    check_arm(arm_north, op.nN[r]);
    check_arm(arm_south, op.nS[r]);
  }

  const auto sub_rep = check_subsolution(op, f, sub, sub_trace, opts.tol_feas);
  if (!sub_rep.ok)
    throw std::runtime_error(
        "monotone_semilinear_solve: subsolution infeasible, residual " +
        std::to_string(sub_rep.worst) + " at node (" +
        std::to_string(sub_rep.node_i) + "," + std::to_string(sub_rep.node_j) +
        ")");
  const auto super_rep =
      check_supersolution(op, f, super, super_trace, opts.tol_feas);
  if (!super_rep.ok)
    throw std::runtime_error(
        "monotone_semilinear_solve: supersolution infeasible, residual " +
        std::to_string(super_rep.worst) + " at node (" +
        std::to_string(super_rep.node_i) + "," +
        std::to_string(super_rep.node_j) + ")");

  double s_hi = std::max({super.max_interior(), bc_outer, bc_inner});
  const double K = f.lipschitz_on(*op.dom, std::min(sub.min_interior(), 0.0), s_hi);

  const auto bc_rows = op.bc_contribution(bc_outer, bc_inner);
  std::vector<double> u = opts.start_from_super ? hi : lo;
  std::vector<double> u_next = u, rhs(n);

  MonotoneResult out;
  out.lipschitz = K;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    // (L - K) u_next = -f(x, u) - K u
    for (int r = 0; r < n; ++r)
      rhs[r] = -f.f(op.rx[r], op.ry[r], u[r]) - K * u[r] - bc_rows[r];
    const LinearStats st = solve_rows(op, -K, rhs, u_next, opts.linear);
    if (!st.converged)
      throw std::runtime_error(
          "monotone_semilinear_solve: inner linear solve stagnated, residual " +
          std::to_string(st.residual));

    double inc = 0.0;
    for (int r = 0; r < n; ++r) {
      const bool ordered =
          opts.start_from_super
              ? (u_next[r] <= u[r] + opts.order_slack &&
                 u_next[r] >= lo[r] - opts.order_slack)
              : (u_next[r] >= u[r] - opts.order_slack &&
                 u_next[r] <= hi[r] + opts.order_slack);
      if (!ordered)
        throw std::runtime_error(
            "monotone_semilinear_solve: iterate left the bracket at node (" +
            std::to_string(op.rows[r] % op.dom->nx) + "," +
            std::to_string(op.rows[r] / op.dom->nx) + ") on sweep " +
            std::to_string(sweep));
      inc = std::max(inc, std::fabs(u_next[r] - u[r]));
    }
    u.swap(u_next);
    out.sweeps = sweep;
    out.residual = nonlinear_residual(op, f, u, bc_outer, bc_inner);
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    (void)inc;
  }
  out.u = op.rows_to_field(u, bc_outer, bc_inner);
  return out;
}

}  // namespace qclab
