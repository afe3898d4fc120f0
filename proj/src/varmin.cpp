#include "qclab/varmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qclab/krylov.hpp"

namespace qclab {

VariationalScheme::VariationalScheme(std::shared_ptr<const GridDomain> d)
    : dom(std::move(d)), h(dom->h) {
  row_of.assign(dom->nx * dom->ny, -1);
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      if (dom->is_interior(i, j)) {
        row_of[dom->idx(i, j)] = static_cast<int>(rows.size());
        rows.push_back(dom->idx(i, j));
      }
  const int n = nrows();
  nE.assign(n, -1);
  nW.assign(n, -1);
  nN.assign(n, -1);
  nS.assign(n, -1);
  wE.assign(n, 0.0);
  wW.assign(n, 0.0);
  wN.assign(n, 0.0);
  wS.assign(n, 0.0);
  diag.resize(n);
  for (int r = 0; r < n; ++r) {
    const int p = rows[r];
    const int i = p % dom->nx, j = p / dom->nx;
    auto arm = [&](int a, std::vector<int>& nA, std::vector<double>& wA) {
      const int ni = i + arm_step[a][0], nj = j + arm_step[a][1];
      if (dom->is_interior(ni, nj)) {
        nA[r] = row_of[dom->idx(ni, nj)];
        wA[r] = 1.0;
      } else {
        wA[r] = 1.0 / dom->cut[p][a];
      }
    };
    arm(arm_east, nE, wE);
    arm(arm_west, nW, wW);
    arm(arm_north, nN, wN);
    arm(arm_south, nS, wS);
    diag[r] = (wE[r] + wW[r] + wN[r] + wS[r]) / (h * h);
  }
}

void VariationalScheme::laplacian(const std::vector<double>& u,
                                  std::vector<double>& out) const {
  const int n = nrows();
  out.resize(n);
  const double ih2 = 1.0 / (h * h);
  for (int r = 0; r < n; ++r) {
    const double up = u[r];
    const double ae = nE[r] >= 0 ? u[nE[r]] - up : -up * wE[r];
    const double aw = nW[r] >= 0 ? u[nW[r]] - up : -up * wW[r];
    const double an = nN[r] >= 0 ? u[nN[r]] - up : -up * wN[r];
    const double as = nS[r] >= 0 ? u[nS[r]] - up : -up * wS[r];
    out[r] = ((ae + aw) + (an + as)) * ih2;
  }
}

double VariationalScheme::energy(const std::vector<double>& u) const {
  double e = 0.0;
  const double h2 = h * h;
  for (int r = 0; r < nrows(); ++r) {
    const double up = u[r];
    if (nE[r] >= 0) {
      const double d = u[nE[r]] - up;
      e += 0.5 * d * d;
    } else {
      e += 0.5 * wE[r] * up * up;
    }
    if (nW[r] < 0) e += 0.5 * wW[r] * up * up;
    if (nN[r] >= 0) {
      const double d = u[nN[r]] - up;
      e += 0.5 * d * d;
    } else {
      e += 0.5 * wN[r] * up * up;
    }
    if (nS[r] < 0) e += 0.5 * wS[r] * up * up;
    e -= h2 * up;
  }
  return e;
}

double constraint_integral(const ScalarField& u, const CutoffFunction& g) {
  double s = 0.0;
  for (int j = 0; j < u.dom->ny; ++j)
    for (int i = 0; i < u.dom->nx; ++i)
      if (u.dom->is_interior(i, j)) s += g.g(u.at(i, j));
  return s * u.dom->h * u.dom->h;
}

double constraint_scale(const ScalarField& v, const CutoffFunction& g) {
  if (v.max_interior() <= 0.0)
    throw std::invalid_argument("constraint_scale: field is nowhere positive");
  if (v.dom->cut_area() <= 1.0)
    throw std::invalid_argument("constraint_scale: domain area must exceed 1");

  auto mass = [&](double t) {
    double s = 0.0;
    for (int j = 0; j < v.dom->ny; ++j)
      for (int i = 0; i < v.dom->nx; ++i)
        if (v.dom->is_interior(i, j)) s += g.g(t * v.at(i, j));
    return s * v.dom->h * v.dom->h;
  };

  double hi = 1.0;
  while (mass(hi) < 1.0) {
    hi *= 2.0;
    if (hi > 1e14)
      throw std::invalid_argument(
          "constraint_scale: constraint mass never reaches 1 (domain effectively too small)");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass(mid);
    if (std::fabs(m - 1.0) <= 1e-10) return mid;
    if (m < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Restores h^2 sum g(u + c g'(u)) = 1 by a safeguarded scalar Newton method.
// Returns false when the correction direction is degenerate or the root is
// out of reach.
bool restore_constraint(const VariationalScheme& vs, std::vector<double>& u,
                        const CutoffFunction& g, double tol) {
  const int n = vs.nrows();
  std::vector<double> dir(n);
  double dirsq = 0.0;
  for (int r = 0; r < n; ++r) {
    dir[r] = g.dg(u[r]);
    dirsq += dir[r] * dir[r];
  }
  if (dirsq == 0.0) return false;

  auto mass = [&](double c) {
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += g.g(u[r] + c * dir[r]);
    return s * vs.cell() - 1.0;
  };
  double c = 0.0, m = mass(0.0);
  double lo = 0.0, hi = 0.0;
  bool have_bracket = false;
  for (int it = 0; it < 100 && std::fabs(m) > tol; ++it) {
    double slope = 0.0;
    for (int r = 0; r < n; ++r) slope += g.dg(u[r] + c * dir[r]) * dir[r];
    slope *= vs.cell();
    double next = slope > 1e-14 ? c - m / slope
                                : (m < 0.0 ? c + 0.1 : c - 0.1);
    if (have_bracket) next = std::clamp(next, lo, hi);
    double mn = mass(next);
    if (!have_bracket) {
      if (m < 0.0 && mn > 0.0) {
        lo = c;
        hi = next;
        have_bracket = true;
      } else if (m > 0.0 && mn < 0.0) {
        lo = next;
        hi = c;
        have_bracket = true;
      }
    }
    if (have_bracket) {
      // keep the sign bracket tight; bisect when Newton fails to improve
      if (std::fabs(mn) >= std::fabs(m)) {
        next = 0.5 * (lo + hi);
        mn = mass(next);
      }
      if (mn < 0.0)
        lo = next;
      else
        hi = next;
    }
    c = next;
    m = mn;
  }
  if (std::fabs(m) > tol) return false;
  for (int r = 0; r < n; ++r) u[r] += c * dir[r];
  return true;
}

}  // namespace

VariationalResult constrained_minimize(std::shared_ptr<const GridDomain> dom,
                                       const CutoffFunction& g,
                                       const VarminOptions& opts) {
  const VariationalScheme vs(dom);
  const int n = vs.nrows();

  // v_a: the unconstrained minimizer of I in the same scheme
  std::vector<double> vtor(n, 0.0);
  {
    std::vector<double> rhs(n, 1.0);  // -Lap v = 1
    std::vector<double> inv_diag(n);
    for (int r = 0; r < n; ++r) inv_diag[r] = 1.0 / vs.diag[r];
    auto matvec = [&](const std::vector<double>& x, std::vector<double>& out) {
      vs.laplacian(x, out);
      for (auto& o : out) o = -o;
    };
    const auto st = cg_solve(matvec, rhs, vtor, inv_diag, opts.linear.tol,
                             opts.linear.max_iter);
    if (!st.converged)
      throw std::runtime_error("constrained_minimize: torsion solve stagnated");
  }

  VariationalResult out;
  out.torsion = ScalarField(dom);
  for (int r = 0; r < n; ++r) out.torsion.v[vs.rows[r]] = vtor[r];
  out.t_scale = constraint_scale(out.torsion, g);

  std::vector<double> u(n);
  for (int r = 0; r < n; ++r) u[r] = out.t_scale * vtor[r];
  if (!restore_constraint(vs, u, g, opts.constraint_tol))
    throw std::runtime_error("constrained_minimize: degenerate initial iterate");

  std::vector<double> lap(n), dir(n), gp(n), trial(n);
  std::vector<double> inv_diag_si, rhs_si;
  double energy = vs.energy(u);
  // Jacobi-scaled steps: tau = 1 reproduces the h^2/4 explicit-diffusion step
  // on the regular stencil while keeping boundary-cut rows stable.
  const double tau0 = 1.0;
  double tau = tau0;

  int accepted = 0;
  for (int step = 0; step < opts.max_steps; ++step) {
    vs.laplacian(u, lap);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < n; ++r) {
      gp[r] = g.dg(u[r]);
      num += (lap[r] + 1.0) * gp[r];
      den += gp[r] * gp[r];
    }
    if (den == 0.0)
      throw std::runtime_error(
          "constrained_minimize: constraint gradient vanished at an iterate");
    const double proj = num / den;

    double el = 0.0;
    for (int r = 0; r < n; ++r) {
      dir[r] = (lap[r] + 1.0) - proj * gp[r];  // tangent residual
      el = std::max(el, std::fabs(dir[r]));
    }
    out.mu = -proj;
    out.el_residual = el;
    out.iterations = accepted;
    if (el <= opts.tol) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    for (int bt = 0; bt < 60 && !stepped; ++bt) {
      if (!opts.semi_implicit) {
        for (int r = 0; r < n; ++r)
          trial[r] = u[r] + tau * dir[r] / vs.diag[r];
      } else {
        // (I - t Lap) trial = u + t (1 - proj g'(u))
        const double tsi = opts.tau_semi * tau;
        rhs_si.resize(n);
        inv_diag_si.resize(n);
        for (int r = 0; r < n; ++r) {
          rhs_si[r] = u[r] + tsi * (1.0 - proj * gp[r]);
          inv_diag_si[r] = 1.0 / (1.0 + tsi * vs.diag[r]);
        }
        auto matvec = [&](const std::vector<double>& x,
                          std::vector<double>& outv) {
          vs.laplacian(x, outv);
          for (int r = 0; r < n; ++r) outv[r] = x[r] - tsi * outv[r];
        };
        trial = u;
        const auto st = cg_solve(matvec, rhs_si, trial, inv_diag_si,
                                 opts.linear.tol, opts.linear.max_iter);
        if (!st.converged)
          throw std::runtime_error(
              "constrained_minimize: semi-implicit solve stagnated");
      }
      if (!restore_constraint(vs, trial, g, opts.constraint_tol)) {
        tau *= 0.5;
        continue;
      }
      const double etrial = vs.energy(trial);
      if (etrial <= energy + 1e-12) {
        u.swap(trial);
        energy = etrial;
        ++accepted;
        stepped = true;
        tau = std::min(tau * 1.2, tau0);
      } else {
        tau *= 0.5;
      }
    }
    if (!stepped) break;  // stalled above tolerance; converged stays false
  }

  out.u = ScalarField(dom);
  for (int r = 0; r < n; ++r) out.u.v[vs.rows[r]] = u[r];
  out.energy = energy;
  out.constraint_residual = std::fabs(constraint_integral(out.u, g) - 1.0);
  return out;
}

BoundsReport verify_solution_bounds(const VariationalResult& res,
                                    const CutoffFunction& g) {
  const auto& dom = *res.u.dom;
  BoundsReport rep;
  rep.mu_positive = res.mu > 0.0;
  rep.max_above_one = res.u.max_interior() > 1.0;
  rep.positive = res.u.min_interior() > 0.0;
  rep.constraint_ok = std::fabs(constraint_integral(res.u, g) - 1.0) <= 1e-6;

  rep.min_gap_torsion = std::numeric_limits<double>::infinity();
  rep.worst_ceiling_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dom.ny; ++j)
    for (int i = 0; i < dom.nx; ++i) {
      if (!dom.is_interior(i, j)) continue;
      rep.min_gap_torsion =
          std::min(rep.min_gap_torsion, res.u.at(i, j) - res.torsion.at(i, j));
      const double ceiling = 0.5 * (1.0 - dom.y(j) * dom.y(j)) + 2.0;
      rep.worst_ceiling_margin =
          std::min(rep.worst_ceiling_margin, ceiling - res.u.at(i, j));
    }
  rep.torsion_below = rep.min_gap_torsion > 0.0;
  rep.below_ceiling = rep.worst_ceiling_margin > 0.0;

  if (dom.sym_x && dom.sym_y) {
    for (int j = 0; j < dom.ny; ++j)
      for (int i = 0; i < dom.nx; ++i) {
        if (!dom.is_interior(i, j)) continue;
        rep.asym_x = std::max(rep.asym_x, std::fabs(res.u.at(i, j) -
                                                    res.u.at(dom.mirror_ix - i, j)));
        rep.asym_y = std::max(rep.asym_y, std::fabs(res.u.at(i, j) -
                                                    res.u.at(i, dom.mirror_iy - j)));
      }
    const int ci = dom.mirror_ix / 2, cj = dom.mirror_iy / 2;
    for (int j = 0; j < dom.ny; ++j)
      for (int i = 0; i < dom.nx; ++i) {
        if (!dom.is_interior(i, j)) continue;
        const int di = i >= ci ? 1 : -1;  // outward along the row
        if (dom.is_interior(i + di, j))
          rep.monotone_violation = std::max(
              rep.monotone_violation, res.u.at(i + di, j) - res.u.at(i, j));
        const int dj = j >= cj ? 1 : -1;
        if (dom.is_interior(i, j + dj))
          rep.monotone_violation = std::max(
              rep.monotone_violation, res.u.at(i, j + dj) - res.u.at(i, j));
      }
    rep.symmetric = rep.asym_x <= 1e-8 && rep.asym_y <= 1e-8;
    rep.monotone = rep.monotone_violation <= 1e-8;
  }

  // refit the multiplier: least squares of -(Lap u + 1) against g'(u)
  {
    const VariationalScheme vs(res.u.dom);
    std::vector<double> u(vs.nrows()), lap;
    for (int r = 0; r < vs.nrows(); ++r) u[r] = res.u.v[vs.rows[r]];
    vs.laplacian(u, lap);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < vs.nrows(); ++r) {
      const double gp = g.dg(u[r]);
      num += -(lap[r] + 1.0) * gp;
      den += gp * gp;
    }
    const double refit = den > 0.0 ? num / den : 0.0;
    rep.multiplier_refit_error =
        std::fabs(refit - res.mu) / std::max(1e-300, std::fabs(res.mu));
  }
  return rep;
}

}  // namespace qclab
