#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace qclab {

struct KrylovStats {
  int iterations = 0;
  double residual = 0.0;  // infinity norm
  bool converged = false;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (const double v : a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace detail

/// Preconditioned conjugate gradients for SPD systems. `matvec(x, out)` must
/// compute out = A x; `inv_diag` is the Jacobi preconditioner. Deterministic;
/// x is the initial guess and carries the solution.
template <class MatVec>
KrylovStats cg_solve(const MatVec& matvec, const std::vector<double>& b,
                     std::vector<double>& x,
                     const std::vector<double>& inv_diag, double rel_tol,
                     int max_iter) {
  const std::size_t n = b.size();
  const double bnorm = detail::norm_inf(b);
  KrylovStats st;
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    st.converged = true;
    return st;
  }
  const double target = rel_tol * bnorm;

  std::vector<double> r(n), z(n), p(n), ap(n);
  matvec(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = detail::dot(r, z);

  for (int k = 0; k < max_iter; ++k) {
    st.residual = detail::norm_inf(r);
    if (st.residual <= target) {
      st.converged = true;
      st.iterations = k;
      return st;
    }
    matvec(p, ap);
    const double pap = detail::dot(p, ap);
    if (pap == 0.0) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = detail::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    st.iterations = k + 1;
  }
  st.residual = detail::norm_inf(r);
  st.converged = st.residual <= target;
  return st;
}

/// Preconditioned BiCGStab; same contract as cg_solve but for general
/// (nonsymmetric) systems. The shadow residual restarts deterministically on
/// breakdown.
template <class MatVec>
KrylovStats bicgstab_solve(const MatVec& matvec, const std::vector<double>& b,
                           std::vector<double>& x,
                           const std::vector<double>& inv_diag, double rel_tol,
                           int max_iter) {
  const std::size_t n = b.size();
  const double bnorm = detail::norm_inf(b);
  KrylovStats st;
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    st.converged = true;
    return st;
  }
  const double target = rel_tol * bnorm;

  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n);
  std::vector<double> phat(n), shat(n);
  matvec(x, t);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;

  for (int k = 0; k < max_iter; ++k) {
    st.residual = detail::norm_inf(r);
    if (st.residual <= target) {
      st.converged = true;
      st.iterations = k;
      return st;
    }
    double rho1 = detail::dot(rhat, r);
    if (std::fabs(rho1) < 1e-300) {
      rhat = r;  // deterministic restart
      rho1 = detail::dot(rhat, r);
      if (rho1 == 0.0) break;
      p.assign(n, 0.0);
      v.assign(n, 0.0);
      rho = alpha = omega = 1.0;
    }
    const double beta = (rho1 / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) phat[i] = inv_diag[i] * p[i];
    matvec(phat, v);
    const double rhv = detail::dot(rhat, v);
    if (rhv == 0.0) break;
    alpha = rho1 / rhv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (detail::norm_inf(s) <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      st.residual = detail::norm_inf(s);
      st.converged = true;
      st.iterations = k + 1;
      return st;
    }
    for (std::size_t i = 0; i < n; ++i) shat[i] = inv_diag[i] * s[i];
    matvec(shat, t);
    const double tt = detail::dot(t, t);
    if (tt == 0.0) break;
    omega = detail::dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i)
      x[i] += alpha * phat[i] + omega * shat[i];
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rho = rho1;
    if (omega == 0.0) break;
    st.iterations = k + 1;
  }
  st.residual = detail::norm_inf(r);
  st.converged = st.residual <= target;
  return st;
}

}  // namespace qclab
