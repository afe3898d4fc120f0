#include "qclab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qclab {

double oscillatory_theta(double s) {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double t1 = s - 1.0, t2 = 2.0 - s;
  const double damp = std::exp(-1.0 / t1 - 1.0 / t2);
  if (damp == 0.0) return 0.0;
  return damp * (std::sin(1.0 / (t1 * t1)) + 1.0);
}

namespace {

// Gauss-Kronrod 7-15 pair on [-1,1].
constexpr double kron_x[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kron_w[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double gauss_w[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

template <class F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fv = f(c + hw * kron_x[i]);
    k += kron_w[i] * fv;
    if (i % 2 == 1) g += gauss_w[i / 2] * fv;
  }
  return {k * hw, std::fabs(k - g) * hw};
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double tol, int depth = 0) {
  auto [val, err] = gk15(f, a, b);
  if (err <= tol || depth >= 48) return val;
  const double c = 0.5 * (a + b);
  return adaptive_gk(f, a, c, 0.5 * tol, depth + 1) +
         adaptive_gk(f, c, b, 0.5 * tol, depth + 1);
}

constexpr int table_panels = 1 << 15;

// 7-point Gauss-Legendre on [a,b]; exact to degree 13, used for the
// cumulative table panels and the sub-panel remainder.
constexpr double gl7_x[7] = {-0.949107912342759, -0.741531185599394,
                             -0.405845151377397, 0.0,
                             0.405845151377397,  0.741531185599394,
                             0.949107912342759};

template <class F>
double gl7(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 7; ++i) s += gauss_w[i] * f(c + hw * gl7_x[i]);
  return s * hw;
}

}  // namespace

CutoffFunction CutoffFunction::smoothstep() {
  CutoffFunction g;
  g.variant_ = Variant::smoothstep;
  return g;
}

CutoffFunction CutoffFunction::oscillatory() {
  CutoffFunction g;
  g.variant_ = Variant::oscillatory;
  const double total =
      adaptive_gk(oscillatory_theta, 1.0, 2.0, 1e-12);
  g.kappa_ = 1.0 / total;
  g.cum_.resize(table_panels + 1);
  g.cum_[0] = 0.0;
  const double dt = 1.0 / table_panels;
  for (int k = 0; k < table_panels; ++k) {
    const double a = 1.0 + k * dt, b = 1.0 + (k + 1) * dt;
    g.cum_[k + 1] = g.cum_[k] + gl7(oscillatory_theta, a, b);
  }
  return g;
}

CutoffFunction CutoffFunction::from_name(const std::string& name) {
  if (name == "smoothstep") return smoothstep();
  if (name == "oscillatory") return oscillatory();
  throw std::invalid_argument("unknown cutoff variant: " + name);
}

double CutoffFunction::g(double s) const {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  if (variant_ == Variant::smoothstep) {
    const double t = s - 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
  const double f = (s - 1.0) * table_panels;
  int k = static_cast<int>(f);
  k = std::clamp(k, 0, table_panels - 1);
  const double sk = 1.0 + static_cast<double>(k) / table_panels;
  const double val = kappa_ * (cum_[k] + gl7(oscillatory_theta, sk, s));
  return std::clamp(val, 0.0, 1.0);
}

double CutoffFunction::dg(double s) const {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  if (variant_ == Variant::smoothstep) {
    const double t = s - 1.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
  }
  return kappa_ * oscillatory_theta(s);
}

}  // namespace qclab
