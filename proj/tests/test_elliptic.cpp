#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qclab/elliptic.hpp"

using namespace qclab;

TEST_SUITE_BEGIN("elliptic");

namespace {

std::shared_ptr<const GridDomain> disk(double r, double h) {
  return std::make_shared<const GridDomain>(build_disk_domain({0, 0}, r, h));
}

std::shared_ptr<const GridDomain> square(double h) {
  return std::make_shared<const GridDomain>(
      build_rect_domain(-1.0, 1.0, -1.0, 1.0, h));
}

int center_row(const DiscreteOperator& op) {
  const auto& d = *op.dom;
  return op.row_of[d.idx((d.nx - 1) / 2, (d.ny - 1) / 2)];
}

}  // namespace

TEST_CASE("five-point Laplacian stencil away from the boundary") {
  const double h = 1.0 / 16;
  const auto dom = square(h);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  const int r = center_row(op);
  CHECK(op.c0[r] == doctest::Approx(-4.0 / (h * h)).epsilon(1e-13));
  for (const double c : {op.cE[r], op.cW[r], op.cN[r], op.cS[r]})
    CHECK(c == doctest::Approx(1.0 / (h * h)).epsilon(1e-13));
  CHECK_FALSE(op.has_cuts);
  CHECK(op.symmetric);

  // row sums vanish on constants with zero boundary data
  std::vector<double> ones(op.nrows(), 1.0), lu;
  op.apply(ones, lu);
  double worst = 0.0;
  for (int q = 0; q < op.nrows(); ++q) {
    const int i = op.rows[q] % dom->nx, j = op.rows[q] / dom->nx;
    bool inner = true;
    for (const auto& s : arm_step)
      inner = inner && dom->is_interior(i + 2 * s[0], j + 2 * s[1]);
    if (inner) worst = std::max(worst, std::fabs(lu[q]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("A = 2I scales the stencil exactly") {
  const double h = 1.0 / 16;
  const auto dom = square(h);
  const auto op1 = assemble_operator(dom, CoefficientField::identity());
  const auto op2 = assemble_operator(dom, CoefficientField::scaled_identity(2.0));
  for (int r = 0; r < op1.nrows(); ++r) {
    CHECK(op2.c0[r] == 2.0 * op1.c0[r]);
    CHECK(op2.cE[r] == 2.0 * op1.cE[r]);
    CHECK(op2.cN[r] == 2.0 * op1.cN[r]);
  }
}

TEST_CASE("centered drift adds +-b/2h to the x arms") {
  const double h = 1.0 / 16;
  const auto dom = square(h);
  CoefficientField c;
  c.bxc = 1.0;
  const auto op = assemble_operator(dom, c);
  CHECK_FALSE(op.upwinded);
  const int r = center_row(op);
  CHECK(op.cE[r] == doctest::Approx(1.0 / (h * h) + 1.0 / (2 * h)).epsilon(1e-13));
  CHECK(op.cW[r] == doctest::Approx(1.0 / (h * h) - 1.0 / (2 * h)).epsilon(1e-13));
  CHECK(op.cN[r] == doctest::Approx(1.0 / (h * h)).epsilon(1e-13));
}

TEST_CASE("large drift switches to one-sided differences, off-diagonals stay nonnegative") {
  const double h = 1.0 / 16;
  const auto dom = square(h);
  CoefficientField c;
  c.bxc = 50.0;
  c.byc = -40.0;
  const auto op = assemble_operator(dom, c);
  CHECK(op.upwinded);
  CHECK(op.peclet >= 1.0);
  for (int r = 0; r < op.nrows(); ++r) {
    CHECK(op.cE[r] >= 0.0);
    CHECK(op.cW[r] >= 0.0);
    CHECK(op.cN[r] >= 0.0);
    CHECK(op.cS[r] >= 0.0);
    CHECK(op.c0[r] < 0.0);
  }
}

TEST_CASE("cross terms assemble the nine-point stencil on cut-free grids") {
  const double h = 1.0 / 16;
  const auto dom = square(h);
  CoefficientField c;
  c.a12c = 0.25;
  c.beta = 0.5;
  const auto op = assemble_operator(dom, c);
  REQUIRE(op.has_cross);
  const int r = center_row(op);
  CHECK(op.cNE[r] == doctest::Approx(0.25 / (2 * h * h)).epsilon(1e-13));
  CHECK(op.cSW[r] == doctest::Approx(0.25 / (2 * h * h)).epsilon(1e-13));
  CHECK(op.cNW[r] == doctest::Approx(-0.25 / (2 * h * h)).epsilon(1e-13));
  CHECK(op.cSE[r] == doctest::Approx(-0.25 / (2 * h * h)).epsilon(1e-13));
}

TEST_CASE("cross terms rejected on domains with boundary cuts") {
  CoefficientField c;
  c.a12c = 0.25;
  c.beta = 0.5;
  CHECK_THROWS_AS(assemble_operator(disk(1.0, 1.0 / 32), c),
                  std::invalid_argument);
}

TEST_CASE("ellipticity violations rejected") {
  CoefficientField c;
  c.a11f = [](double x, double) { return 1.0 + x; };  // negative on the left
  CHECK_THROWS_AS(assemble_operator(square(1.0 / 16), c),
                  std::invalid_argument);
}

TEST_CASE("torsion on the unit disk reproduces (1-r^2)/4") {
  // the radial solution is quadratic, so Shortley-Weller is exact up to
  // solver tolerance
  const auto dom = disk(1.0, 1.0 / 32);
  const auto res = solve_torsion(dom, CoefficientField::identity());
  REQUIRE(res.stats.converged);
  double err = 0.0;
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i) {
      if (!dom->is_interior(i, j)) continue;
      const double r2 = dom->x(i) * dom->x(i) + dom->y(j) * dom->y(j);
      err = std::max(err, std::fabs(res.u.at(i, j) - 0.25 * (1.0 - r2)));
    }
  CHECK(err < 1e-7);
  const int ic = (dom->nx - 1) / 2, jc = (dom->ny - 1) / 2;
  CHECK(std::fabs(res.u.at(ic, jc) - 0.25) < 2.0 / (32.0 * 32.0));
}

TEST_CASE("zero data gives the zero solution") {
  const auto dom = disk(1.0, 1.0 / 16);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  const ScalarField rhs(dom);
  const auto res = solve_linear_system(op, rhs, 0.0, 0.0);
  CHECK(res.stats.converged);
  CHECK(res.u.max_interior() == 0.0);
  CHECK(res.u.min_interior() == 0.0);
}

TEST_CASE("manufactured solution on the square") {
  const double h = 1.0 / 32;
  const auto dom = square(h);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  ScalarField rhs(dom);
  const double k = 0.5 * std::numbers::pi;
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      if (dom->is_interior(i, j))
        rhs.at(i, j) =
            -2.0 * k * k * std::cos(k * dom->x(i)) * std::cos(k * dom->y(j));
  const auto res = solve_linear_system(op, rhs, 0.0, 0.0);
  REQUIRE(res.stats.converged);
  double err = 0.0;
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      if (dom->is_interior(i, j))
        err = std::max(err, std::fabs(res.u.at(i, j) -
                                      std::cos(k * dom->x(i)) *
                                          std::cos(k * dom->y(j))));
  CHECK(err < 4.0 * h * h);
}

TEST_CASE("manufactured convergence on the disk at order >= 1.8") {
  auto solve_err = [](double h) {
    const auto dom = disk(1.0, h);
    const auto op = assemble_operator(dom, CoefficientField::identity());
    ScalarField rhs(dom);
    for (int j = 0; j < dom->ny; ++j)
      for (int i = 0; i < dom->nx; ++i)
        if (dom->is_interior(i, j)) {
          const double r2 = dom->x(i) * dom->x(i) + dom->y(j) * dom->y(j);
          rhs.at(i, j) = -8.0 + 16.0 * r2;  // Laplacian of (1-r^2)^2
        }
    const auto res = solve_linear_system(op, rhs, 0.0, 0.0);
    REQUIRE(res.stats.converged);
    double err = 0.0;
    for (int j = 0; j < dom->ny; ++j)
      for (int i = 0; i < dom->nx; ++i)
        if (dom->is_interior(i, j)) {
          const double r2 = dom->x(i) * dom->x(i) + dom->y(j) * dom->y(j);
          const double exact = (1.0 - r2) * (1.0 - r2);
          err = std::max(err, std::fabs(res.u.at(i, j) - exact));
        }
    return err;
  };
  const double e1 = solve_err(1.0 / 16);
  const double e2 = solve_err(1.0 / 32);
  const double e3 = solve_err(1.0 / 64);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("discrete maximum principle and monotonicity in the data") {
  const auto dom = disk(1.0, 1.0 / 16);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  ScalarField rhs(dom);
  for (const int p : op.rows) rhs.v[p] = -0.5;
  const auto u1 = solve_linear_system(op, rhs, 0.0, 0.0);
  CHECK(u1.u.min_interior() >= 0.0);
  for (const int p : op.rows) rhs.v[p] = -1.5;
  const auto u2 = solve_linear_system(op, rhs, 0.0, 0.0);
  for (const int p : op.rows) CHECK(u2.u.v[p] >= u1.u.v[p] - 1e-12);
}

TEST_CASE("principal eigenvalue of the disk matches the Bessel oracle") {
  const auto ep = principal_eigenpair(disk(1.0, 1.0 / 64),
                                      CoefficientField::identity(), {});
  REQUIRE(ep.converged);
  const double j01 = oracles::bessel_j0_zero1();
  CHECK(std::fabs(ep.lambda1 - j01 * j01) / (j01 * j01) < 0.01);
  CHECK(ep.residual <= 1e-8);
  CHECK(ep.phi.max_interior() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ep.phi.min_interior() > 0.0);
}

TEST_CASE("principal eigenvalue of the square is pi^2/2") {
  const auto ep = principal_eigenpair(square(1.0 / 64),
                                      CoefficientField::identity(), {});
  REQUIRE(ep.converged);
  const double exact = 0.5 * std::numbers::pi * std::numbers::pi;
  CHECK(std::fabs(ep.lambda1 - exact) / exact < 0.01);
}

TEST_CASE("doubling A doubles the eigenvalue") {
  const auto d = disk(1.0, 1.0 / 32);
  const auto e1 = principal_eigenpair(d, CoefficientField::identity(), {});
  const auto e2 = principal_eigenpair(d, CoefficientField::scaled_identity(2.0), {});
  REQUIRE(e1.converged);
  REQUIRE(e2.converged);
  CHECK(e2.lambda1 == doctest::Approx(2.0 * e1.lambda1).epsilon(1e-6));
}

TEST_CASE("eigenpair with a zeroth-order term shifts accordingly") {
  const auto d = disk(1.0, 1.0 / 32);
  const auto e0 = principal_eigenpair(d, CoefficientField::identity(), {});
  const auto e10 = principal_eigenpair(d, CoefficientField::identity(),
                                       [](double, double) { return 10.0; });
  REQUIRE(e10.converged);
  CHECK(e10.lambda1 == doctest::Approx(e0.lambda1 - 10.0).epsilon(1e-7));
  CHECK(e10.lambda1 < 0.0);
}

TEST_CASE("monotone iteration solves the linear torsion case in one sweep") {
  const auto dom = disk(1.0, 1.0 / 16);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  const auto torsion = solve_torsion(dom, CoefficientField::identity());
  const auto f = NonlinearitySpec::constant(1.0);

  ScalarField sub(dom);
  ScalarField super = torsion.u;
  for (auto& v : super.v) v *= 1.05;
  const auto res = monotone_semilinear_solve(
      op, f, sub, super, constant_trace(0.0, 0.0),
      field_trace(torsion.u, 1.05), 0.0, 0.0);
  REQUIRE(res.converged);
  CHECK(linf_diff(res.u, torsion.u) < 1e-8);
}

TEST_CASE("logistic problem brackets and certifies uniqueness") {
  const double gamma = 10.0;
  const auto dom = disk(1.0, 1.0 / 32);
  const auto op = assemble_operator(dom, CoefficientField::identity());
  const auto f = NonlinearitySpec::logistic(gamma, 2.0);

  const auto ep = principal_eigenpair(dom, CoefficientField::identity(),
                                      f.zeta);
  REQUIRE(ep.converged);
  REQUIRE(ep.lambda1 < 0.0);  // gamma beats the Dirichlet eigenvalue

  const auto psi = solve_torsion(dom, CoefficientField::identity());
  const double D = f.sup_bound;  // f <= C, so C psi dominates

  double delta = 0.5;
  auto scaled = [&](const ScalarField& base, double s) {
    ScalarField out = base;
    for (auto& v : out.v) v *= s;
    return out;
  };
  // shrink the subsolution until discretely feasible below D psi
  while (delta > 1e-6) {
    const auto rep = check_subsolution(op, f, scaled(ep.phi, delta),
                                       field_trace(ep.phi, delta), 1e-6);
    bool below = true;
    for (const int p : op.rows)
      below = below && delta * ep.phi.v[p] <= D * psi.u.v[p];
    if (rep.ok && below) break;
    delta *= 0.5;
  }
  const ScalarField sub = scaled(ep.phi, delta);
  const ScalarField super = scaled(psi.u, D);

  MonotoneOptions opts;
  auto down = monotone_semilinear_solve(op, f, sub, super,
                                        field_trace(ep.phi, delta),
                                        field_trace(psi.u, D), 0.0, 0.0, opts);
  REQUIRE(down.converged);
  CHECK(down.u.min_interior() > 0.0);
  CHECK(down.u.max_interior() <= gamma);

  opts.start_from_super = false;
  const auto up = monotone_semilinear_solve(op, f, sub, super,
                                            field_trace(ep.phi, delta),
                                            field_trace(psi.u, D), 0.0, 0.0, opts);
  REQUIRE(up.converged);
  CHECK(linf_diff(down.u, up.u) <= 1e-6);
}

TEST_CASE("harmonic interpolation between ring boundary values") {
  const auto outer = build_disk_domain({0, 0}, 1.0, 1.0 / 64);
  const auto ring = std::make_shared<const GridDomain>(
      build_ring_domain(outer, {0.3, 0.0}, 0.15, HoleSpec{}, 1.0 / 64));
  const auto op = assemble_operator(ring, CoefficientField::identity());
  const double M = 2.0;
  const ScalarField rhs(ring);
  const auto res = solve_linear_system(op, rhs, 0.0, M);
  REQUIRE(res.stats.converged);
  CHECK(res.u.min_interior() > 0.0);
  CHECK(res.u.max_interior() < M);
}

TEST_CASE("quadratic trace extrapolation is exact on affine fields") {
  const auto outer = build_disk_domain({0, 0}, 1.0, 1.0 / 32);
  const auto dom = std::make_shared<const GridDomain>(outer);
  ScalarField lin(dom);
  for (int j = 0; j < dom->ny; ++j)
    for (int i = 0; i < dom->nx; ++i)
      lin.at(i, j) = 2.0 * dom->x(i) - 0.5 * dom->y(j);

  const auto ring = std::make_shared<const GridDomain>(
      build_ring_domain(outer, {0.3, 0.0}, 0.1, HoleSpec{}, 1.0 / 32));
  const auto trace = field_trace(lin, 1.0);
  for (int j = 0; j < ring->ny; ++j)
    for (int i = 0; i < ring->nx; ++i) {
      if (!ring->is_interior(i, j)) continue;
      for (int arm = 0; arm < 4; ++arm) {
        if (ring->is_interior(i + arm_step[arm][0], j + arm_step[arm][1]))
          continue;
        if (ring->cut_label[ring->idx(i, j)][arm] !=
            static_cast<std::uint8_t>(Boundary::inner))
          continue;
        const double t = ring->cut[ring->idx(i, j)][arm];
        const double cx = ring->x(i) + arm_step[arm][0] * t * ring->h;
        const double cy = ring->y(j) + arm_step[arm][1] * t * ring->h;
        const double expect = 2.0 * cx - 0.5 * cy;
        CHECK(trace(i, j, arm, t, Boundary::inner) ==
              doctest::Approx(expect).epsilon(1e-12));
      }
    }
}

TEST_CASE("nonlinearity specs expose their structure") {
  const auto dom = build_rect_domain(-1, 1, -1, 1, 1.0 / 8);
  const auto lg = NonlinearitySpec::logistic(10.0, 2.0);
  CHECK(lg.sup_bound == doctest::Approx(25.0));
  CHECK(lg.zero_at_zero);
  CHECK(lg.decay_threshold.value() == doctest::Approx(10.0));
  CHECK(lg.zeta(0.0, 0.0) == 10.0);
  CHECK(lg.ratio_nonincreasing(dom, 20.0));
  // |f'| = |10 - 2s| reaches 30 at s = 20; inflated by 1.5
  CHECK(lg.lipschitz_on(dom, 0.0, 20.0) == doctest::Approx(45.0).epsilon(0.01));

  const auto ct = NonlinearitySpec::constant(3.0);
  CHECK(ct.sup_bound == 3.0);
  CHECK_FALSE(ct.zero_at_zero);
  CHECK(ct.ratio_nonincreasing(dom, 10.0));
}

TEST_SUITE_END();
