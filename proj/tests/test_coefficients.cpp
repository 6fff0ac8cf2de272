#include "oblab/coefficients.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oblab/io.hpp"

using namespace oblab;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "oblab_test_coefficients";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("symmetric matrix eigenvalues and quadratic form") {
  const SymMatrix2 a{2.0, 1.0, 2.0};
  CHECK(a.eig_min() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.eig_max() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(a.max_abs_entry() == 2.0);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(a.quad({inv_sqrt2, inv_sqrt2}) == doctest::Approx(3.0));
  CHECK(a.quad({inv_sqrt2, -inv_sqrt2}) == doctest::Approx(1.0));
  CHECK(a.quad({1.0, 0.0}) == doctest::Approx(2.0));

  const SymMatrix2 degenerate{1.0, 1.0, 1.0};
  CHECK(degenerate.eig_min() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(degenerate.eig_max() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("oscillating profile: junction, extrema, and point values") {
  // Junction radius for odd index m and speed s is exp(-exp(m/s)); the two
  // branches meet continuously there because the cosine sits at -1.
  const double omega = counterexample_omega(1, 4.0);
  CHECK(omega == doctest::Approx(0.27692033409990896).epsilon(1e-15));
  const RadialProfile f = counterexample_profile(omega, 4.0);

  CHECK(f.value_at(0.5) == 2.0);
  CHECK(f.value_at(omega + 1e-12) == 2.0);
  CHECK(f.value_at(omega - 1e-12) == doctest::Approx(2.0).epsilon(1e-6));

  // Frozen with tests/oracles/radial_profile_values.py.
  CHECK(f.value_at(0.25) == doctest::Approx(2.214476039698175).epsilon(1e-12));
  CHECK(f.value_at(0.2) == doctest::Approx(2.9772171329099084).epsilon(1e-12));
  CHECK(f.value_at(0.12) == doctest::Approx(2.0000936715769035).epsilon(1e-12));
  CHECK(f.value_at(0.05) == doctest::Approx(2.671207978341289).epsilon(1e-12));
  CHECK(f.value_at(0.01) == doctest::Approx(2.9711184395568937).epsilon(1e-12));

  // Phase extrema: cos = +1 at exponent index 2k (value 3), cos = -1 at
  // 2k + 1 (value 2), at radii exp(-exp(index / s)).
  const double r_even = std::exp(-std::exp(2.0 / 4.0));
  const double r_odd = std::exp(-std::exp(3.0 / 4.0));
  CHECK(r_even == doctest::Approx(0.1922956455479649).epsilon(1e-15));
  CHECK(r_odd == doctest::Approx(0.12039226207982957).epsilon(1e-15));
  CHECK(f.value_at(r_even) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.value_at(r_odd) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(f.min_value() == 2.0);
  CHECK(f.max_value() == 3.0);
  CHECK(f.differentiable());
  CHECK(f.jump_radii(1e-6, 1.0).empty());

  // r f'(r) from the chain rule: (pi s / 2) sin(pi s log(-log r)) / (-log r).
  CHECK(0.25 * f.derivative_at(0.25) == doctest::Approx(-3.7206902524020347).epsilon(1e-12));
  CHECK(0.05 * f.derivative_at(0.05) == doctest::Approx(1.9705890090644766).epsilon(1e-12));
  CHECK(f.derivative_at(0.5) == 0.0);
}

TEST_CASE("oscillating profile rejects branch mismatch at the junction") {
  CHECK_THROWS_AS(counterexample_profile(0.2, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(counterexample_omega(2, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(counterexample_omega(-1, 4.0), std::invalid_argument);
  CHECK_NOTHROW(counterexample_profile(counterexample_omega(3, 4.0), 4.0));
}

TEST_CASE("profile stays bounded at the nonpositive-radius quadrature endpoint") {
  const RadialProfile f = counterexample_profile(counterexample_omega(1, 4.0), 4.0);
  CHECK(f.value_at(0.0) >= f.min_value());
  CHECK(f.value_at(0.0) <= f.max_value());
  CHECK(f.value_at(-0.1) >= f.min_value());
  CHECK(std::isfinite(f.derivative_at(1e-300)));
}

TEST_CASE("dyadic step profile alternates on annuli and lists its jumps") {
  const RadialProfile f = RadialProfile::dyadic_step(2.0, 3.0);
  CHECK(f.value_at(0.75) == 2.0);   // [1/2, 1): k = 0
  CHECK(f.value_at(0.3) == 3.0);    // [1/4, 1/2): k = 1
  CHECK(f.value_at(0.15) == 2.0);   // [1/8, 1/4): k = 2
  CHECK(f.value_at(0.08) == 3.0);   // [1/16, 1/8): k = 3
  CHECK_FALSE(f.differentiable());
  CHECK_THROWS_AS(f.derivative_at(0.3), std::logic_error);

  const auto jumps = f.jump_radii(0.06, 0.6);
  REQUIRE(jumps.size() == 4);
  CHECK(jumps[0] == doctest::Approx(0.0625));
  CHECK(jumps[1] == doctest::Approx(0.125));
  CHECK(jumps[2] == doctest::Approx(0.25));
  CHECK(jumps[3] == doctest::Approx(0.5));

  CHECK(f.inner_constant() == std::nullopt);
  CHECK(RadialProfile::constant(2.5).inner_constant() == 2.5);
}

TEST_CASE("constant coefficient field declares exact eigenvalue bounds") {
  const Grid g = build_grid(2.0, 16, {0.0, 0.0});
  const CoefficientField field = constant_field(g, {2.0, 1.0, 2.0});
  CHECK(field.lambda_lo == doctest::Approx(1.0));
  CHECK(field.lambda_hi == doctest::Approx(3.0));

  const EllipticityReport rep = ellipticity_report(field);
  CHECK(rep.positive());
  CHECK(rep.bound_violations == 0);
  CHECK(rep.lambda_min == doctest::Approx(1.0));
  CHECK(rep.lambda_max == doctest::Approx(3.0));
}

TEST_CASE("radial scalar field samples the profile at cell centers") {
  const Grid g = build_grid(2.0, 64, {0.0, 0.0});
  const RadialProfile f = counterexample_profile(counterexample_omega(1, 4.0), 4.0);
  const CoefficientField field = radial_scalar_field(g, f);

  for (int j : {1, 13, 32, 50}) {
    for (int i : {2, 17, 32, 61}) {
      const Point p = g.cell_center(i, j);
      const double r = std::hypot(p[0], p[1]);
      const int k = g.index(i, j);
      CHECK(field.a11[k] == doctest::Approx(f.value_at(r)).epsilon(1e-14));
      CHECK(field.a12[k] == 0.0);
      CHECK(field.a22[k] == field.a11[k]);
    }
  }
  // Declared bounds are the sampled range: the outer plateau pins the lower
  // bound at exactly 2; the upper bound is the largest sampled value, which
  // sits just below the phase maximum 3.
  CHECK(field.lambda_lo == doctest::Approx(2.0));
  CHECK(field.lambda_hi <= 3.0);
  CHECK(field.lambda_hi > 2.99);
}

TEST_CASE("constant fields are fixed points of mollification") {
  const Grid g = build_grid(2.0, 32, {0.0, 0.0});
  const ScalarField c = ScalarField::constant(g, 1.7);
  const ScalarField smoothed = mollify(c, 0.2);
  for (int k = 0; k < g.size(); ++k)
    CHECK(smoothed.values[k] == doctest::Approx(1.7).epsilon(1e-14));
}

TEST_CASE("mollification is linear and monotone") {
  const Grid g = build_grid(2.0, 24, {0.0, 0.0});
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScalarField a = ScalarField::zeros(g);
  ScalarField b = ScalarField::zeros(g);
  for (int k = 0; k < g.size(); ++k) {
    a.values[k] = u(rng);
    b.values[k] = u(rng);
  }

  const double eps = 0.25;
  const ScalarField ma = mollify(a, eps);
  const ScalarField mb = mollify(b, eps);

  // Linearity: M(2a + 3b) = 2 M(a) + 3 M(b).
  ScalarField combo = ScalarField::zeros(g);
  for (int k = 0; k < g.size(); ++k) combo.values[k] = 2.0 * a.values[k] + 3.0 * b.values[k];
  const ScalarField mcombo = mollify(combo, eps);
  for (int k = 0; k < g.size(); ++k)
    CHECK(mcombo.values[k] ==
          doctest::Approx(2.0 * ma.values[k] + 3.0 * mb.values[k]).epsilon(1e-12));

  // Monotonicity: a <= a + b (b >= 0) implies M(a) <= M(a + b).
  ScalarField bigger = ScalarField::zeros(g);
  for (int k = 0; k < g.size(); ++k) bigger.values[k] = a.values[k] + b.values[k];
  const ScalarField mbigger = mollify(bigger, eps);
  for (int k = 0; k < g.size(); ++k) CHECK(ma.values[k] <= mbigger.values[k] + 1e-13);

  // Range bound: smoothing a [0,1] field stays in [0,1].
  for (int k = 0; k < g.size(); ++k) {
    CHECK(ma.values[k] >= -1e-13);
    CHECK(ma.values[k] <= 1.0 + 1e-13);
  }
}

TEST_CASE("mollification requires a radius of at least one cell") {
  const Grid g = build_grid(2.0, 16, {0.0, 0.0});
  const ScalarField c = ScalarField::constant(g, 1.0);
  CHECK_THROWS_AS(mollify(c, 0.5 * g.h()), std::invalid_argument);
  CHECK_NOTHROW(mollify(c, g.h()));
}

TEST_CASE("coefficient mollification preserves declared ellipticity bounds") {
  const Grid g = build_grid(2.0, 32, {0.0, 0.0});
  const RadialProfile f = counterexample_profile(counterexample_omega(1, 4.0), 4.0);
  const CoefficientField field = radial_scalar_field(g, f);
  const CoefficientField smoothed = mollify(field, 0.1);
  CHECK(smoothed.lambda_lo >= field.lambda_lo - 1e-12);
  CHECK(smoothed.lambda_hi <= field.lambda_hi + 1e-12);
  const EllipticityReport rep = ellipticity_report(smoothed);
  CHECK(rep.positive());
  CHECK(rep.bound_violations == 0);
}

TEST_CASE("ball averages match the radial quadrature oracle") {
  const Grid g = build_grid(2.0, 512, {0.0, 0.0});
  const RadialProfile f = counterexample_profile(counterexample_omega(1, 4.0), 4.0);
  const CoefficientField field = radial_scalar_field(g, f);

  // Disk averages (2/R^2) int_0^R f(r) r dr frozen with
  // tests/oracles/radial_profile_values.py. The cell average differs from
  // the continuum one by O(h/R) near the oscillation, hence the tolerances.
  struct Case {
    double R;
    double want;
    double tol;
  };
  for (const Case c : {Case{0.5, 2.149364608520391, 0.005},
                       Case{0.25, 2.581240468892307, 0.01},
                       Case{0.12, 2.4593807763593243, 0.02}}) {
    const SymMatrix2 avg = averaged_matrix(field, {0.0, 0.0}, c.R);
    CHECK(avg.a11 == doctest::Approx(c.want).epsilon(0).scale(0).epsilon(c.tol / c.want));
    CHECK(avg.a12 == 0.0);
    CHECK(avg.a22 == avg.a11);
  }

  // Away from the origin on a constant plateau the average is exact.
  const SymMatrix2 plateau = averaged_matrix(field, {0.7, 0.0}, 0.1);
  CHECK(plateau.a11 == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("averaged_matrix validates its window") {
  const Grid g = build_grid(2.0, 32, {0.0, 0.0});
  const CoefficientField field = constant_field(g, {1.0, 0.0, 1.0});
  CHECK_THROWS_AS(averaged_matrix(field, {0.0, 0.0}, g.h()), std::invalid_argument);
  CHECK_THROWS_AS(averaged_matrix(field, {0.99, 0.0}, 0.25), std::invalid_argument);
}

TEST_CASE("coefficient files round-trip all three channels") {
  const Grid g = build_grid(1.0, 12, {0.1, 0.2});
  CoefficientField field = constant_field(g, {2.0, 0.5, 3.0});
  field.a12[g.index(4, 7)] = -0.25;

  const auto path = scratch_dir() / "coeffs.field3";
  write_coefficients(path, field);
  const CoefficientField back = read_coefficients(path);
  CHECK(back.grid.same_as(g));
  CHECK(back.a11 == field.a11);
  CHECK(back.a12 == field.a12);
  CHECK(back.a22 == field.a22);
}
