#include <cmath>
#include <random>

#include "doctest.h"
#include "pics/errors.hpp"
#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

using namespace pics;

TEST_CASE("det of small symmetric matrices") {
  CHECK(det(SymMatrix::identity(2)) == doctest::Approx(1.0));
  CHECK(det(SymMatrix(2, {2, 0, 0, 3})) == doctest::Approx(6.0));
  CHECK(det(SymMatrix(2, {1, 2, 2, 4})) == doctest::Approx(0.0));
  CHECK(det(SymMatrix(1, {4.5})) == doctest::Approx(4.5));
  // Cofactor expansion by hand: 2(6-1) - 1(2-0) + 0 = 8.
  CHECK(det(SymMatrix(3, {2, 1, 0, 1, 3, 1, 0, 1, 2})) == doctest::Approx(8.0));
}

TEST_CASE("symmetric by construction") {
  SymMatrix m(3, {1, 2, 3, 99, 4, 5, 99, 99, 6});
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(m(r, c) == m(c, r));
  m.set(2, 0, 7.0);
  CHECK(m(0, 2) == 7.0);
  SymMatrix o = SymMatrix::outer({1.0, -2.0, 3.0}, 2.0);
  CHECK(o(0, 1) == doctest::Approx(-4.0));
  CHECK(o(1, 0) == o(0, 1));
  CHECK(o(2, 2) == doctest::Approx(18.0));
}

TEST_CASE("solve_spd") {
  const ParamVector x = solve_spd(SymMatrix::identity(2), {5.0, 7.0});
  CHECK(x[0] == doctest::Approx(5.0));
  CHECK(x[1] == doctest::Approx(7.0));
  const ParamVector y = solve_spd(SymMatrix(2, {4, 0, 0, 9}), {8.0, 27.0});
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(solve_spd(SymMatrix(2, {1, 2, 2, 4}), {1.0, 1.0}), SingularMatrix);
}

TEST_CASE("solve_spd recovers x from random SPD systems") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 3;
    SymMatrix m = SymMatrix::identity(d) * 0.5;
    for (int k = 0; k < 4; ++k) {
      ParamVector g(d);
      for (auto& v : g) v = z(rng);
      m.add_outer(g);
    }
    ParamVector x(d);
    for (auto& v : x) v = z(rng);
    const ParamVector b = m.multiply(x);
    const ParamVector back = solve_spd(m, b);
    for (std::size_t k = 0; k < d; ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-9));
  }
}

TEST_CASE("Cholesky factor reproduces the matrix") {
  const SymMatrix m(3, {4, 2, 0.4, 2, 5, 1, 0.4, 1, 3});
  const Cholesky c(m);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += c.lower(i, k) * c.lower(j, k);
      CHECK(s == doctest::Approx(m(i, j)));
    }
  }
  // |L^T x|^2 = x^T M x
  const ParamVector x{0.3, -1.0, 2.0};
  const ParamVector t = c.transpose_multiply(x);
  const ParamVector mx = m.multiply(x);
  CHECK(t[0] * t[0] + t[1] * t[1] + t[2] * t[2] ==
        doctest::Approx(x[0] * mx[0] + x[1] * mx[1] + x[2] * mx[2]));
}

TEST_CASE("central differences") {
  const ParamVector g1 = central_diff_gradient([](const ParamVector& t) { return t[0] * t[0]; }, {3.0});
  CHECK(std::abs(g1[0] - 6.0) < 1e-6);
  const ParamVector g2 =
      central_diff_gradient([](const ParamVector& t) { return t[0] * t[1]; }, {2.0, 5.0});
  CHECK(std::abs(g2[0] - 5.0) < 1e-6);
  CHECK(std::abs(g2[1] - 2.0) < 1e-6);

  const NlrKind m1{NlrModel::M1, 0.0};
  const ParamVector theta{32.11, 105.65};
  const ParamVector fd = central_diff_gradient(
      [&](const ParamVector& t) { return growth_mean(m1, t, 100.0); }, theta);
  const ParamVector an = growth_grad(m1, theta, 100.0);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(fd[k] - an[k]) / std::abs(an[k]) < 1e-6);
}
