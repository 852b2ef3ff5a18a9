#include <cmath>
#include <random>

#include "doctest.h"
#include "pics/errors.hpp"
#include "pics/models_nlr.hpp"
#include "pics/numcore.hpp"

using namespace pics;

namespace {

const NlrKind kM1{NlrModel::M1, 0.0};
const NlrKind kM2{NlrModel::M2, 86.67};
const NlrKind kM3{NlrModel::M3, 0.0};
const ParamVector kTheta2{32.11, 105.65};
const ParamVector kTheta3{32.11, 105.65, 86.67};

// |fd - an| / |an|. At x = x0 the x0-derivative vanishes while the central
// difference straddles the branch switch, so componentwise ratios are not used.
double grad_error(const NlrKind& kind, const ParamVector& theta, double x) {
  const ParamVector an = growth_grad(kind, theta, x);
  const ParamVector fd = central_diff_gradient(
      [&](const ParamVector& t) { return growth_mean(kind, t, x); }, theta);
  ParamVector diff(an.size());
  for (std::size_t k = 0; k < an.size(); ++k) diff[k] = fd[k] - an[k];
  return norm(diff) / norm(an);
}

}  // namespace

TEST_CASE("linear branch coefficients") {
  const LinearCoeffs at_equal = reduced_linear_coeffs(2.0, 50.0, 50.0);
  CHECK(std::abs(at_equal.a) < 1e-14);
  CHECK(at_equal.b == doctest::Approx(2.0 * std::exp(-1.0) / 50.0));

  const double a1 = 32.11, a2 = 105.65, x0 = 86.67;
  const LinearCoeffs c = reduced_linear_coeffs(a1, a2, x0);
  const auto expo = [&](double x) { return a1 * std::exp(-a2 / x); };
  CHECK(std::abs(expo(x0) - (c.a + c.b * x0)) < 1e-10);
  const double h = 1e-5;
  CHECK(std::abs((expo(x0 + h) - expo(x0 - h)) / (2 * h) - c.b) < 1e-8);

  for (double x : {10.0, 60.0, 150.0}) {
    const LinearCoeffs k = reduced_linear_coeffs(3.0, 40.0, x);
    CHECK(k.a + k.b * x == doctest::Approx(3.0 * std::exp(-40.0 / x)).epsilon(1e-13));
  }
}

TEST_CASE("growth_mean values") {
  CHECK(growth_mean(kM1, {4.0, 25.0}, 25.0) == doctest::Approx(4.0 * std::exp(-1.0)));
  // Independent evaluation: 32.11 * exp(-105.65 / 210).
  CHECK(growth_mean(kM1, kTheta2, 210.0) == doctest::Approx(19.415510753678003).epsilon(1e-13));
  const double left = kTheta2[0] * std::exp(-kTheta2[1] / 86.67);
  CHECK(std::abs(growth_mean(kM2, kTheta2, 86.67) - left) < 1e-10);
  CHECK(std::abs(growth_mean(kM3, kTheta3, 86.67) - left) < 1e-10);
  // Linear above x0.
  const double g1 = growth_mean(kM2, kTheta2, 120.0);
  const double g2 = growth_mean(kM2, kTheta2, 160.0);
  const double g3 = growth_mean(kM2, kTheta2, 200.0);
  CHECK(g3 - g2 == doctest::Approx(g2 - g1));
  CHECK_THROWS_AS(growth_mean(kM1, kTheta2, 0.0), DomainError);
  CHECK_THROWS_AS(growth_grad(kM3, kTheta3, -1.0), DomainError);
}

TEST_CASE("growth_grad shape") {
  for (double x : {1.0, 30.0, 210.0}) {
    const ParamVector g = growth_grad(kM1, kTheta2, x);
    CHECK(g[0] == doctest::Approx(std::exp(-kTheta2[1] / x)));
    CHECK(g[0] > 0.0);
  }
  for (double x : {5.0, 50.0, 86.0}) CHECK(growth_grad(kM3, kTheta3, x)[2] == 0.0);
}

TEST_CASE("growth_grad matches central differences at fixed points") {
  for (double x : {5.0, 50.0, 86.67, 150.0, 210.0}) {
    CAPTURE(x);
    CHECK(grad_error(kM1, kTheta2, x) < 1e-6);
    CHECK(grad_error(kM2, kTheta2, x) < 1e-6);
    CHECK(grad_error(kM3, kTheta3, x) < 1e-6);
  }
}

TEST_CASE("growth_grad matches central differences at random points") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(0.5, 210.0), ua1(5.0, 60.0), ua2(20.0, 200.0),
      ux0(30.0, 180.0);
  for (int i = 0; i < 20; ++i) {
    const double x = ux(rng);
    const ParamVector t2{ua1(rng), ua2(rng)};
    const ParamVector t3{t2[0], t2[1], ux0(rng)};
    const NlrKind m2{NlrModel::M2, ux0(rng)};
    CAPTURE(x);
    CHECK(grad_error(kM1, t2, x) < 1e-6);
    CHECK(grad_error(m2, t2, x) < 1e-6);
    CHECK(grad_error(kM3, t3, x) < 1e-6);
  }
}

TEST_CASE("fisher_info_nlr") {
  const NoiseSpec noise{0.086};
  const double x = 70.0;
  const SymMatrix m = fisher_info_nlr(kM1, kTheta2, x, noise);
  CHECK(m(0, 1) ==
        doctest::Approx(-kTheta2[0] / x * std::exp(-2.0 * kTheta2[1] / x) / noise.sigma2));
  CHECK(m(0, 0) == doctest::Approx(std::exp(-2.0 * kTheta2[1] / x) / noise.sigma2));
  CHECK(m(0, 0) >= 0.0);
  CHECK(m(1, 1) >= 0.0);

  for (double xx : {3.0, 86.67, 140.0}) {
    CHECK(std::abs(det(fisher_info_nlr(kM1, kTheta2, xx, noise))) < 1e-12);
    CHECK(std::abs(det(fisher_info_nlr(kM3, kTheta3, xx, noise))) < 1e-12);
  }

  const SymMatrix f = fisher_info_nlr(kM2, kTheta2, 210.0, noise);
  const ParamVector g = growth_grad(kM2, kTheta2, 210.0);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(f(r, c) == doctest::Approx(g[r] * g[c] / noise.sigma2));
}

TEST_CASE("simulate_response_nlr") {
  Rng rng(3);
  CHECK(simulate_response_nlr(kM1, kTheta2, {0.0}, 100.0, rng) == growth_mean(kM1, kTheta2, 100.0));

  Rng a(99), b(99);
  for (int i = 0; i < 5; ++i) {
    CHECK(simulate_response_nlr(kM2, kTheta2, {0.086}, 100.0, a) ==
          simulate_response_nlr(kM2, kTheta2, {0.086}, 100.0, b));
  }

  Rng r(5);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = simulate_response_nlr(kM1, kTheta2, {0.086}, 100.0, r);
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1);
  CHECK(std::abs(mean - growth_mean(kM1, kTheta2, 100.0)) < 3.0 * std::sqrt(0.086) / 100.0);
  CHECK(std::abs(var - 0.086) < 0.1 * 0.086);
}
