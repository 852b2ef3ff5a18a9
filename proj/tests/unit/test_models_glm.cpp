#include <cmath>

#include "doctest.h"
#include "pics/models_glm.hpp"

using namespace pics;

TEST_CASE("level point ordering") {
  for (std::size_t k = 0; k < 4; ++k) CHECK(kLevelPoints[k].index() == k);
  CHECK(kLevelPoints[1].x1 == 1);
  CHECK(kLevelPoints[1].x2 == -1);
  CHECK(kLevelPoints[2] < kLevelPoints[3]);
}

TEST_CASE("success_prob") {
  for (const auto& p : kLevelPoints) CHECK(success_prob({0, 0, 0}, p) == 0.5);
  const GlmParams b{0.7125, 0.7125, 0.7125};
  // logistic(2.1375)
  CHECK(success_prob(b, {1, 1}) == doctest::Approx(0.8944949086405465).epsilon(1e-13));
  for (const GlmParams beta : {b, GlmParams{1.5, 0.5, 0.0}, GlmParams{-3.0, 2.0, 0.25}})
    for (const auto& p : kLevelPoints) CHECK(success_prob(beta, p) + success_prob(-beta, p) == doctest::Approx(1.0));
  CHECK(success_prob({800.0, 0, 0}, {1, 1}) == 1.0);
  CHECK(success_prob({-800.0, 0, 0}, {1, 1}) >= 0.0);
}

TEST_CASE("bernoulli_weight") {
  for (const auto& p : kLevelPoints) CHECK(bernoulli_weight({0, 0, 0}, p) == 0.25);
  const GlmParams b{1.5, 0.5, 0.0};
  for (const auto& p : kLevelPoints) CHECK(bernoulli_weight(b, p) == doctest::Approx(bernoulli_weight(-b, p)));
  // e^eta / (1 + e^eta)^2 at eta = 2 and eta = 1.
  CHECK(bernoulli_weight(b, {1, 1}) == doctest::Approx(0.10499358540350652).epsilon(1e-12));
  CHECK(bernoulli_weight(b, {1, -1}) == doctest::Approx(0.10499358540350652).epsilon(1e-12));
  CHECK(bernoulli_weight(b, {-1, 1}) == doctest::Approx(0.19661193324148185).epsilon(1e-12));
  CHECK(bernoulli_weight({900.0, 0, 0}, {1, 1}) >= 0.0);
}

TEST_CASE("fisher_info_glm") {
  const SymMatrix m = fisher_info_glm({0, 0, 0}, {1, 1});
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(m(r, c) == doctest::Approx(0.25));
  CHECK(std::abs(det(fisher_info_glm({0.3, -1.2, 0.7}, {-1, 1}))) < 1e-15);

  // Equal weights at beta = 0 against the explicit X^T W X product.
  const double xs[4][3] = {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}};
  SymMatrix avg(3);
  for (const auto& p : kLevelPoints) avg += fisher_info_glm({0, 0, 0}, p) * 0.25;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (const auto& row : xs) s += row[r] * 0.25 * 0.25 * row[c];
      CHECK(avg(r, c) == doctest::Approx(s));
    }
  }
  CHECK(avg(0, 0) == doctest::Approx(0.25));
  CHECK(avg(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("simulate_binary") {
  Rng rng(1);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += simulate_binary({50.0, 0, 0}, {1, 1}, rng);
  CHECK(ones == 10000);
  ones = 0;
  for (int i = 0; i < 10000; ++i) ones += simulate_binary({0, 0, 0}, {-1, 1}, rng);
  CHECK(std::abs(ones / 10000.0 - 0.5) < 0.02);
  Rng a(8), b(8);
  for (int i = 0; i < 50; ++i) CHECK(simulate_binary({0.3, 0.1, 0.2}, {1, -1}, a) == simulate_binary({0.3, 0.1, 0.2}, {1, -1}, b));
}

TEST_CASE("equal-coefficient admissibility boundary") {
  // v11 = 3 v, with v = 1 / w, at the root c0 of the equal-coefficient case.
  const auto gap = [](double b) {
    const GlmParams beta{b, b, b};
    return 1.0 / bernoulli_weight(beta, {1, 1}) - 3.0 / bernoulli_weight(beta, {1, -1});
  };
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(0.83144).epsilon(1e-5));
  CHECK(kEqualCoefficientBound < lo);
}
