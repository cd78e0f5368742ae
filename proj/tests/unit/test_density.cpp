#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracle.hpp"
#include "skewsim/density.hpp"

using namespace skewsim;

TEST_CASE("alpha one half is the heat kernel") {
  const TransitionDensityModel m(skew_from_alpha(0.5));
  CHECK(m.density(1.0, 0.3, 0.7) == doctest::Approx(oracle::gauss(-0.4, 1.0)).epsilon(1e-14));
  CHECK(m.cdf(2.0, 0.1, 0.5) == doctest::Approx(oracle::Phi(0.4 / std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("four-case formula at a crossing point") {
  // opposite signs: (1 + sgn(y) beta) g(x - y) with beta = 0.4
  const double expected = 2.0 * (1.0 - 0.7) * oracle::gauss(0.5, 1.0);
  CHECK(transition_density(1.0, 0.3, -0.2, skew_from_alpha(0.7)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.21124).epsilon(1e-5));
  CHECK_THROWS_AS(transition_density(0.0, 0.0, 0.0, skew_from_alpha(0.7)), DomainError);
}

TEST_CASE("conservation and sign mass") {
  for (double a : {0.1, 0.3, 0.7, 0.95}) {
    for (double x : {-1.0, 0.0, 0.4}) {
      const TransitionDensityModel m(skew_from_alpha(a));
      const double t = 0.8;
      // the density jumps at 0; the left integral uses the left limit
      const double neg = oracle::simpson([&](double y) { return m.density(t, x, std::min(y, -1e-300)); }, -12.0, 0.0, 4000);
      const double pos = oracle::simpson([&](double y) { return m.density(t, x, y); }, 0.0, 12.0, 4000);
      CHECK(std::abs(neg + pos - 1.0) < 1e-8);
      if (x == 0.0) CHECK(std::abs(pos - a) < 1e-8);
    }
  }
}

TEST_CASE("weighted detailed balance") {
  for (double a : {0.2, 0.7}) {
    const SkewParameter s = skew_from_alpha(a);
    auto w = [&](double z) { return z >= 0.0 ? a : 1.0 - a; };
    for (double x : {-1.3, -0.2, 0.0, 0.5}) {
      for (double y : {-0.7, 0.0, 0.1, 2.0}) {
        const double l = w(x) * transition_density(0.6, x, y, s);
        const double r = w(y) * transition_density(0.6, y, x, s);
        CHECK(std::abs(l - r) <= 1e-13);
      }
    }
  }
}

TEST_CASE("Chapman-Kolmogorov") {
  const SkewParameter s = skew_from_alpha(0.7);
  for (double x : {-0.5, 0.0, 0.8}) {
    for (double y : {-1.0, 0.3}) {
      auto f = [&](double z) { return transition_density(0.4, x, z, s) * transition_density(0.6, z, y, s); };
      auto f_left = [&](double z) { return f(std::min(z, -1e-300)); };
      const double lhs = oracle::simpson(f_left, -12.0, 0.0, 6000) + oracle::simpson(f, 0.0, 12.0, 6000);
      CHECK(std::abs(lhs - transition_density(1.0, x, y, s)) < 1e-7);
    }
  }
}

TEST_CASE("cdf is the integral of the density") {
  const TransitionDensityModel m(skew_from_alpha(0.7));
  for (double x : {-0.4, 0.0, 1.1}) {
    for (double y : {-1.5, -0.1, 0.0, 0.6}) {
      const double lo = -12.0;
      double integral = 0.0;
      if (y <= 0.0) {
        integral = oracle::simpson([&](double z) { return m.density(1.0, x, std::min(z, -1e-300)); }, lo, y, 6000);
      } else {
        integral = oracle::simpson([&](double z) { return m.density(1.0, x, std::min(z, -1e-300)); }, lo, 0.0, 6000) +
                   oracle::simpson([&](double z) { return m.density(1.0, x, z); }, 0.0, y, 2000);
      }
      CHECK(std::abs(m.cdf(1.0, x, y) - integral) < 1e-9);
    }
  }
  CHECK(m.cdf(1.0, 0.0, -1e-300) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(m.cdf(1.0, 0.0, 1e6) == 1.0);
  CHECK(m.cdf(1.0, 0.0, -1e6) == 0.0);
}

TEST_CASE("quantile inverts the cdf") {
  const TransitionDensityModel m(skew_from_alpha(0.25));
  for (double u : {0.01, 0.3, 0.74, 0.76, 0.99}) {
    const double y = m.quantile(0.5, 0.2, u);
    CHECK(std::abs(m.cdf(0.5, 0.2, y) - u) < 1e-10);
  }
}

TEST_CASE("exact sampler reproduces the sign law") {
  const TransitionDensityModel m(skew_from_alpha(0.7));
  RngStream r(5, 0);
  const int n = 200000;
  int pos = 0;
  for (int i = 0; i < n; ++i) pos += m.sample(1.0, 0.0, r) >= 0.0;
  const double se = std::sqrt(0.21 / n);
  CHECK(std::abs(pos / double(n) - 0.7) < 3.0 * se);
  RngStream r2(5, 1);
  const TransitionDraw d = transition_cdf_and_sample(1.0, 0.0, skew_from_alpha(0.7), r2);
  CHECK(d.cdf(0.3) == doctest::Approx(m.cdf(1.0, 0.0, 0.3)));
}

TEST_CASE("semigroup examples") {
  const TransitionDensityModel m(skew_from_alpha(0.7));
  CHECK(m.semigroup_apply(1.0, [](double) { return 3.0; }, 0.4) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(m.semigroup_apply(1.0, [](double y) { return y >= 0.0 ? 1.0 : 0.0; }, 0.0) ==
        doctest::Approx(0.7).epsilon(1e-9));
  // alpha = 1/2: Gaussian bump exp(-y^2/2) smoothed by the heat kernel of variance t
  const TransitionDensityModel bm(skew_from_alpha(0.5));
  const double t = 0.5;
  const double x = 0.3;
  const double closed = std::exp(-x * x / (2.0 * (1.0 + t))) / std::sqrt(1.0 + t);
  CHECK(std::abs(bm.semigroup_apply(t, [](double y) { return std::exp(-y * y / 2.0); }, x) - closed) < 1e-9);
}

TEST_CASE("transmission condition and heat equation away from 0") {
  const double a = 0.7;
  const TransitionDensityModel m(skew_from_alpha(a));
  auto phi = [](double y) { return std::exp(-(y - 0.5) * (y - 0.5)); };
  auto u = [&](double t, double x) { return m.semigroup_apply(t, phi, x); };
  double prev = 0.0;
  for (double h : {0.02, 0.01}) {
    // one-sided second-order differences
    const double dp = (-3.0 * u(1.0, 0.0) + 4.0 * u(1.0, h) - u(1.0, 2.0 * h)) / (2.0 * h);
    const double dm = (3.0 * u(1.0, 0.0) - 4.0 * u(1.0, -h) + u(1.0, -2.0 * h)) / (2.0 * h);
    const double gap = std::abs(a * dp - (1.0 - a) * dm);
    CHECK(gap < 5.0 * h * h);
    if (prev > 0.0) CHECK(gap < prev);
    prev = gap;
  }
  const double x = 0.8;
  const double k = 1e-2;
  const double ut = (u(1.0 + k, x) - u(1.0 - k, x)) / (2.0 * k);
  const double uxx = (u(1.0, x + k) - 2.0 * u(1.0, x) + u(1.0, x - k)) / (k * k);
  CHECK(std::abs(ut - 0.5 * uxx) < 1e-3);
}
