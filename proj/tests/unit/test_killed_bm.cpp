#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "skewsim/core.hpp"
#include "skewsim/killed_bm.hpp"

using namespace skewsim;
namespace k = skewsim::killed;

TEST_CASE("images and eigen forms agree at the switch point") {
  for (double L : {0.5, 2.0}) {
    const double t = 0.5 * (L / 2.0) * (L / 2.0);
    for (double u : {0.1 * L, 0.5 * L, 0.93 * L}) {
      CHECK(std::abs(k::survival(t, u, L, k::Form::images) - k::survival(t, u, L, k::Form::eigen)) < 1e-12);
      CHECK(std::abs(k::right_exit_cdf(t, u, L, k::Form::images) - k::right_exit_cdf(t, u, L, k::Form::eigen)) < 1e-12);
      for (double v : {0.2 * L, 0.7 * L})
        CHECK(std::abs(k::killed_cdf(t, u, v, L, k::Form::images) - k::killed_cdf(t, u, v, L, k::Form::eigen)) < 1e-12);
    }
  }
}

TEST_CASE("survival is a distribution tail") {
  double prev = 1.0;
  for (double t = 1e-4; t < 20.0; t *= 1.3) {
    const double s = k::survival(t, 1.0, 2.0);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s <= prev + 1e-15);
    prev = s;
  }
  CHECK(k::survival(1e-6, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(k::survival(200.0, 1.0, 2.0) < 1e-12);
}

TEST_CASE("exit mass splits by the scale ratio") {
  const double L = 1.0;
  for (double u : {0.2, 0.5, 0.8}) {
    const double t = 1e3;
    CHECK(k::right_exit_cdf(t, u, L) == doctest::Approx(u).epsilon(1e-12));
    CHECK(k::left_exit_cdf(t, u, L) == doctest::Approx(1.0 - u).epsilon(1e-12));
    for (double s : {0.01, 0.1, 0.4}) {
      const double total = k::right_exit_cdf(s, u, L) + k::left_exit_cdf(s, u, L) + k::survival(s, u, L);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("small-time survival against the first images") {
  // from the centre of (0, L), P[tau > t] ~ 1 - 4 Phi(-L/(2 sqrt t)) for small t
  const double L = 1.0;
  const double t = 0.01;
  const double approx = 1.0 - 4.0 * oracle::Phi(-0.5 / std::sqrt(t)) + 4.0 * oracle::Phi(-1.5 / std::sqrt(t));
  CHECK(k::survival(t, 0.5, L) == doctest::Approx(approx).epsilon(1e-12));
}

TEST_CASE("killed kernel cdf") {
  const double L = 1.0;
  const double t = 0.3;
  const double u = 0.4;
  CHECK(k::killed_cdf(t, u, 0.0, L) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(k::killed_cdf(t, u, L, L) == doctest::Approx(k::survival(t, u, L)).epsilon(1e-12));
  // density by the sine series in the test
  auto dens = [&](double v) {
    double s = 0.0;
    for (int n = 1; n < 200; ++n)
      s += 2.0 / L * std::sin(n * M_PI * u / L) * std::sin(n * M_PI * v / L) *
           std::exp(-0.5 * n * n * M_PI * M_PI * t / (L * L));
    return s;
  };
  CHECK(k::killed_cdf(t, u, 0.6, L) == doctest::Approx(oracle::simpson(dens, 0.0, 0.6, 2000)).epsilon(1e-10));
}
