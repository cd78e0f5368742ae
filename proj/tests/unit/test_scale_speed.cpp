#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "skewsim/scale_speed.hpp"

using namespace skewsim;

TEST_CASE("skew brownian scale and speed") {
  const double a = 0.7;
  const ScaleSpeedModel m = ScaleSpeedModel::build(skew_from_alpha(a));
  CHECK(m.scale(1.0) == doctest::Approx(1.0 / a).epsilon(1e-12));
  CHECK(m.scale(-1.0) == doctest::Approx(-1.0 / (1.0 - a)).epsilon(1e-12));
  CHECK(m.speed(2.0) == doctest::Approx(2.0 * a).epsilon(1e-12));
  CHECK(m.speed(-2.0) == doctest::Approx(-2.0 * (1.0 - a)).epsilon(1e-12));
  CHECK(m.scale(0.0) == 0.0);
  CHECK(m.speed(0.0) == 0.0);
  for (double x : {-3.0, -0.1, 0.0, 0.2, 5.0}) CHECK(std::abs(m.scale_inverse(m.scale(x)) - x) < 1e-12);
  // the same numbers from the coefficient form
  const ScaleSpeedModel c = ScaleSpeedModel::build(PiecewiseDiffusion::skew_brownian(skew_from_alpha(a)));
  CHECK(c.scale(1.3) == doctest::Approx(m.scale(1.3)).epsilon(1e-12));
  CHECK(c.speed(-0.4) == doctest::Approx(m.speed(-0.4)).epsilon(1e-12));
}

TEST_CASE("brownian motion has natural scale") {
  const ScaleSpeedModel m = ScaleSpeedModel::build(PiecewiseDiffusion::brownian());
  CHECK(m.scale(0.37) == doctest::Approx(0.37));
  CHECK(m.speed(-1.5) == doctest::Approx(-1.5));
  CHECK(hitting_probability(m, 0.5, -1.0, 1.0) == doctest::Approx(0.75));
  CHECK(exit_time_moments(m, 0.5, 0.0, 1.0).expected == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("drift exponent") {
  const PiecewiseFunction b({-1.0, 1.0}, {0.0, std::log(3.0) / 4.0, 0.0});
  const ScaleSpeedModel m = ScaleSpeedModel::build(validate_piecewise(PiecewiseDiffusion::with_drift(b)));
  CHECK(m.h(10.0) - m.h(-10.0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  // S' = exp(-h)/a by quadrature in the test
  const double s = oracle::simpson([&](double z) { return std::exp(-m.h(z)); }, 0.0, 0.5, 200);
  CHECK(m.scale(0.5) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("hitting probabilities") {
  const ScaleSpeedModel m = ScaleSpeedModel::build(skew_from_alpha(0.7));
  CHECK(hitting_probability(m, 0.0, -1.0, 1.0) == doctest::Approx(0.7).epsilon(1e-14));
  const ScaleSpeedModel q = ScaleSpeedModel::build(skew_from_alpha(0.75));
  CHECK(hitting_probability(q, 0.5, -1.0, 1.0) == doctest::Approx(0.875).epsilon(1e-14));
  CHECK_THROWS_AS(hitting_probability(m, 2.0, -1.0, 1.0), DomainError);
}

TEST_CASE("exit times and green function") {
  for (double a : {0.2, 0.5, 0.9}) {
    const ScaleSpeedModel m = ScaleSpeedModel::build(skew_from_alpha(a));
    for (double L : {0.5, 1.0, 2.0}) CHECK(std::abs(exit_time_moments(m, 0.0, -L, L).expected - L * L) < 1e-10);
    for (double x : {-0.7, 0.1, 0.6})
      for (double y : {-0.3, 0.0, 0.8}) CHECK(m.green(-1.0, 1.0, x, y) == doctest::Approx(m.green(-1.0, 1.0, y, x)));
  }
  const ScaleSpeedModel m = ScaleSpeedModel::build(skew_from_alpha(0.7));
  const ExitMoments r = exit_time_moments(m, 0.0, -1.0, 1.0, ExitSide::right);
  const ExitMoments l = exit_time_moments(m, 0.0, -1.0, 1.0, ExitSide::left);
  CHECK(r.side_probability == doctest::Approx(0.7));
  CHECK(l.side_probability == doctest::Approx(0.3));
  // |SBM| is |BM|: the exit time is independent of the side
  CHECK(*r.conditional == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(*l.conditional == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(exit_time_moments(m, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("conditional exit times for brownian motion") {
  // E_x[tau | exit at 1] on (0, 1) = (1 - x^2) / 3
  const ScaleSpeedModel m = ScaleSpeedModel::build(PiecewiseDiffusion::brownian());
  const double x = 0.3;
  const ExitMoments r = exit_time_moments(m, x, 0.0, 1.0, ExitSide::right);
  CHECK(*r.conditional == doctest::Approx((1.0 - x * x) / 3.0).epsilon(1e-9));
}

TEST_CASE("rescaled scale and speed describe the same process") {
  const auto c = validate_piecewise(PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 4.0}, {1.0, 1.0}, {0.0, 0.0}));
  const ScaleSpeedModel m = ScaleSpeedModel::build(c);
  for (double k : {0.1, 10.0}) {
    const ScaleSpeedModel r = m.rescaled(k, 2.0, -3.0);
    CHECK(hitting_probability(r, 0.2, -1.0, 1.5) == doctest::Approx(hitting_probability(m, 0.2, -1.0, 1.5)).epsilon(1e-12));
    CHECK(exit_time_moments(r, 0.2, -1.0, 1.5).expected ==
          doctest::Approx(exit_time_moments(m, 0.2, -1.0, 1.5).expected).epsilon(1e-10));
  }
}

TEST_CASE("harmonicity and flux continuity of the scale function") {
  const auto c = validate_piecewise(PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 3.0}, {2.0, 1.0}, {0.0, 0.0}));
  const ScaleSpeedModel m = ScaleSpeedModel::build(c);
  const double h = 1e-3;
  for (double x : {-0.5, 0.5}) CHECK(std::abs(m.scale(x + h) - 2.0 * m.scale(x) + m.scale(x - h)) < 1e-12);
  const double left = (m.scale(0.0) - m.scale(-h)) / h;
  const double right = (m.scale(h) - m.scale(0.0)) / h;
  CHECK(1.0 * left == doctest::Approx(3.0 * right).epsilon(1e-9));
}
