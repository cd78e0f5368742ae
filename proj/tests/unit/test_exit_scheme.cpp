#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "skewsim/exit_scheme.hpp"
#include "skewsim/parallel.hpp"

using namespace skewsim;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("interval exit of skew brownian motion") {
  const RngStream root(30, 0);
  const int N = 40000;
  std::vector<double> times;
  double up = 0.0;
  for (int i = 0; i < N; ++i) {
    RngStream r = root.child(i);
    const IntervalExit e = interval_exit_sample(0.5, skew_from_alpha(0.8), std::nullopt, r);
    REQUIRE(e.exited);
    REQUIRE(std::abs(e.position) == 0.5);
    REQUIRE(e.side * e.position > 0.0);
    times.push_back(e.time);
    up += e.side > 0;
  }
  const MeanEstimate m = mean_estimate(times);
  CHECK(std::abs(m.mean - 0.25) < 4.0 * m.std_error);
  CHECK(std::abs(up / N - 0.8) < 4.0 * std::sqrt(0.16 / N));
}

TEST_CASE("interval exit with a horizon") {
  const RngStream root(31, 0);
  int survived = 0;
  for (int i = 0; i < 5000; ++i) {
    RngStream r = root.child(i);
    const IntervalExit e = interval_exit_sample(1.0, skew_from_alpha(0.3), 0.2, r);
    if (e.exited) {
      REQUIRE(e.time <= 0.2);
    } else {
      ++survived;
      REQUIRE(e.time == 0.2);
      REQUIRE(std::abs(e.position) < 1.0);
      REQUIRE(e.side == 0);
    }
  }
  // P[sup_{s<=t} |B_s| < 1] = (4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 t / 8)
  double q = 0.0;
  for (int k = 0; k < 20; ++k)
    q += (k % 2 ? -1.0 : 1.0) / (2 * k + 1) * std::exp(-(2 * k + 1) * (2 * k + 1) * M_PI * M_PI * 0.2 / 8.0);
  q *= 4.0 / M_PI;
  CHECK(std::abs(survived / 5000.0 - q) < 4.0 * std::sqrt(q * (1 - q) / 5000.0));
}

TEST_CASE("brownian interval exit") {
  const RngStream root(32, 0);
  const int N = 40000;
  std::vector<double> times;
  double up = 0.0;
  for (int i = 0; i < N; ++i) {
    RngStream r = root.child(i);
    const IntervalExit e = brownian_interval_sample(-1.0, 0.5, 2.0, std::nullopt, r);
    times.push_back(e.time);
    up += e.side > 0;
  }
  const MeanEstimate m = mean_estimate(times);
  CHECK(std::abs(m.mean - 1.5 * 1.5) < 4.0 * m.std_error);
  CHECK(std::abs(up / N - 0.5) < 4.0 * std::sqrt(0.25 / N));
}

TEST_CASE("exit grid") {
  const BrownianReduction red = brownian_reduction(PiecewiseDiffusion::skew_brownian(skew_from_alpha(0.7)));
  const ExitGrid g = ExitGrid::build(red, -1.0, 1.0, 0.25);
  const std::int64_t i0 = g.index_of(0.0);
  CHECK(g.point(i0 - 1) == doctest::Approx(-0.125));
  CHECK(g.point(i0 + 1) == doctest::Approx(0.125));
  REQUIRE(g.skew_alpha(i0));
  CHECK(*g.skew_alpha(i0) == doctest::Approx(red.skew_points[0].alpha()));
  CHECK_FALSE(g.skew_alpha(i0 + 1));
  CHECK(g.point(-1) == doctest::Approx(-1.25));
  CHECK_THROWS_AS(g.index_of(0.3), DomainError);
  CHECK_THROWS_AS(ExitGrid({-1.0, 0.0, 0.5, 1.0}, red.skew_points), DomainError);
}

TEST_CASE("scheme C exit side and mean time in a two-layer medium") {
  // a = (1, 4), rho = 1: S(x) = x on x<0, x/4 on x>=0
  const PiecewiseDiffusion c = PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 4.0}, {1.0, 1.0}, {0.0, 0.0});
  const BrownianReduction red = brownian_reduction(c);
  const double lo = red.to_reduced(-1.0);
  const double hi = red.to_reduced(1.0);
  CHECK(hi == doctest::Approx(0.5));
  const ExitGrid grid = ExitGrid::build(red, lo, hi, 0.25);
  const RngStream root(33, 0);
  const int N = 20000;
  double up = 0.0;
  std::vector<double> times;
  for (int i = 0; i < N; ++i) {
    RngStream r = root.child(i);
    const SkeletonPath s = gen_scheme_C(red, grid, kInf, 0.0, r, StopRule{lo, hi});
    up += s.positions.back() >= hi - 1e-12;
    times.push_back(s.times.back());
  }
  const double p = 1.0 / (0.25 + 1.0);
  CHECK(std::abs(up / N - p) < 4.0 * std::sqrt(p * (1 - p) / N));
  // (1/2)(a u')' = -1, u(+-1) = 0, flux continuity: u(0) = 2 / (a- + a+)
  const MeanEstimate m = mean_estimate(times);
  CHECK(std::abs(m.mean - 0.4) < 4.0 * m.std_error);
}

TEST_CASE("scheme C skeleton on a horizon") {
  const BrownianReduction red = brownian_reduction(PiecewiseDiffusion::skew_brownian(skew_from_alpha(0.7)));
  const ExitGrid grid = ExitGrid::build(red, -1.0, 1.0, 0.25);
  RngStream r(34, 0);
  const SkeletonPath s = gen_scheme_C(red, grid, 2.0, 0.0, r);
  for (std::size_t k = 1; k < s.times.size(); ++k) REQUIRE(s.times[k] > s.times[k - 1]);
  REQUIRE(s.terminal_time);
  CHECK(*s.terminal_time == 2.0);
  CHECK(s.times.back() <= 2.0);
  const SampledPath sp = s.to_sampled();
  CHECK(sp.skeleton());
  CHECK(sp.terminal_value() == s.final_value());

  const RngStream root(35, 0);
  const int N = 20000;
  double pos = 0.0;
  for (int i = 0; i < N; ++i) {
    RngStream c = root.child(i);
    const double y = gen_scheme_C(red, grid, 1.0, 0.0, c).final_value();
    pos += y > 0 ? 1.0 : (y == 0 ? 0.5 : 0.0);
  }
  const double a = red.skew_points[0].alpha();
  CHECK(std::abs(pos / N - a) < 4.0 * std::sqrt(a * (1 - a) / N));
}

TEST_CASE("scheme E") {
  const PiecewiseDiffusion c = PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 3.0}, {1.0, 1.0}, {0.0, 0.0});
  std::vector<double> g;
  for (int i = -8; i <= 8; ++i) g.push_back(i * 0.125);
  const SchemeE e(c, g);
  const std::int64_t i0 = e.index_of(0.0);
  CHECK(e.node(i0).p_right == doctest::Approx(0.75));
  CHECK(e.node(i0 + 2).p_right == doctest::Approx(0.5));
  const RngStream root(36, 0);
  const int N = 20000;
  double up = 0.0;
  std::vector<double> times;
  for (int i = 0; i < N; ++i) {
    RngStream r = root.child(i);
    const SkeletonPath s = e.run(kInf, 0.0, r, StopRule{-1.0, 1.0});
    up += s.positions.back() >= 1.0 - 1e-12;
    times.push_back(s.times.back());
  }
  CHECK(std::abs(up / N - 0.75) < 4.0 * std::sqrt(0.1875 / N));
  const MeanEstimate m = mean_estimate(times);
  CHECK(std::abs(m.mean - 0.5) < 4.0 * m.std_error);
  CHECK_THROWS_AS(SchemeE(c, {0.0, 0.0, 1.0}), DomainError);
}
