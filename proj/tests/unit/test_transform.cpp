#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewsim/rng.hpp"
#include "skewsim/scale_speed.hpp"
#include "skewsim/transform.hpp"

using namespace skewsim;

TEST_CASE("le gall function examples") {
  const LeGallFunction id(SignedAtomicMeasure{});
  CHECK(id.f(-3.0) == 1.0);
  CHECK(id.F(2.5) == doctest::Approx(2.5));

  const LeGallFunction half(SignedAtomicMeasure::dirac(0.0, 0.5));
  CHECK(half.f(-0.1) == doctest::Approx(1.0));
  CHECK(half.f(0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(half.f_left(0.0) == doctest::Approx(1.0));
  CHECK(half.F_inverse(half.F(0.77)) == doctest::Approx(0.77).epsilon(1e-12));

  for (double a : {0.2, 0.7}) {
    const LeGallFunction g(SignedAtomicMeasure::dirac(0.0, 2.0 * a - 1.0));
    const ScaleSpeedModel s = ScaleSpeedModel::build(skew_from_alpha(a));
    for (double x : {-2.0, -0.3, 0.4, 1.7}) CHECK(g.F(x) / s.scale(x) == doctest::Approx(1.0 - a).epsilon(1e-12));
  }
  CHECK_THROWS_AS(SignedAtomicMeasure::dirac(0.0, 1.0), DomainError);
}

TEST_CASE("continuous part of the le gall function") {
  const SignedAtomicMeasure nu({}, ContinuousDensity{[](double) { return 0.25; }, 0.0, 2.0});
  const LeGallFunction g(nu);
  CHECK(g.f(-1.0) == doctest::Approx(1.0));
  CHECK(g.f(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  CHECK(g.f(3.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  // F = int_0^x exp(-x/2) on [0, 2]
  CHECK(g.F(1.0) == doctest::Approx(2.0 * (1.0 - std::exp(-0.5))).epsilon(1e-10));
  CHECK(g.F_inverse(g.F(1.3)) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("measure recovery round trip on random atom sets") {
  RngStream rng(2024, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<double, double> atoms;
    const int k = 1 + static_cast<int>(rng.uniform() * 6);
    std::vector<double> xs;
    for (int i = 0; i < k; ++i) {
      const double x = std::round((rng.uniform() * 10.0 - 5.0) * 1000.0) / 1000.0;
      atoms[x] = 1.98 * rng.uniform() - 0.99;
    }
    for (const auto& [x, w] : atoms) xs.push_back(x);
    const LeGallFunction g{SignedAtomicMeasure(atoms)};
    const SignedAtomicMeasure back =
        recover_measure([&](double x) { return g.f(x); }, [&](double x) { return g.f_left(x); }, xs);
    REQUIRE(back.atoms().size() == atoms.size());
    for (const auto& [x, w] : atoms) CHECK(std::abs(back.atoms().at(x) - w) < 1e-10);
  }
}

TEST_CASE("measure recovery with a continuous part") {
  const SignedAtomicMeasure nu(std::map<double, double>{{0.0, -0.4}},
                               ContinuousDensity{[](double x) { return 0.1 * std::sin(x); }, 1.0, 3.0});
  const LeGallFunction g(nu);
  const std::vector<double> jumps{0.0};
  const SignedAtomicMeasure back = recover_measure([&](double x) { return g.f(x); },
                                                   [&](double x) { return g.f_left(x); }, jumps,
                                                   std::make_pair(1.0, 3.0));
  CHECK(back.atoms().at(0.0) == doctest::Approx(-0.4).epsilon(1e-12));
  for (double x : {1.5, 2.0, 2.5}) CHECK(std::abs(back.continuous_density(x) - 0.1 * std::sin(x)) < 1e-8);
}

TEST_CASE("push-forward matches the coefficient route") {
  // nu{0} = w corresponds to a = (1 - w, 1 + w); under Y = F(X) the flux coefficient becomes f a.
  for (double w : {-0.6, 0.0, 0.3}) {
    for (double fm : {0.5, 1.0, 2.0}) {
      for (double fp : {0.25, 1.0, 3.0}) {
        const PiecewiseLinearMap F({0.0}, {fm, fp});
        const SignedAtomicMeasure mu = push_forward_measure(SignedAtomicMeasure(std::map<double, double>{{0.0, w}}), F);
        const double ap = fp * (1.0 + w);
        const double am = fm * (1.0 - w);
        const double direct = (ap - am) / (ap + am);
        const double got = mu.atoms().count(0.0) ? mu.atoms().at(0.0) : 0.0;
        CHECK(std::abs(got - direct) < 1e-10);
      }
    }
  }
}

TEST_CASE("sde from divergence form") {
  const SkewSDE bm = sde_from_divergence(PiecewiseDiffusion::brownian());
  CHECK(bm.sigma(0.3) == 1.0);
  CHECK(bm.drift(0.3) == 0.0);
  CHECK(bm.nu.atoms().empty());

  const auto medium = PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 3.0}, {1.0, 1.0}, {0.0, 0.0});
  const SkewSDE m = sde_from_divergence(medium);
  CHECK(m.sigma(-1.0) == doctest::Approx(1.0));
  CHECK(m.sigma(1.0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(m.nu.atoms().at(0.0) == doctest::Approx(make_skew(FluxPair{3.0, 1.0}).beta()));

  const SkewSDE sbm = sde_from_divergence(PiecewiseDiffusion::skew_brownian(skew_from_alpha(0.7)));
  CHECK(sbm.nu.atoms().at(0.0) == doctest::Approx(0.4));
  CHECK(sbm.sigma(2.0) == doctest::Approx(1.0));
  CHECK(sbm.sigma(-2.0) == doctest::Approx(1.0));

  // smooth pieces: drift a' rho / 2
  const PiecewiseDiffusion smooth({}, {Coefficient([](double x) { return 2.0 + std::sin(x); })}, {Coefficient(1.0)},
                                  {Coefficient(0.0)});
  const SkewSDE s = sde_from_divergence(smooth);
  CHECK(s.drift(0.4) == doctest::Approx(0.5 * std::cos(0.4)).epsilon(1e-6));
}

TEST_CASE("brownian reduction") {
  const BrownianReduction id = brownian_reduction(PiecewiseDiffusion::brownian());
  CHECK(id.skew_points.empty());
  CHECK(id.G(1.7) == doctest::Approx(1.7));

  const auto medium = PiecewiseDiffusion::piecewise_constant({0.0}, {1.0, 4.0}, {1.0, 1.0}, {0.0, 0.0});
  const BrownianReduction r = brownian_reduction(medium);
  CHECK(r.G(-1.0) == doctest::Approx(-1.0));
  CHECK(r.G(1.0) == doctest::Approx(0.5));
  REQUIRE(r.skew_points.size() == 1);
  CHECK(r.skew_points[0].beta == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r.skew_points[0].alpha() == doctest::Approx(2.0 / 3.0));
  CHECK(reduction_scale_mismatch(medium, r) < 1e-12);

  const BrownianReduction s = brownian_reduction(PiecewiseDiffusion::skew_brownian(skew_from_alpha(0.7)));
  REQUIRE(s.skew_points.size() == 1);
  CHECK(s.skew_points[0].beta == doctest::Approx(0.4));
}

TEST_CASE("drift removal keeps the scale function") {
  const PiecewiseFunction b({-1.0, 1.0}, {0.0, std::log(3.0) / 4.0, 0.0});
  const auto coeffs = validate_piecewise(PiecewiseDiffusion::with_drift(b));
  CHECK_THROWS_AS(brownian_reduction(coeffs), DomainError);
  ReductionOptions o;
  o.remove_drift = true;
  const BrownianReduction r = brownian_reduction(coeffs, o);
  CHECK(r.zvonkin_sign != 0);
  CHECK_FALSE(r.localized);
  const ScaleSpeedModel orig = ScaleSpeedModel::build(coeffs);
  const ScaleSpeedModel red = ScaleSpeedModel::build(r.reduced);
  for (double x : {-0.5, 0.0, 0.8}) {
    const double p = hitting_probability(orig, x, -2.0, 2.0);
    const double q = hitting_probability(red, x, -2.0, 2.0);
    CHECK(std::abs(p - q) < 1e-4);
  }
}

TEST_CASE("piecewise linear map") {
  const PiecewiseLinearMap F({-1.0, 2.0}, {2.0, 1.0, 0.5});
  CHECK(F(0.0) == 0.0);
  CHECK(F(-2.0) == doctest::Approx(-3.0));
  CHECK(F(3.0) == doctest::Approx(2.5));
  for (double x : {-5.0, -1.0, 0.3, 2.0, 7.0}) CHECK(F.inverse(F(x)) == doctest::Approx(x).epsilon(1e-14));
  CHECK_THROWS_AS(PiecewiseLinearMap({0.0}, {1.0, -1.0}), DomainError);
}
