#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "skewsim/generators.hpp"
#include "skewsim/ks.hpp"
#include "skewsim/validation.hpp"

using namespace skewsim;

TEST_CASE("occupation law") {
  const OccupationLaw half(skew_from_alpha(0.5));
  for (double x : {0.1, 0.3, 0.5, 0.9}) CHECK(half.cdf(x) == doctest::Approx(2.0 / M_PI * std::asin(std::sqrt(x))));
  CHECK(half.cdf(0.5) == doctest::Approx(0.5));
  // alpha <-> 1 - alpha swaps the roles of the half lines
  const OccupationLaw a(skew_from_alpha(0.7));
  const OccupationLaw b(skew_from_alpha(0.3));
  for (double x : {0.2, 0.5, 0.8}) CHECK(a.cdf(x) == doctest::Approx(1.0 - b.cdf(1.0 - x)).epsilon(1e-13));
  CHECK(a.cdf(0.5) == doctest::Approx(0.25777).epsilon(1e-4));
  CHECK(a.cdf(0.0) == 0.0);
  CHECK(a.cdf(1.0) == doctest::Approx(1.0));

  // walk occupation fractions against the law
  const RngStream root(50, 0);
  std::vector<double> f;
  for (int i = 0; i < 4000; ++i) {
    RngStream r = root.child(i);
    WalkSpec s;
    s.n = 40;
    s.alpha = skew_from_alpha(0.7);
    f.push_back(occupation_fraction(gen_random_walk(s, r)));
  }
  const ValidationReport rep = occupation_report(f, skew_from_alpha(0.7), 50);
  CHECK(rep.pass());
}

TEST_CASE("occupation fraction counts zeros half") {
  const SampledPath p(0.0, 0.25, {0.0, 1.0, 0.0, -1.0, 0.0});
  CHECK(occupation_fraction(p) == doctest::Approx((1.0 + 0.5 + 0.0 + 0.5) / 4.0));
  std::vector<SampledPath> v{SampledPath(0.0, 0.5, {1.0, 0.0, 2.0})};
  CHECK_THROWS_AS(occupation_statistics(v, skew_from_alpha(0.5)), DomainError);
}

TEST_CASE("l1 kernel") {
  for (double x : {0.0, 0.3, 1.2}) {
    // s = u^2 removes the endpoint singularity
    const double q = oracle::simpson(
        [x](double u) { return u <= 0.0 ? (x == 0.0 ? 2.0 / std::sqrt(2 * M_PI) : 0.0)
                                        : 2.0 * std::exp(-x * x / (2 * u * u)) / std::sqrt(2 * M_PI); },
        0.0, 1.0, 2000);
    CHECK(l1_kernel(1.0, x) == doctest::Approx(q).epsilon(1e-5));
  }
  CHECK(l1_kernel(1.0, 0.0) == doctest::Approx(std::sqrt(2.0 / M_PI)));
  CHECK(0.4 * l1_kernel(1.0, 0.0) == doctest::Approx(0.3192).epsilon(1e-4));
}

TEST_CASE("check rules") {
  CHECK(check_within("w", 1.0, 1.05, 0.1).pass());
  CHECK_FALSE(check_within("w", 1.0, 1.2, 0.1).pass());
  CHECK(check_sigma("s", 0.0, 0.29, 0.1, 3.0).pass());
  CHECK_FALSE(check_sigma("s", 0.0, 0.31, 0.1, 3.0).pass());
  CHECK(check_sigma("s", 0.0, 0.31, 0.1, 3.0, 0.02).pass());
  CHECK(check_at_most("m", 1.0, 1.2, 0.1, 3.0).pass());
  CHECK_FALSE(check_at_most("m", 1.0, 1.4, 0.1, 3.0).pass());
  CHECK(check_at_least("l", 1.0, 0.95, 0.1).pass());
  CHECK_FALSE(check_at_least("l", 1.0, 0.85, 0.1).pass());
  CHECK(check_ks("k", 0.01, 10000, 1.628).pass());
  CHECK_FALSE(check_ks("k", 0.02, 10000, 1.628).pass());
  CHECK(check_zero("z", 0.0).pass());
  CHECK_FALSE(check_zero("z", 1.0).pass());
  CHECK_FALSE(check_within("nan", 0.0, std::nan(""), 1.0).pass());

  ValidationReport r("demo", 7, 100);
  r.add(check_within("a", 1.0, 1.0, 0.1));
  r.value("extra", 2.5);
  CHECK(r.pass());
  const auto j = r.to_json();
  CHECK(j["name"] == "demo");
  CHECK(j["seed"] == 7);
  CHECK(j["sample_size"] == 100);
  CHECK(j["pass"] == true);
  CHECK(j["checks"][0]["name"] == "a");
  CHECK(j["checks"][0].contains("tolerance"));
  CHECK(j["values"]["extra"] == 2.5);
  r.add(check_zero("b", 3.0));
  CHECK_FALSE(r.pass());
  const std::string t = format_table(r);
  CHECK(t.find("FAIL") != std::string::npos);
  CHECK(t.find("PASS") != std::string::npos);
}

TEST_CASE("ratio of means") {
  const std::vector<double> num{1, 2, 3, 4};
  const std::vector<double> den{2, 4, 6, 8};
  const RatioEstimate e = ratio_of_means(num, den);
  CHECK(e.ratio == doctest::Approx(0.5));
  CHECK(e.std_error == doctest::Approx(0.0).epsilon(1e-12));
  RngStream r(51, 0);
  std::vector<double> a(50000);
  std::vector<double> b(50000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    b[i] = 1.0 + r.uniform();
    a[i] = 2.0 * b[i] + 0.1 * r.normal();
  }
  const RatioEstimate f = ratio_of_means(a, b);
  CHECK(std::abs(f.ratio - 2.0) < 4.0 * f.std_error);
  CHECK(f.std_error == doctest::Approx(0.1 / 1.5 / std::sqrt(50000.0)).epsilon(0.05));
}

TEST_CASE("local time sample on a hand-made path") {
  SampledPath p(0.0, 0.5, {0.0, 0.05, -0.05, 0.5});
  p.set_noise({0.05, -0.1, 0.55});
  const LocalTimeSample s = local_time_sample(p, 0.1, 0.0);
  // left points 0, 0.05, -0.05 each hold dt = 0.5
  CHECK(s.plus == doctest::Approx((0.25 + 0.5) / 0.1));
  CHECK(s.minus == doctest::Approx((0.25 + 0.5) / 0.1));
  CHECK(s.symmetric == doctest::Approx(1.5 / 0.2));
  REQUIRE(s.residual);
  CHECK(*s.residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("marginal goodness of fit") {
  RngStream r(52, 0);
  std::vector<double> xs(10000);
  for (double& x : xs) x = r.normal();
  CHECK(gof_marginal(xs, 1.0, 0.0, skew_from_alpha(0.5)).pass());
  CHECK_FALSE(gof_marginal(xs, 1.0, 0.0, skew_from_alpha(0.6)).pass());
  CHECK_THROWS_AS(gof_marginal({}, 1.0, 0.0, skew_from_alpha(0.5)), DomainError);
}

TEST_CASE("convergence rate") {
  const std::vector<int> ns{4, 8, 16};
  RateOptions o;
  o.replications = 200;
  o.probes = 5;
  const ValidationReport r = convergence_rate(skew_from_alpha(0.7), ns, 256, RngStream(53, 0), o);
  double prev = 1e9;
  for (int n : ns) {
    double e = -1;
    for (const auto& [k, v] : r.values)
      if (k == "sup_error_n" + std::to_string(n)) e = v;
    REQUIRE(e > 0.0);
    CHECK(e < prev);
    prev = e;
  }
  CHECK_THROWS_AS(convergence_rate(skew_from_alpha(0.7), ns, 128, RngStream(53, 0), o), DomainError);
  const std::vector<int> bad{3, 8};
  CHECK_THROWS_AS(convergence_rate(skew_from_alpha(0.7), bad, 256, RngStream(53, 0), o), DomainError);
}

TEST_CASE("rescaling") {
  const PiecewiseFunction b({-1.0, 1.0}, {0.0, 0.5, 0.0});
  CHECK(drift_kappa(b) == doctest::Approx(2.0));
  CHECK_THROWS_AS(drift_kappa(PiecewiseFunction({0.0}, {0.0, 1.0})), DomainError);
  RngStream g(1, 0);
  CHECK_THROWS_AS(rescaled_sign(PiecewiseFunction({1.0, 2.0}, {0.0, 1.0, 0.0}), 5, 1e-2, g), DomainError);
  RescalingOptions o;
  o.sample_size = 4000;
  o.allowance = 0.02;
  const ValidationReport r = rescaling_limit(b, 10, RngStream(54, 0), o);
  CHECK(r.pass());
  // no drift: fair sign
  o.allowance = 0.0;
  CHECK(rescaling_limit(PiecewiseFunction(0.0), 5, RngStream(55, 0), o).pass());
}

TEST_CASE("coupling helpers") {
  const SampledPath a(0.0, 1.0, {0.0, 1.0, 2.0, 2.0});
  const SampledPath b(0.0, 1.0, {1.0, 0.0, 3.0, 2.0});
  CHECK(order_violations(a, b) == 1);
  REQUIRE(coalescence_index(a, b));
  CHECK(*coalescence_index(a, b) == 3);
  CHECK_FALSE(coalescence_index(a, SampledPath(0.0, 1.0, {5, 5, 5, 5})));

  CouplingInput in;
  in.ordered_pairs = 10;
  in.coalescence = {{1.0, 0.2}, {4.0, 0.5}};
  in.l1_distances = {0.1, 0.1, 0.1};
  in.beta1 = 0.2;
  in.beta2 = 0.6;
  CHECK(coupling_checks(in).pass());
  in.violations = 1;
  CHECK_FALSE(coupling_checks(in).pass());
  in.violations = 0;
  in.l1_distances = {1.0, 1.0, 1.0};
  CHECK_FALSE(coupling_checks(in).pass());
}

TEST_CASE("chunked walk occupation matches the stored path") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    WalkSpec s;
    s.n = 12;
    s.alpha = skew_from_alpha(0.6);
    RngStream a(56, i);
    RngStream b(56, i);
    CHECK(walk_occupation_fraction(s, a) == doctest::Approx(occupation_fraction(gen_random_walk(s, b))).epsilon(1e-14));
  }
}
