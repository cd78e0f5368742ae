#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "skewsim/ks.hpp"
#include "skewsim/rng.hpp"

using namespace skewsim;

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_survival(kKsCritical5) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(kolmogorov_survival(kKsCritical1) == doctest::Approx(0.01).epsilon(1e-2));
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(10.0) < 1e-40);
  // direct series at lambda = 1
  double s = 0.0;
  for (int k = 1; k < 50; ++k) s += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k);
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(s).epsilon(1e-12));
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.05) {
    const double v = kolmogorov_survival(l);
    REQUIRE(v <= prev);
    prev = v;
  }
}

TEST_CASE("one-sample statistic by hand") {
  const std::vector<double> xs{0.1, 0.4, 0.7};
  const KsResult r = ks_one_sample(xs, [](double x) { return x; });
  // max over i of max(i/n - x_i, x_i - (i-1)/n)
  CHECK(r.statistic == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.effective_n == 3.0);
  CHECK(r.scaled == doctest::Approx(0.3 * std::sqrt(3.0)));
}

TEST_CASE("one-sample accepts a correct law and rejects a shifted one") {
  RngStream r(40, 0);
  std::vector<double> xs(20000);
  for (double& x : xs) x = r.normal();
  CHECK(ks_one_sample(xs, [](double x) { return oracle::Phi(x); }).scaled < kKsCritical1);
  CHECK(ks_one_sample(xs, [](double x) { return oracle::Phi(x - 0.1); }).scaled > kKsCritical1);
}

TEST_CASE("two-sample") {
  RngStream r(41, 0);
  std::vector<double> a(8000);
  std::vector<double> b(12000);
  for (double& x : a) x = r.normal();
  for (double& x : b) x = r.normal();
  const KsResult same = ks_two_sample(a, b);
  CHECK(same.effective_n == doctest::Approx(8000.0 * 12000.0 / 20000.0));
  CHECK(same.scaled < kKsCritical1);
  for (double& x : b) x += 0.15;
  CHECK(ks_two_sample(a, b).scaled > kKsCritical1);

  const std::vector<double> p{1, 2, 3};
  const std::vector<double> q{1, 2, 3};
  CHECK(ks_two_sample(p, q).statistic == 0.0);
}
