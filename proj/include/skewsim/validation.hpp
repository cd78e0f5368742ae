#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewsim/core.hpp"
#include "skewsim/generators.hpp"
#include "skewsim/rng.hpp"

namespace skewsim {

enum class Rule {
  within,      // |estimate - target| <= tolerance
  sigma,       // |estimate - target| <= k * std_error + allowance
  at_most,     // estimate <= target + k * std_error + allowance
  at_least,    // estimate >= target - allowance
  ks,          // statistic * sqrt(n) <= critical
  exact_zero,  // estimate == 0
};

struct Check {
  Check() = default;
  Check(std::string n, Rule r) : name(std::move(n)), rule(r) {}

  std::string name;
  Rule rule = Rule::within;
  double target = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double k = 0.0;
  double allowance = 0.0;
  double n = 0.0;
  std::string note;

  /// Effective tolerance on |estimate - target| (or on the scaled statistic for KS).
  double tolerance() const;
  bool pass() const;
  std::string rule_text() const;
};

Check check_within(std::string name, double target, double estimate, double tol);
Check check_sigma(std::string name, double target, double estimate, double se, double k, double allowance = 0.0);
Check check_at_most(std::string name, double bound, double estimate, double se, double k, double allowance = 0.0);
Check check_at_least(std::string name, double bound, double estimate, double allowance = 0.0);
Check check_ks(std::string name, double statistic, double n, double critical);
Check check_zero(std::string name, double estimate);

struct ValidationReport {
  ValidationReport() = default;
  ValidationReport(std::string n, std::uint64_t s, std::size_t size) : name(std::move(n)), seed(s), sample_size(size) {}

  std::string name;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  std::vector<Check> checks;
  /// Auxiliary named values (ladders, fitted slopes); not part of the pass decision.
  std::vector<std::pair<std::string, double>> values;

  bool pass() const;
  nlohmann::ordered_json to_json() const;
  void add(Check c) { checks.push_back(std::move(c)); }
  void value(std::string key, double v) { values.emplace_back(std::move(key), v); }
};

/// One row per check: name, estimate, target, tolerance, PASS/FAIL.
std::string format_table(const ValidationReport& report);

// ---------------------------------------------------------------------------
// Occupation time

/// F(x) = (2/pi) arcsin sqrt(x / (x + r^2 (1 - x))), r = alpha / (1 - alpha).
class OccupationLaw {
 public:
  explicit OccupationLaw(SkewParameter alpha) : alpha_(alpha) {}
  double cdf(double x) const;

 private:
  SkewParameter alpha_;
};

/// Fraction of grid time in [0, inf) over (0, T]; grid points at exactly 0 count one half.
double occupation_fraction(const SampledPath& path);

/// Same fraction for a lattice walk, counted chunk by chunk without storing the path.
double walk_occupation_fraction(const WalkSpec& spec, RngStream& rng);

ValidationReport occupation_statistics(std::span<const SampledPath> paths, const SkewParameter& alpha,
                                       std::uint64_t seed = 0);
ValidationReport occupation_report(std::span<const double> fractions, const SkewParameter& alpha, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Local time

struct LocalTimeSample {
  double plus;       // (1/eps) meas{0 <= X <= eps}
  double minus;      // (1/eps) meas{-eps <= X <= 0}
  double symmetric;  // (1/(2 eps)) meas{|X| <= eps}
  std::optional<double> residual;  // max_t |X_t - x0 - B_t - beta L_t|
};

/// Left-point occupation estimates over the path; zeros split evenly between the sides.
LocalTimeSample local_time_sample(const SampledPath& path, double eps, double beta);

struct RatioEstimate {
  double ratio;
  double std_error;
};

/// Ratio of means sum(num) / sum(den) with a delta-method standard error.
RatioEstimate ratio_of_means(std::span<const double> num, std::span<const double> den);

ValidationReport local_time_statistics(std::span<const SampledPath> paths, const SkewParameter& alpha, double eps,
                                       std::uint64_t seed = 0, double relative_tol = 0.05,
                                       double residual_threshold = 0.05, double residual_fraction = 0.95);
ValidationReport local_time_report(std::span<const LocalTimeSample> samples, const SkewParameter& alpha, double eps,
                                   std::uint64_t seed, double relative_tol = 0.05, double residual_threshold = 0.05,
                                   double residual_fraction = 0.95);

// ---------------------------------------------------------------------------
// Marginal law

/// KS against the transition CDF plus a binomial test of the sign frequency (zeros count one half).
ValidationReport gof_marginal(std::span<const double> samples, double t, double x0, const SkewParameter& alpha,
                              std::uint64_t seed = 0, double critical = 1.628);

// ---------------------------------------------------------------------------
// Embedded-walk convergence rate

struct RateOptions {
  double T = 1.0;
  std::size_t replications = 1000;
  /// Number of equally spaced probe times in (0, T].
  int probes = 20;
  unsigned workers = 1;
  double slope_bound = -0.35;
};

ValidationReport convergence_rate(const SkewParameter& alpha, std::span<const int> n_list, int reference_n,
                                  const RngStream& rng, const RateOptions& options = {});

// ---------------------------------------------------------------------------
// Rescaling limit

struct RescalingOptions {
  std::size_t sample_size = 100000;
  /// Euler step inside the drift support; outside, Brownian first passages are exact.
  double dt = 1e-2;
  unsigned workers = 1;
  /// Allowance for the finite-n deviation and discretisation, added to 3 sigma.
  double allowance = 0.0;
};

/// kappa = 2 int b.
double drift_kappa(const PiecewiseFunction& b);
/// Sign of X_{n^2} for dX = dB + b(X) dt from 0, simulated with the strip method.
bool rescaled_sign(const PiecewiseFunction& b, int n, double dt, RngStream& rng);

ValidationReport rescaling_limit(const PiecewiseFunction& b, int n, const RngStream& rng,
                                 const RescalingOptions& options = {});

// ---------------------------------------------------------------------------
// Coupling

/// Number of (path, step) pairs with X^1 > X^2.
std::size_t order_violations(const SampledPath& lower, const SampledPath& upper);
/// First grid index where the two paths meet, if any.
std::optional<std::size_t> coalescence_index(const SampledPath& a, const SampledPath& b);

/// I(t, x) = int_0^t (2 pi s)^{-1/2} exp(-x^2 / (2 s)) ds.
double l1_kernel(double t, double x);

struct CouplingInput {
  /// Order violations counted over `ordered_pairs` lattice pairs (see order_violations).
  std::size_t violations = 0;
  std::size_t ordered_pairs = 0;
  /// Coalescence fractions at increasing horizons (already estimated).
  std::vector<std::pair<double, double>> coalescence;
  /// |X^1_t - X^2_t| samples from shared-noise Euler pairs at x, with their betas.
  std::vector<double> l1_distances;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double x = 0.0;
  double t = 1.0;
  double l1_allowance = 0.0;
  /// Same-beta pairs from x1 and x2: |X^1_t - X^2_t| and |L^1_t - L^2_t| samples.
  std::vector<double> start_distances;
  std::vector<double> local_time_gaps;
  double beta = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double start_allowance = 0.0;
};

ValidationReport coupling_checks(const CouplingInput& input, std::uint64_t seed = 0);

}  // namespace skewsim
