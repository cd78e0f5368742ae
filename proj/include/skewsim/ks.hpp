#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace skewsim {

/// Asymptotic critical constants c in D <= c / sqrt(N).
inline constexpr double kKsCritical1 = 1.628;
inline constexpr double kKsCritical5 = 1.358;

struct KsResult {
  double statistic;  // sup |F_n - F|
  double scaled;     // statistic * sqrt(effective N)
  double p_value;    // asymptotic Kolmogorov tail
  double effective_n;
};

/// P[K > lambda] for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace skewsim
