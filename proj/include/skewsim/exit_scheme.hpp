#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skewsim/core.hpp"
#include "skewsim/rng.hpp"
#include "skewsim/scale_speed.hpp"
#include "skewsim/transform.hpp"

namespace skewsim {

struct IntervalExit {
  bool exited;
  /// Exit time, or t_max when the path survived.
  double time;
  /// +1 / -1 for the exit side, 0 when the path survived.
  int side;
  /// Exit point, or the position at t_max.
  double position;
};

/// SBM(alpha) from 0 on (-h, h): Brownian exit time (|SBM| has the law of |BM|) and an independent
/// Bernoulli(alpha) side. With t_max: exit before t_max, or survival with the position at t_max drawn
/// from the killed kernel (modulus) and a Bernoulli(alpha) sign.
IntervalExit interval_exit_sample(double h, const SkewParameter& alpha, std::optional<double> t_max, RngStream& rng);

/// Brownian motion from x on (lo, hi): side from the scale ratio, time from the side-conditional law.
IntervalExit brownian_interval_sample(double lo, double x, double hi, std::optional<double> t_max, RngStream& rng);

/// Ascending grid in reduced coordinates, extended beyond its ends with the end spacings.
/// Every skew point must be an interior grid point with equidistant neighbours.
class ExitGrid {
 public:
  ExitGrid(std::vector<double> points, const std::vector<SkewPoint>& skew_points);

  /// Uniform lattice of the given step on [lo, hi]; around each skew point the lattice is replaced
  /// by the point and two neighbours at distance step/2.
  static ExitGrid build(const BrownianReduction& reduction, double lo, double hi, double step);

  double point(std::int64_t i) const;
  std::int64_t index_of(double y) const;
  /// alpha of the skew point at index i, if any.
  std::optional<double> skew_alpha(std::int64_t i) const;
  const std::vector<double>& points() const { return points_; }

 private:
  std::vector<double> points_;
  std::vector<double> alpha_;  // NaN where no skew point
};

/// Event skeleton (theta_i, Y_theta_i), optionally closed by the value at the horizon.
struct SkeletonPath {
  std::vector<double> times;
  std::vector<double> positions;
  std::optional<double> terminal_time;
  std::optional<double> terminal_value;

  /// Last recorded value: the terminal value if present, otherwise the last event.
  double final_value() const { return terminal_value ? *terminal_value : positions.back(); }
  double final_time() const { return terminal_time ? *terminal_time : times.back(); }
  /// Positions mapped through G^{-1}.
  SkeletonPath to_original(const BrownianReduction& reduction) const;
  /// As a SampledPath with the skeleton flag set (terminal point appended).
  SampledPath to_sampled() const;
  /// Linear interpolation between events. For plotting only: this is not the conditional law.
  double plot_value(double t) const;
};

/// Stop as soon as the skeleton reaches a level at or beyond either bound.
struct StopRule {
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Exact skeleton of the reduced process Y = G(X); T may be infinite when a stop rule bounds the run.
SkeletonPath gen_scheme_C(const BrownianReduction& reduction, const ExitGrid& grid, double T, double x0,
                          RngStream& rng, const StopRule& stop = {});

/// Grid Markov chain with scale-function side probabilities; the clock advances by the expected
/// exit time conditional on the realised side.
class SchemeE {
 public:
  SchemeE(const PiecewiseDiffusion& coeffs, std::vector<double> grid);

  struct Node {
    double p_right;
    double t_right;
    double t_left;
  };

  Node node(std::int64_t i) const;
  double point(std::int64_t i) const;
  std::int64_t index_of(double x) const;
  SkeletonPath run(double T, double x0, RngStream& rng, const StopRule& stop = {}) const;

 private:
  Node compute(std::int64_t i) const;

  ScaleSpeedModel model_;
  std::vector<double> grid_;
  std::vector<Node> nodes_;
};

SkeletonPath gen_scheme_E(const PiecewiseDiffusion& coeffs, const std::vector<double>& grid, double T, double x0,
                          RngStream& rng, const StopRule& stop = {});

}  // namespace skewsim
