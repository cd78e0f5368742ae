#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "skewsim/core.hpp"
#include "skewsim/validation.hpp"

namespace skewsim {

enum class Boundary { dirichlet, neumann };

/// du/dt = (rho/2)(a u')' + b u' on [-R, R] with u(0, .) = initial.
struct TransmissionProblem {
  PiecewiseDiffusion coeffs = PiecewiseDiffusion::brownian();
  std::function<double(double)> initial;
  double T = 1.0;
  double R = 8.0;
  /// Dirichlet holds u at initial(+-R); Neumann imposes zero flux.
  Boundary boundary = Boundary::dirichlet;
  /// 1 = implicit Euler, 0.5 = Crank-Nicolson.
  double theta = 1.0;
  /// With theta < 1, the first `startup_steps` steps are each replaced by two implicit half steps.
  int startup_steps = 0;
  /// Explicit ascending node set; overrides R and nx when non-empty.
  std::vector<double> nodes;
  /// Times at which the field is stored (the final time is always stored).
  std::vector<double> snapshot_times;

  static TransmissionProblem for_skew(const SkewParameter& skew, std::function<double(double)> initial, double T,
                                      double R);
};

struct TransmissionSolution {
  std::vector<double> x;
  std::vector<double> times;
  std::vector<std::vector<double>> u;
  /// Lumped weights M_i = sum of half-cell lengths divided by rho.
  std::vector<double> mass_weights;
  /// Per-node residual of the last step's discrete flux balance (zero up to rounding).
  std::vector<double> flux_residual;

  const std::vector<double>& final() const { return u.back(); }
  /// Linear interpolation of the final field.
  double value_at(double x) const;
  /// sum_i M_i u_i for snapshot k.
  double weighted_mass(std::size_t k) const;
};

/// Finite-volume theta scheme on nx nodes with nt time steps. Coefficient breakpoints inside
/// (-R, R) must be nodes; a DomainError names the first offending breakpoint otherwise.
TransmissionSolution solve_transmission(const TransmissionProblem& problem, int nx, int nt);

/// Half-width R such that the Gaussian tail of variance lambda_hi T beyond R - extent is below tail.
double far_field_radius(double T, double extent, double lambda_hi, double tail = 1e-8);

/// Graded node set on [-R, R]: spacing h_fine on [-core, core], growing geometrically by `growth`
/// outside, capped at h_max. Points in `required` are inserted.
std::vector<double> graded_nodes(double R, double core, double h_fine, double growth, double h_max,
                                 const std::vector<double>& required = {});

struct PdeCheckOptions {
  /// Uniform grid sizes on [-R, R]; each must be odd so that 0 is a node.
  std::vector<int> levels{161, 321, 641};
  double R = 8.0;
  /// Crank-Nicolson with implicit start-up, time step = dt_ratio * h.
  double theta = 0.5;
  int startup_steps = 2;
  double dt_ratio = 0.25;
  double order_bound = 1.8;
};

/// Solves the transmission problem for SBM(alpha) on each level and compares u(t, probe) with
/// the quadrature semigroup. The report holds per-level max/mean gaps and the observed orders.
ValidationReport pde_vs_density(const SkewParameter& alpha, const std::function<double(double)>& initial, double t,
                                const std::vector<double>& probes, const PdeCheckOptions& options = {});

}  // namespace skewsim
