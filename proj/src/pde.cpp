#include "skewsim/pde.hpp"

#include <algorithm>
#include <cmath>

#include "skewsim/density.hpp"
#include "skewsim/numerics.hpp"

namespace skewsim {

TransmissionProblem TransmissionProblem::for_skew(const SkewParameter& skew, std::function<double(double)> initial,
                                                  double T, double R) {
  TransmissionProblem p;
  p.coeffs = PiecewiseDiffusion::skew_brownian(skew);
  p.initial = std::move(initial);
  p.T = T;
  p.R = R;
  return p;
}

double TransmissionSolution::value_at(double xq) const {
  const auto& f = final();
  if (xq <= x.front()) return f.front();
  if (xq >= x.back()) return f.back();
  const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xq) - x.begin());
  const double w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * f[i - 1] + w * f[i];
}

double TransmissionSolution::weighted_mass(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += mass_weights[i] * u[k][i];
  return s;
}

namespace {

struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  std::vector<double> apply(const std::vector<double>& v) const {
    const std::size_t n = diag.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * v[i];
      if (i > 0) s += lower[i] * v[i - 1];
      if (i + 1 < n) s += upper[i] * v[i + 1];
      out[i] = s;
    }
    return out;
  }
};

// Thomas algorithm; the systems assembled here are diagonally dominant.
std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::vector<double> rhs) {
  const std::size_t n = m.diag.size();
  std::vector<double> c(n);
  double denom = m.diag[0];
  if (denom == 0.0) throw NumericalError("transmission solver: singular system");
  c[0] = m.upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.lower[i] * c[i - 1];
    if (std::abs(denom) < 1e-300) throw NumericalError("transmission solver: ill-conditioned system at node " + std::to_string(i));
    c[i] = i + 1 < n ? m.upper[i] / denom : 0.0;
    rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

}  // namespace

TransmissionSolution solve_transmission(const TransmissionProblem& problem, int nx, int nt) {
  if (!problem.initial) throw DomainError("transmission: missing initial condition");
  if (nt < 1) throw DomainError("transmission: need nt >= 1, got " + std::to_string(nt));
  if (!(problem.T > 0.0)) throw DomainError("transmission: horizon must be positive");
  if (!(problem.theta >= 0.5 && problem.theta <= 1.0)) throw DomainError("transmission: theta must lie in [0.5, 1]");
  std::vector<double> x = problem.nodes;
  if (x.empty()) {
    if (nx < 2) throw DomainError("transmission: need nx >= 2, got " + std::to_string(nx));
    if (!(problem.R > 0.0)) throw DomainError("transmission: R must be positive");
    x.resize(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) x[static_cast<std::size_t>(i)] = -problem.R + 2.0 * problem.R * i / (nx - 1);
  }
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("transmission: nodes must be strictly ascending");
  const std::size_t n = x.size();
  const double span = x.back() - x.front();

  for (double b : problem.coeffs.breaks()) {
    if (b <= x.front() || b >= x.back()) continue;
    const auto it = std::lower_bound(x.begin(), x.end(), b - 1e-12 * span);
    if (it == x.end() || std::abs(*it - b) > 1e-12 * span)
      throw DomainError("transmission: interface " + format_value(b) + " is not a grid node");
  }

  const PiecewiseDiffusion& c = problem.coeffs;
  std::vector<double> k(n - 1);
  std::vector<double> drift(n - 1);
  std::vector<double> mass(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x[i + 1] - x[i];
    const double m = 0.5 * (x[i] + x[i + 1]);
    const double rho = c.rho()(m);
    k[i] = 0.5 * c.a()(m) / h;
    drift[i] = c.b()(m) / rho;
    mass[i] += 0.5 * h / rho;
    mass[i + 1] += 0.5 * h / rho;
  }

  Tridiagonal A{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      A.lower[i] = k[i - 1] - 0.5 * drift[i - 1];
      A.diag[i] += -k[i - 1] + 0.5 * drift[i - 1];
    }
    if (i + 1 < n) {
      A.upper[i] = k[i] + 0.5 * drift[i];
      A.diag[i] += -k[i] - 0.5 * drift[i];
    }
  }
  const bool dirichlet = problem.boundary == Boundary::dirichlet;
  const double g_left = problem.initial(x.front());
  const double g_right = problem.initial(x.back());

  auto step = [&](const std::vector<double>& u, double dt, double theta, std::vector<double>* residual) {
    Tridiagonal lhs = A;
    const std::vector<double> Au = A.apply(u);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      lhs.lower[i] = -theta * A.lower[i];
      lhs.upper[i] = -theta * A.upper[i];
      lhs.diag[i] = mass[i] / dt - theta * A.diag[i];
      rhs[i] = mass[i] / dt * u[i] + (1.0 - theta) * Au[i];
    }
    if (dirichlet) {
      lhs.lower[0] = lhs.upper[0] = 0.0;
      lhs.diag[0] = 1.0;
      rhs[0] = g_left;
      lhs.lower[n - 1] = lhs.upper[n - 1] = 0.0;
      lhs.diag[n - 1] = 1.0;
      rhs[n - 1] = g_right;
    }
    std::vector<double> next = solve_tridiagonal(lhs, std::move(rhs));
    if (residual) {
      const std::vector<double> An = A.apply(next);
      residual->assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (dirichlet && (i == 0 || i + 1 == n)) continue;
        (*residual)[i] = mass[i] * (next[i] - u[i]) / dt - theta * An[i] - (1.0 - theta) * Au[i];
      }
    }
    return next;
  };

  TransmissionSolution sol;
  sol.x = x;
  sol.mass_weights = mass;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = problem.initial(x[i]);

  const double dt = problem.T / nt;
  std::vector<std::size_t> snap_steps;
  for (double ts : problem.snapshot_times) {
    if (ts < 0.0 || ts > problem.T) throw DomainError("transmission: snapshot time " + format_value(ts) + " outside [0, T]");
    snap_steps.push_back(static_cast<std::size_t>(std::llround(ts / dt)));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());
  auto record = [&](std::size_t s) {
    sol.times.push_back(static_cast<double>(s) * dt);
    sol.u.push_back(u);
  };
  std::size_t next_snap = 0;
  if (next_snap < snap_steps.size() && snap_steps[next_snap] == 0) {
    record(0);
    ++next_snap;
  }
  for (int s = 1; s <= nt; ++s) {
    const bool last = s == nt;
    if (problem.theta < 1.0 && s <= problem.startup_steps) {
      u = step(u, 0.5 * dt, 1.0, nullptr);
      u = step(u, 0.5 * dt, 1.0, last ? &sol.flux_residual : nullptr);
    } else {
      u = step(u, dt, problem.theta, last ? &sol.flux_residual : nullptr);
    }
    const auto su = static_cast<std::size_t>(s);
    while (next_snap < snap_steps.size() && snap_steps[next_snap] == su) {
      if (!last) record(su);
      ++next_snap;
    }
  }
  record(static_cast<std::size_t>(nt));
  return sol;
}

double far_field_radius(double T, double extent, double lambda_hi, double tail) {
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("far_field_radius: tail must lie in (0,1)");
  const double z = numerics::find_root([&](double q) { return 2.0 * numerics::normal_cdf(-q) - tail; }, 0.0, 40.0,
                                       1e-12, "far-field quantile");
  return extent + z * std::sqrt(lambda_hi * T);
}

std::vector<double> graded_nodes(double R, double core, double h_fine, double growth, double h_max,
                                 const std::vector<double>& required) {
  if (!(R > 0.0 && core >= 0.0 && h_fine > 0.0 && growth >= 1.0 && h_max >= h_fine))
    throw DomainError("graded_nodes: invalid parameters");
  std::vector<double> half;
  const auto fine = static_cast<long>(std::floor(std::min(core, R) / h_fine + 1e-9));
  for (long i = 0; i <= fine; ++i) half.push_back(static_cast<double>(i) * h_fine);
  double h = h_fine;
  while (half.back() < R) {
    h = std::min(h * growth, h_max);
    half.push_back(std::min(R, half.back() + h));
    if (R - half.back() < 0.25 * h) half.back() = R;
  }
  std::vector<double> nodes;
  for (std::size_t i = half.size(); i-- > 1;) nodes.push_back(-half[i]);
  nodes.insert(nodes.end(), half.begin(), half.end());
  nodes.insert(nodes.end(), required.begin(), required.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double p, double q) { return std::abs(p - q) < 1e-12; }),
              nodes.end());
  return nodes;
}

ValidationReport pde_vs_density(const SkewParameter& alpha, const std::function<double(double)>& initial, double t,
                                const std::vector<double>& probes, const PdeCheckOptions& options) {
  if (options.levels.size() < 2) throw DomainError("pde_vs_density: need at least two grid levels");
  if (probes.empty()) throw DomainError("pde_vs_density: no probe points");
  for (double p : probes)
    if (std::abs(p) > 0.5 * options.R)
      throw DomainError("pde_vs_density: probe " + format_value(p) + " outside the accurate region |x| <= R/2");
  const TransitionDensityModel model(alpha);
  std::vector<double> exact;
  for (double p : probes) exact.push_back(model.semigroup_apply(t, initial, p));

  ValidationReport r{"pde_vs_density", 0, probes.size()};
  std::vector<double> gaps;
  for (int nx : options.levels) {
    if (nx < 3 || nx % 2 == 0) throw DomainError("pde_vs_density: grid size " + std::to_string(nx) + " must be odd");
    TransmissionProblem prob = TransmissionProblem::for_skew(alpha, initial, t, options.R);
    prob.theta = options.theta;
    prob.startup_steps = options.startup_steps;
    const double h = 2.0 * options.R / (nx - 1);
    const int nt = std::max(2, static_cast<int>(std::ceil(t / (options.dt_ratio * h) - 1e-9)));
    const TransmissionSolution sol = solve_transmission(prob, nx, nt);
    double mx = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double g = std::abs(sol.value_at(probes[i]) - exact[i]);
      mx = std::max(mx, g);
      mean += g;
    }
    mean /= static_cast<double>(probes.size());
    gaps.push_back(mx);
    r.value("max_gap_nx" + std::to_string(nx), mx);
    r.value("mean_gap_nx" + std::to_string(nx), mean);
  }
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    const double hr = static_cast<double>(options.levels[i + 1] - 1) / (options.levels[i] - 1);
    const double order = std::log(gaps[i] / gaps[i + 1]) / std::log(hr);
    r.value("order_" + std::to_string(options.levels[i]) + "_" + std::to_string(options.levels[i + 1]), order);
    r.add(check_at_least("spatial order nx=" + std::to_string(options.levels[i]) + " -> " +
                             std::to_string(options.levels[i + 1]),
                         options.order_bound, order));
  }
  return r;
}

}  // namespace skewsim
