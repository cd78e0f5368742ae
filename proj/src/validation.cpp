#include "skewsim/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "skewsim/density.hpp"
#include "skewsim/generators.hpp"
#include "skewsim/ks.hpp"
#include "skewsim/numerics.hpp"
#include "skewsim/parallel.hpp"

namespace skewsim {

// ---------------------------------------------------------------------------
// Checks and reports

double Check::tolerance() const {
  switch (rule) {
    case Rule::within:
      return allowance;
    case Rule::sigma:
    case Rule::at_most:
      return k * std_error + allowance;
    case Rule::at_least:
      return allowance;
    case Rule::ks:
      return allowance / std::sqrt(n);
    case Rule::exact_zero:
      return 0.0;
  }
  return 0.0;
}

bool Check::pass() const {
  if (!std::isfinite(estimate)) return false;
  switch (rule) {
    case Rule::within:
    case Rule::sigma:
      return std::abs(estimate - target) <= tolerance();
    case Rule::at_most:
      return estimate <= target + tolerance();
    case Rule::at_least:
      return estimate >= target - tolerance();
    case Rule::ks:
      return statistic <= tolerance();
    case Rule::exact_zero:
      return estimate == 0.0;
  }
  return false;
}

std::string Check::rule_text() const {
  char buf[160];
  switch (rule) {
    case Rule::within:
      std::snprintf(buf, sizeof buf, "|estimate - target| <= %.3g", allowance);
      break;
    case Rule::sigma:
      std::snprintf(buf, sizeof buf, "|estimate - target| <= %g se + %.3g", k, allowance);
      break;
    case Rule::at_most:
      std::snprintf(buf, sizeof buf, "estimate <= target + %g se + %.3g", k, allowance);
      break;
    case Rule::at_least:
      std::snprintf(buf, sizeof buf, "estimate >= target - %.3g", allowance);
      break;
    case Rule::ks:
      std::snprintf(buf, sizeof buf, "D <= %.4g / sqrt(%.0f)", allowance, n);
      break;
    case Rule::exact_zero:
      std::snprintf(buf, sizeof buf, "estimate == 0");
      break;
  }
  return buf;
}

Check check_within(std::string name, double target, double estimate, double tol) {
  Check c{std::move(name), Rule::within};
  c.target = target;
  c.estimate = estimate;
  c.allowance = tol;
  return c;
}

Check check_sigma(std::string name, double target, double estimate, double se, double k, double allowance) {
  Check c{std::move(name), Rule::sigma};
  c.target = target;
  c.estimate = estimate;
  c.std_error = se;
  c.k = k;
  c.allowance = allowance;
  return c;
}

Check check_at_most(std::string name, double bound, double estimate, double se, double k, double allowance) {
  Check c{std::move(name), Rule::at_most};
  c.target = bound;
  c.estimate = estimate;
  c.std_error = se;
  c.k = k;
  c.allowance = allowance;
  return c;
}

Check check_at_least(std::string name, double bound, double estimate, double allowance) {
  Check c{std::move(name), Rule::at_least};
  c.target = bound;
  c.estimate = estimate;
  c.allowance = allowance;
  return c;
}

Check check_ks(std::string name, double statistic, double n, double critical) {
  Check c{std::move(name), Rule::ks};
  c.statistic = statistic;
  c.estimate = statistic;
  c.n = n;
  c.allowance = critical;
  return c;
}

Check check_zero(std::string name, double estimate) {
  Check c{std::move(name), Rule::exact_zero};
  c.estimate = estimate;
  return c;
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

nlohmann::ordered_json ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["seed"] = seed;
  j["sample_size"] = sample_size;
  j["pass"] = pass();
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["rule"] = c.rule_text();
    e["target"] = c.target;
    e["estimate"] = c.estimate;
    e["std_error"] = c.std_error;
    e["statistic"] = c.statistic;
    e["tolerance"] = c.tolerance();
    e["pass"] = c.pass();
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(std::move(e));
  }
  auto& vals = j["values"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values) vals[k] = v;
  return j;
}

std::string format_table(const ValidationReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %14s %14s %12s  %s\n", "check", "estimate", "target", "tolerance", "result");
  out << report.name << " (seed " << report.seed << ", N = " << report.sample_size << ")\n" << line;
  for (const Check& c : report.checks) {
    std::snprintf(line, sizeof line, "%-44s %14.6g %14.6g %12.4g  %s\n", c.name.c_str(), c.estimate, c.target,
                  c.tolerance(), c.pass() ? "PASS" : "FAIL");
    out << line;
  }
  for (const auto& [k, v] : report.values) {
    std::snprintf(line, sizeof line, "  %-42s %14.6g\n", k.c_str(), v);
    out << line;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Occupation time

double OccupationLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = alpha_.alpha();
  if (a == 1.0) return 0.0;
  if (a == 0.0) return 1.0;
  const double r = a / (1.0 - a);
  return 2.0 / M_PI * std::asin(std::sqrt(x / (x + r * r * (1.0 - x))));
}

double occupation_fraction(const SampledPath& path) {
  if (!path.uniform()) throw DomainError("occupation: path is not on a uniform grid");
  if (path.size() < 2) throw DomainError("occupation: path has no steps");
  double pos = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double v = path.value(k);
    pos += v > 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
  }
  return pos / static_cast<double>(path.size() - 1);
}

double walk_occupation_fraction(const WalkSpec& spec, RngStream& rng) {
  validate_walk_spec(spec);
  SkewWalk w(spec);
  const std::uint64_t steps = spec.steps();
  double pos = 0.0;
  while (w.time() < steps) {
    const std::int64_t before = w.position();
    const std::uint64_t m = w.advance(steps - w.time(), rng);
    const std::int64_t after = w.position();
    // inside a chunk the sign is that of the start; only the last point can be 0
    if (before > 0) pos += static_cast<double>(m - 1);
    pos += after > 0 ? 1.0 : (after == 0 ? 0.5 : 0.0);
  }
  return pos / static_cast<double>(steps);
}

ValidationReport occupation_report(std::span<const double> fractions, const SkewParameter& alpha, std::uint64_t seed) {
  if (fractions.empty()) throw DomainError("occupation: empty sample");
  const OccupationLaw law(alpha);
  const KsResult ks = ks_one_sample(fractions, [&](double x) { return law.cdf(x); });
  ValidationReport r{"occupation", seed, fractions.size()};
  r.add(check_ks("KS vs occupation CDF", ks.statistic, ks.effective_n, kKsCritical1));
  r.value("ks_p_value", ks.p_value);
  r.value("alpha", alpha.alpha());
  return r;
}

ValidationReport occupation_statistics(std::span<const SampledPath> paths, const SkewParameter& alpha,
                                       std::uint64_t seed) {
  std::vector<double> fr;
  fr.reserve(paths.size());
  for (const SampledPath& p : paths) {
    if (p.value(0) != 0.0) throw DomainError("occupation: path does not start at 0");
    fr.push_back(occupation_fraction(p));
  }
  return occupation_report(fr, alpha, seed);
}

// ---------------------------------------------------------------------------
// Local time

LocalTimeSample local_time_sample(const SampledPath& path, double eps, double beta) {
  if (!(eps > 0.0)) throw DomainError("local time: bandwidth must be positive, got " + format_value(eps));
  if (!path.uniform()) throw DomainError("local time: path is not on a uniform grid");
  const double dt = path.dt();
  const auto& noise = path.noise();
  double plus = 0.0;
  double minus = 0.0;
  double sym = 0.0;
  double b = 0.0;
  double worst = 0.0;
  const double x0 = path.value(0);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double x = path.value(k);
    if (std::abs(x) <= eps) {
      sym += dt;
      if (x > 0.0) plus += dt;
      else if (x < 0.0) minus += dt;
      else {
        plus += 0.5 * dt;
        minus += 0.5 * dt;
      }
    }
    if (noise) {
      b += (*noise)[k];
      const double resid = path.value(k + 1) - x0 - b - beta * sym / (2.0 * eps);
      worst = std::max(worst, std::abs(resid));
    }
  }
  LocalTimeSample s{plus / eps, minus / eps, sym / (2.0 * eps), std::nullopt};
  if (noise) s.residual = worst;
  return s;
}

RatioEstimate ratio_of_means(std::span<const double> num, std::span<const double> den) {
  const std::size_t n = num.size();
  if (n < 2 || den.size() != n) throw DomainError("ratio estimate: need two or more paired samples");
  const double sn = pairwise_sum(num);
  const double sd = pairwise_sum(den);
  if (!(sd > 0.0)) throw DomainError("ratio estimate: zero denominator");
  const double r = sn / sd;
  std::vector<double> e2(n);
  for (std::size_t i = 0; i < n; ++i) e2[i] = (num[i] - r * den[i]) * (num[i] - r * den[i]);
  const double nd = static_cast<double>(n);
  const double var = pairwise_sum(e2) / (nd * (nd - 1.0));
  return {r, std::sqrt(var) / (sd / nd)};
}

ValidationReport local_time_report(std::span<const LocalTimeSample> samples, const SkewParameter& alpha, double eps,
                                   std::uint64_t seed, double relative_tol, double residual_threshold,
                                   double residual_fraction) {
  std::vector<double> plus;
  std::vector<double> minus;
  std::vector<double> sym;
  std::size_t with_residual = 0;
  std::size_t below = 0;
  for (const LocalTimeSample& s : samples) {
    plus.push_back(s.plus);
    minus.push_back(s.minus);
    sym.push_back(s.symmetric);
    if (s.residual) {
      ++with_residual;
      if (*s.residual <= residual_threshold) ++below;
    }
  }
  const RatioEstimate rp = ratio_of_means(plus, sym);
  const RatioEstimate rm = ratio_of_means(minus, sym);
  const double a = alpha.alpha();
  ValidationReport r{"local_time", seed, samples.size()};
  Check cp = check_within("L+/L0 vs 2 alpha", 2.0 * a, rp.ratio, relative_tol * 2.0 * a);
  cp.std_error = rp.std_error;
  Check cm = check_within("L-/L0 vs 2 (1 - alpha)", 2.0 * (1.0 - a), rm.ratio, relative_tol * 2.0 * (1.0 - a));
  cm.std_error = rm.std_error;
  r.add(cp);
  r.add(cm);
  if (with_residual > 0) {
    const double frac = static_cast<double>(below) / static_cast<double>(with_residual);
    char thr[32];
    std::snprintf(thr, sizeof thr, "%g", residual_threshold);
    Check c = check_at_least(std::string("fraction of paths with residual <= ") + thr, residual_fraction,
                             frac);
    r.add(c);
  }
  r.value("eps", eps);
  r.value("mean_symmetric_local_time", pairwise_sum(sym) / static_cast<double>(sym.size()));
  return r;
}

ValidationReport local_time_statistics(std::span<const SampledPath> paths, const SkewParameter& alpha, double eps,
                                       std::uint64_t seed, double relative_tol, double residual_threshold,
                                       double residual_fraction) {
  std::vector<LocalTimeSample> s;
  s.reserve(paths.size());
  for (const SampledPath& p : paths) s.push_back(local_time_sample(p, eps, alpha.beta()));
  return local_time_report(s, alpha, eps, seed, relative_tol, residual_threshold, residual_fraction);
}

// ---------------------------------------------------------------------------
// Marginal law

ValidationReport gof_marginal(std::span<const double> samples, double t, double x0, const SkewParameter& alpha,
                              std::uint64_t seed, double critical) {
  if (samples.empty()) throw DomainError("gof_marginal: empty sample");
  const TransitionDensityModel model(alpha);
  const KsResult ks = ks_one_sample(samples, [&](double y) { return model.cdf(t, x0, y); });
  double pos = 0.0;
  for (double v : samples) pos += v > 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
  const double n = static_cast<double>(samples.size());
  const double freq = pos / n;
  const double target = 1.0 - model.cdf(t, x0, -0.0 - std::numeric_limits<double>::denorm_min());
  const double se = std::sqrt(target * (1.0 - target) / n);
  ValidationReport r{"marginal", seed, samples.size()};
  r.add(check_ks("KS vs transition CDF", ks.statistic, n, critical));
  r.add(check_sigma("sign frequency", target, freq, se, 3.0));
  r.value("ks_p_value", ks.p_value);
  return r;
}

// ---------------------------------------------------------------------------
// Embedded-walk convergence rate

namespace {

struct Coarse {
  std::int64_t spacing;
  std::int64_t level = 0;
  std::vector<std::int64_t> levels{0};
  std::size_t needed;
  bool done() const { return levels.size() > needed; }
};

}  // namespace

ValidationReport convergence_rate(const SkewParameter& alpha, std::span<const int> n_list, int reference_n,
                                  const RngStream& rng, const RateOptions& options) {
  if (n_list.empty()) throw DomainError("convergence_rate: empty n list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw DomainError("convergence_rate: n list must be positive and strictly ascending");
    if (reference_n % n_list[i] != 0)
      throw DomainError("convergence_rate: n = " + std::to_string(n_list[i]) + " does not divide the reference scale");
  }
  if (reference_n < 16 * n_list.back())
    throw DomainError("convergence_rate: reference scale " + std::to_string(reference_n) + " is below 16 x max n");
  const int P = options.probes;
  if (P < 1) throw DomainError("convergence_rate: need at least one probe time");
  const std::size_t m = n_list.size();
  const auto N = static_cast<std::int64_t>(reference_n);
  std::vector<std::uint64_t> probe_steps(static_cast<std::size_t>(P));
  std::vector<double> probe_t(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) {
    probe_t[static_cast<std::size_t>(j)] = options.T * (j + 1) / P;
    probe_steps[static_cast<std::size_t>(j)] =
        static_cast<std::uint64_t>(std::llround(probe_t[static_cast<std::size_t>(j)] * static_cast<double>(N * N)));
  }

  auto replicate = [&](std::size_t, RngStream& local) {
    WalkSpec spec;
    spec.n = reference_n;
    spec.T = options.T;
    spec.alpha = alpha;
    SkewWalk walk(spec);
    std::vector<Coarse> coarse;
    for (int n : n_list) {
      Coarse c;
      c.spacing = N / n;
      c.needed = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * n * options.T - 1e-9));
      coarse.push_back(std::move(c));
    }
    std::vector<std::int64_t> ref(static_cast<std::size_t>(P));
    std::size_t next_probe = 0;
    for (;;) {
      std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
      if (next_probe < probe_steps.size()) limit = probe_steps[next_probe] - walk.time();
      bool pending = next_probe < probe_steps.size();
      const std::int64_t pos = walk.position();
      for (const Coarse& c : coarse) {
        if (c.done()) continue;
        pending = true;
        const std::int64_t dist = std::min(pos - (c.level - c.spacing), (c.level + c.spacing) - pos);
        limit = std::min<std::uint64_t>(limit, static_cast<std::uint64_t>(dist));
      }
      if (!pending) break;
      walk.advance(limit, local);
      const std::int64_t p = walk.position();
      while (next_probe < probe_steps.size() && walk.time() == probe_steps[next_probe]) ref[next_probe++] = p;
      for (Coarse& c : coarse) {
        if (c.done()) continue;
        if (p == c.level + c.spacing || p == c.level - c.spacing) {
          c.level = p;
          c.levels.push_back(p);
        }
      }
    }
    std::vector<double> err(m * static_cast<std::size_t>(P));
    for (std::size_t i = 0; i < m; ++i) {
      const double n2 = static_cast<double>(n_list[i]) * n_list[i];
      for (std::size_t j = 0; j < static_cast<std::size_t>(P); ++j) {
        const double s = n2 * probe_t[j];
        const auto k = static_cast<std::size_t>(std::floor(s + 1e-9));
        const double w = std::max(0.0, s - static_cast<double>(k));
        const auto& lv = coarse[i].levels;
        double xn = static_cast<double>(lv[k]);
        if (w > 1e-9) xn += w * static_cast<double>(lv[k + 1] - lv[k]);
        err[i * static_cast<std::size_t>(P) + j] = std::abs(xn - static_cast<double>(ref[j])) / static_cast<double>(N);
      }
    }
    return err;
  };

  const auto results = monte_carlo(options.replications, rng, options.workers, replicate);
  ValidationReport r{"convergence_rate", rng.seed(), options.replications};
  std::vector<double> sup(m);
  std::vector<double> sup_se(m);
  std::vector<double> col(results.size());
  for (std::size_t i = 0; i < m; ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(P); ++j) {
      for (std::size_t q = 0; q < results.size(); ++q) col[q] = results[q][i * static_cast<std::size_t>(P) + j];
      const MeanEstimate e = mean_estimate(col);
      if (e.mean > best) {
        best = e.mean;
        sup_se[i] = e.std_error;
      }
    }
    sup[i] = best;
    r.value("sup_error_n" + std::to_string(n_list[i]), best);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    Check c = check_at_least("error decreases n=" + std::to_string(n_list[i]) + " -> " + std::to_string(n_list[i + 1]),
                             1e-15, sup[i] - sup[i + 1]);
    c.std_error = std::hypot(sup_se[i], sup_se[i + 1]);
    r.add(c);
  }
  double slope = 0.0;
  if (m >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mx += std::log(static_cast<double>(n_list[i]));
      my += std::log(sup[i]);
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dx = std::log(static_cast<double>(n_list[i])) - mx;
      sxy += dx * (std::log(sup[i]) - my);
      sxx += dx * dx;
    }
    slope = sxy / sxx;
    r.add(check_at_most("log-log slope", options.slope_bound, slope, 0.0, 0.0));
  }
  r.value("slope", slope);
  r.value("reference_n", reference_n);
  return r;
}

// ---------------------------------------------------------------------------
// Rescaling limit

namespace {

std::pair<double, double> drift_support(const PiecewiseFunction& b) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.pieces().size(); ++i) {
    const Coefficient& c = b.pieces()[i];
    if (c.is_constant() && c.constant() == 0.0) continue;
    if (!std::isfinite(b.piece_lo(i)) || !std::isfinite(b.piece_hi(i)))
      throw DomainError("rescaling: drift is not integrable (non-zero on an unbounded piece)");
    lo = std::min(lo, b.piece_lo(i));
    hi = std::max(hi, b.piece_hi(i));
  }
  return {lo, hi};
}

}  // namespace

double drift_kappa(const PiecewiseFunction& b) {
  drift_support(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b.pieces().size(); ++i) {
    const Coefficient& c = b.pieces()[i];
    if (c.is_constant()) {
      if (c.constant() != 0.0) total += c.constant() * (b.piece_hi(i) - b.piece_lo(i));
    } else {
      total += numerics::integrate([&](double x) { return c(x); }, b.piece_lo(i), b.piece_hi(i), 1e-12);
    }
  }
  return 2.0 * total;
}

bool rescaled_sign(const PiecewiseFunction& b, int n, double dt, RngStream& rng) {
  const auto [lo, hi] = drift_support(b);
  const double H = static_cast<double>(n) * n;
  if (!(lo <= hi)) return rng.normal() >= 0.0;
  if (!(lo <= 0.0 && 0.0 <= hi)) throw DomainError("rescaling: the drift support must contain 0");
  double t = 0.0;
  double x = 0.0;
  while (t < H) {
    if (x >= lo && x <= hi) {
      const double h = std::min(dt, H - t);
      x += b(x) * h + std::sqrt(h) * rng.normal();
      t += h;
    } else {
      // Exact Brownian first passage to the support: tau = (d / Z)^2.
      const double d = x < lo ? lo - x : x - hi;
      const double z = rng.normal();
      const double tau = (d / z) * (d / z);
      if (t + tau >= H) break;
      t += tau;
      x = x < lo ? lo : hi;
    }
  }
  return x >= 0.0;
}

ValidationReport rescaling_limit(const PiecewiseFunction& b, int n, const RngStream& rng,
                                 const RescalingOptions& options) {
  if (n < 1) throw DomainError("rescaling: n must be >= 1");
  const double kappa = drift_kappa(b);
  const double target = std::exp(kappa) / (1.0 + std::exp(kappa));
  const auto signs = monte_carlo(options.sample_size, rng, options.workers,
                                 [&](std::size_t, RngStream& local) { return rescaled_sign(b, n, options.dt, local) ? 1.0 : 0.0; });
  const double freq = pairwise_sum(signs) / static_cast<double>(signs.size());
  const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(signs.size()));
  ValidationReport r{"rescaling_limit", rng.seed(), options.sample_size};
  r.add(check_sigma("sign frequency of X^n_1 vs e^k/(1+e^k)", target, freq, se, 3.0, options.allowance));
  r.value("kappa", kappa);
  r.value("n", n);
  r.value("dt", options.dt);
  return r;
}

// ---------------------------------------------------------------------------
// Coupling

std::size_t order_violations(const SampledPath& lower, const SampledPath& upper) {
  if (lower.size() != upper.size()) throw DomainError("coupling: paths of different length");
  std::size_t v = 0;
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (lower.value(k) > upper.value(k)) ++v;
  return v;
}

std::optional<std::size_t> coalescence_index(const SampledPath& a, const SampledPath& b) {
  if (a.size() != b.size()) throw DomainError("coupling: paths of different length");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.value(k) == b.value(k)) return k;
  return std::nullopt;
}

double l1_kernel(double t, double x) {
  if (!(t > 0.0)) return 0.0;
  const double ax = std::abs(x);
  return std::sqrt(2.0 * t / M_PI) * std::exp(-x * x / (2.0 * t)) - ax * std::erfc(ax / std::sqrt(2.0 * t));
}

ValidationReport coupling_checks(const CouplingInput& in, std::uint64_t seed) {
  ValidationReport r{"coupling", seed, in.ordered_pairs};
  if (in.ordered_pairs > 0) r.add(check_zero("lattice order violations", static_cast<double>(in.violations)));
  for (std::size_t i = 1; i < in.coalescence.size(); ++i) {
    r.add(check_at_least("coalesced fraction T=" + format_value(in.coalescence[i].first) + " >= T=" +
                             format_value(in.coalescence[i - 1].first),
                         in.coalescence[i - 1].second, in.coalescence[i].second));
  }
  for (const auto& [T, f] : in.coalescence) r.value("coalesced_T" + format_value(T), f);
  if (!in.l1_distances.empty()) {
    const MeanEstimate e = mean_estimate(in.l1_distances);
    const double bound = std::abs(in.beta1 - in.beta2) * l1_kernel(in.t, in.x);
    r.add(check_at_most("E|X1 - X2| <= |b1 - b2| I(t, x)", bound, e.mean, e.std_error, 3.0, in.l1_allowance));
  }
  if (!in.start_distances.empty()) {
    const double gap = std::abs(l1_kernel(in.t, in.x1) - l1_kernel(in.t, in.x2));
    const double dx = std::abs(in.x1 - in.x2);
    const MeanEstimate e = mean_estimate(in.start_distances);
    r.add(check_at_most("E|X1 - X2| <= |x1 - x2| + |b| dI", dx + std::abs(in.beta) * gap, e.mean, e.std_error, 3.0,
                        in.start_allowance));
    if (!in.local_time_gaps.empty()) {
      const MeanEstimate l = mean_estimate(in.local_time_gaps);
      r.add(check_at_most("E|L1 - L2| <= |x1 - x2| / |b| + dI", dx / std::abs(in.beta) + gap, l.mean, l.std_error, 3.0,
                          in.start_allowance));
    }
  }
  return r;
}

}  // namespace skewsim
