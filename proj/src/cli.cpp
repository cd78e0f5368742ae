#include "skewsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "skewsim/density.hpp"
#include "skewsim/exit_scheme.hpp"
#include "skewsim/generators.hpp"
#include "skewsim/parallel.hpp"
#include "skewsim/pde.hpp"
#include "skewsim/scale_speed.hpp"
#include "skewsim/validation.hpp"

namespace skewsim::cli {

using json = nlohmann::ordered_json;

namespace {

std::vector<KeySpec> common_keys() {
  return {
      {"seed", Kind::integer, nullptr, "64-bit seed (falls back to SKEWSIM_SEED)"},
      {"workers", Kind::integer, 1, "worker threads"},
      {"output", Kind::text, "", "CSV output path (empty: stdout)"},
      {"report", Kind::text, "", "JSON report path (empty: none)"},
  };
}

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  auto c = common_keys();
  keys.insert(keys.begin(), c.begin(), c.end());
  return keys;
}

const std::map<std::string, std::vector<KeySpec>>& key_table() {
  static const std::map<std::string, std::vector<KeySpec>> table = {
      {"simulate", with_common({
                       {"generator", Kind::text, nullptr, "walk | flip | euler | leader"},
                       {"scheme", Kind::text, nullptr, "c | e (exit-time skeletons)"},
                       {"alpha", Kind::real, 0.5, "skewness parameter"},
                       {"medium", Kind::real_list, nullptr, "a-,a+[,rho-,rho+]: two-layer medium split at 0"},
                       {"n", Kind::integer, 100, "walk scale"},
                       {"t", Kind::real, 1.0, "horizon"},
                       {"dt", Kind::real, 1e-3, "Euler step"},
                       {"delta", Kind::real, 1e-4, "follow-the-leader micro-step"},
                       {"x0", Kind::real, 0.0, "start point"},
                       {"paths", Kind::integer, 1, "number of paths"},
                       {"points", Kind::integer, 0, "output times per path (0: native grid)"},
                       {"step", Kind::real, 0.1, "scheme grid step"},
                       {"extent", Kind::real, 6.0, "scheme grid half-width"},
                   })},
      {"density", with_common({
                      {"alpha", Kind::real, 0.5, "skewness parameter"},
                      {"t", Kind::real, 1.0, "time"},
                      {"x", Kind::real, 0.0, "start point"},
                      {"y", Kind::real, 0.0, "end point"},
                  })},
      {"validate", with_common({
                       {"suite", Kind::text, "sign_law",
                        "sign_law | marginal | hitting | exit_time | occupation | local_time | rescaling | pde"},
                       {"generator", Kind::text, nullptr, "walk | flip | euler | leader"},
                       {"scheme", Kind::text, nullptr, "c | e"},
                       {"alpha", Kind::real, 0.7, "skewness parameter"},
                       {"paths", Kind::integer, 10000, "sample size"},
                       {"n", Kind::integer, 200, "walk scale"},
                       {"t", Kind::real, 1.0, "horizon"},
                       {"dt", Kind::real, 1e-3, "Euler step"},
                       {"delta", Kind::real, 1e-4, "follow-the-leader micro-step"},
                       {"step", Kind::real, 0.25, "scheme grid step"},
                       {"level", Kind::real, 1.0, "exit level L for (-L, L)"},
                       {"eps", Kind::real, 0.01, "local-time bandwidth"},
                       {"drift", Kind::real, 0.27465307216702745, "drift height c in b = c 1_[-1,1]"},
                   })},
      {"pde", with_common({
                  {"alpha", Kind::real, 0.5, "skewness parameter"},
                  {"medium", Kind::real_list, nullptr, "a-,a+[,rho-,rho+]: two-layer medium split at 0"},
                  {"initial", Kind::text, "gaussian", "gaussian | step | one"},
                  {"t", Kind::real, 1.0, "horizon"},
                  {"R", Kind::real, 8.0, "domain half-width"},
                  {"nx", Kind::integer, 321, "spatial nodes (odd)"},
                  {"nt", Kind::integer, 200, "time steps"},
                  {"theta", Kind::real, 1.0, "1 implicit Euler, 0.5 Crank-Nicolson"},
                  {"startup", Kind::integer, 0, "implicit start-up steps when theta < 1"},
                  {"snapshots", Kind::integer, 1, "equally spaced output times in (0, t]"},
              })},
      {"rate", with_common({
                   {"alpha", Kind::real, 0.7, "skewness parameter"},
                   {"ns", Kind::int_list, json::array({10, 20, 40, 80}), "coarse walk scales"},
                   {"reference", Kind::integer, 1280, "reference walk scale"},
                   {"replications", Kind::integer, 1000, "replications"},
                   {"probes", Kind::integer, 20, "probe times"},
                   {"t", Kind::real, 1.0, "horizon"},
               })},
  };
  return table;
}

bool is_stochastic(const RunConfig& c) {
  if (c.command == "simulate" || c.command == "rate") return true;
  if (c.command == "validate") return c.params["suite"] != "pde";
  return false;
}

json convert_text(const KeySpec& key, const std::string& raw) {
  auto fail = [&]() -> UsageError {
    return UsageError("invalid value for '" + key.name + "': '" + raw + "'");
  };
  auto to_int = [&](const std::string& s) -> long long {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != s.size()) throw fail();
    return v;
  };
  auto to_real = [&](const std::string& s) -> double {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != s.size()) throw fail();
    return v;
  };
  switch (key.kind) {
    case Kind::integer:
      if (key.name == "seed") {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
          if (!raw.empty() && raw[0] == '-') throw fail();
          v = std::stoull(raw, &used);
        } catch (const std::exception&) {
          throw fail();
        }
        if (used != raw.size()) throw fail();
        return static_cast<std::uint64_t>(v);
      }
      return to_int(raw);
    case Kind::real:
      return to_real(raw);
    case Kind::text:
      return raw;
    case Kind::real_list:
    case Kind::int_list: {
      json arr = json::array();
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (key.kind == Kind::int_list) arr.push_back(to_int(item));
        else arr.push_back(to_real(item));
      }
      if (arr.empty()) throw fail();
      return arr;
    }
  }
  throw fail();
}

void check_type(const KeySpec& key, const json& v) {
  if (v.is_null()) return;
  bool ok = false;
  switch (key.kind) {
    case Kind::integer:
      ok = v.is_number_integer();
      break;
    case Kind::real:
      ok = v.is_number();
      break;
    case Kind::text:
      ok = v.is_string();
      break;
    case Kind::real_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
      break;
    case Kind::int_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
      break;
  }
  if (key.name == "seed" && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) ok = false;
  if (!ok) throw UsageError("invalid type for '" + key.name + "': " + v.dump());
}

// ---------------------------------------------------------------------------
// Parameter access

struct Params {
  const json& p;

  double real(const char* k) const { return p.at(k).get<double>(); }
  long long integer(const char* k) const { return p.at(k).get<long long>(); }
  std::string text(const char* k) const { return p.at(k).is_null() ? "" : p.at(k).get<std::string>(); }
  bool has(const char* k) const { return !p.at(k).is_null(); }

  double positive(const char* k) const {
    const double v = real(k);
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("'" + std::string(k) + "' must be positive, got " + format_value(v));
    return v;
  }
  long long count(const char* k, long long lo = 1) const {
    const long long v = integer(k);
    if (v < lo) throw UsageError("'" + std::string(k) + "' must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
    return v;
  }
  SkewParameter alpha() const {
    const double a = real("alpha");
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("'alpha' must lie in [0, 1], got " + format_value(a));
    return skew_from_alpha(a);
  }
  std::optional<PiecewiseDiffusion> medium() const {
    if (!p.contains("medium") || p.at("medium").is_null()) return std::nullopt;
    const auto v = p.at("medium").get<std::vector<double>>();
    if (v.size() != 2 && v.size() != 4) throw UsageError("'medium' needs 2 or 4 values, got " + std::to_string(v.size()));
    for (double x : v)
      if (!(x > 0.0)) throw UsageError("'medium' values must be positive");
    const double rm = v.size() == 4 ? v[2] : 1.0;
    const double rp = v.size() == 4 ? v[3] : 1.0;
    return validate_piecewise(PiecewiseDiffusion::piecewise_constant({0.0}, {v[0], v[1]}, {rm, rp}, {0.0, 0.0}));
  }
  PiecewiseDiffusion coefficients() const {
    if (auto m = medium()) return *m;
    return PiecewiseDiffusion::skew_brownian(alpha());
  }
};

std::string method_of(const Params& p) {
  const bool g = p.has("generator");
  const bool s = p.has("scheme");
  if (g == s) throw UsageError("exactly one of 'generator' and 'scheme' must be set");
  if (g) {
    const std::string v = p.text("generator");
    if (v != "walk" && v != "flip" && v != "euler" && v != "leader")
      throw UsageError("invalid value for 'generator': '" + v + "'");
    return v;
  }
  const std::string v = p.text("scheme");
  if (v != "c" && v != "e") throw UsageError("invalid value for 'scheme': '" + v + "'");
  return "scheme_" + v;
}

// ---------------------------------------------------------------------------
// Output

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      out_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw Error("cannot open '" + path + "' for writing");
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }
  void finish(const std::string& path) {
    out_->flush();
    if (!*out_) throw Error("write failed for '" + (path.empty() ? std::string("stdout") : path) + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

void write_json(const std::string& path, const json& doc) {
  if (path.empty()) return;
  Sink s(path, std::cout);
  s.stream() << doc.dump(2) << '\n';
  s.finish(path);
}

// ---------------------------------------------------------------------------
// Terminal samplers shared by simulate and validate

class TerminalSampler {
 public:
  TerminalSampler(const Params& p, std::string method) : method_(std::move(method)) {
    T_ = p.positive("t");
    alpha_ = p.alpha();
    if (method_ == "walk" || method_ == "flip") {
      n_ = static_cast<int>(p.count("n"));
    } else if (method_ == "euler") {
      const double dt = p.positive("dt");
      const SkewSDE sde = p.medium() ? sde_from_divergence(*p.medium()) : skew_brownian_sde(alpha_);
      stepper_.emplace(sde, dt);
    } else if (method_ == "leader") {
      delta_ = p.positive("delta");
    } else if (method_ == "scheme_c") {
      reduction_.emplace(brownian_reduction(p.coefficients()));
      const double step = p.positive("step");
      const double ext = std::max(8.0 * step, 6.0 * std::sqrt(T_));
      grid_.emplace(ExitGrid::build(*reduction_, -ext, ext, step));
    } else {
      const double step = p.positive("step");
      std::vector<double> g;
      const long k = static_cast<long>(std::ceil(6.0 * std::sqrt(T_) / step));
      for (long i = -k; i <= k; ++i) g.push_back(static_cast<double>(i) * step);
      scheme_e_.emplace(p.coefficients(), std::move(g));
    }
  }

  bool lattice() const { return method_ == "walk" || method_ == "flip"; }
  int n() const { return n_; }

  double operator()(RngStream& rng) const {
    if (method_ == "walk") {
      WalkSpec spec;
      spec.n = n_;
      spec.T = T_;
      spec.alpha = alpha_;
      return static_cast<double>(walk_terminal_index(spec, rng)) / n_;
    }
    if (method_ == "flip") return static_cast<double>(excursion_flip_terminal_index(n_, T_, alpha_, rng)) / n_;
    if (method_ == "euler") return euler_terminal(*stepper_, T_, 0.0, rng);
    if (method_ == "leader") return follow_leader_terminal(delta_, T_, alpha_, rng);
    if (method_ == "scheme_c") {
      const SkeletonPath s = gen_scheme_C(*reduction_, *grid_, T_, 0.0, rng);
      return reduction_->to_original(s.final_value());
    }
    return scheme_e_->run(T_, 0.0, rng).final_value();
  }

 private:
  std::string method_;
  double T_ = 1.0;
  SkewParameter alpha_;
  int n_ = 0;
  double delta_ = 0.0;
  std::optional<SkewEulerStepper> stepper_;
  std::optional<BrownianReduction> reduction_;
  std::optional<ExitGrid> grid_;
  std::optional<SchemeE> scheme_e_;
};

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Params p{cfg.params};
  const std::string method = method_of(p);
  const auto paths = static_cast<std::size_t>(p.count("paths"));
  const double T = p.positive("t");
  const double x0 = p.real("x0");
  const long long points = p.count("points", 0);
  const bool skeleton = method.rfind("scheme_", 0) == 0;
  if (skeleton && points != 0) throw UsageError("'points' applies to grid generators only");
  if (points == 1) throw UsageError("'points' must be 0 or >= 2");
  if ((method == "walk" || method == "flip" || method == "leader") && p.medium())
    throw UsageError("'medium' is only supported by euler and the schemes");
  if ((method == "flip" || method == "leader") && x0 != 0.0) throw UsageError("'x0' must be 0 for " + method);
  const SkewParameter alpha = p.alpha();
  const RngStream root(*cfg.seed(), 0);

  std::optional<BrownianReduction> red;
  std::optional<ExitGrid> grid;
  std::optional<SchemeE> sch;
  std::optional<SkewSDE> sde;
  if (method == "scheme_c") {
    red.emplace(brownian_reduction(p.coefficients()));
    const double step = p.positive("step");
    const double ext = p.positive("extent");
    grid.emplace(ExitGrid::build(*red, -ext, ext, step));
  } else if (method == "scheme_e") {
    const double step = p.positive("step");
    const double ext = p.positive("extent");
    std::vector<double> g;
    const long k = static_cast<long>(std::llround(ext / step));
    for (long i = -k; i <= k; ++i) g.push_back(static_cast<double>(i) * step);
    if (std::abs(x0 / step - std::round(x0 / step)) > 1e-9) throw UsageError("'x0' must be a multiple of 'step'");
    g.push_back(x0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), g.end());
    sch.emplace(p.coefficients(), std::move(g));
  } else if (method == "euler") {
    sde = p.medium() ? sde_from_divergence(*p.medium()) : skew_brownian_sde(alpha);
  }

  auto one_path = [&](RngStream& rng) -> std::string {
    std::string rows;
    char buf[128];
    if (skeleton) {
      SkeletonPath s = method == "scheme_c" ? gen_scheme_C(*red, *grid, T, red->to_reduced(x0), rng).to_original(*red)
                                            : sch->run(T, x0, rng);
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s\n", csv_number(s.times[k]).c_str(), csv_number(s.positions[k]).c_str(),
                      k == 0 ? "start" : "exit");
        rows += buf;
      }
      if (s.terminal_time) {
        std::snprintf(buf, sizeof buf, "%s,%s,horizon\n", csv_number(*s.terminal_time).c_str(),
                      csv_number(*s.terminal_value).c_str());
        rows += buf;
      }
      return rows;
    }
    SampledPath path;
    if (method == "walk") {
      WalkSpec spec;
      spec.n = static_cast<int>(p.count("n"));
      spec.T = T;
      spec.alpha = alpha;
      spec.x0 = x0;
      path = gen_random_walk(spec, rng);
    } else if (method == "flip") {
      path = gen_excursion_flip(static_cast<int>(p.count("n")), T, alpha, rng);
    } else if (method == "euler") {
      path = gen_euler(*sde, p.positive("dt"), T, x0, rng);
    } else {
      path = gen_follow_leader(p.positive("delta"), T, alpha, rng).x;
    }
    if (points == 0) {
      for (std::size_t k = 0; k < path.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s,%s\n", csv_number(path.time(k)).c_str(), csv_number(path.value(k)).c_str());
        rows += buf;
      }
    } else {
      for (long long k = 0; k < points; ++k) {
        const double t = T * static_cast<double>(k) / static_cast<double>(points - 1);
        std::snprintf(buf, sizeof buf, "%s,%s\n", csv_number(t).c_str(), csv_number(interpolate(path, t)).c_str());
        rows += buf;
      }
    }
    return rows;
  };

  const std::string out_path = p.text("output");
  Sink sink(out_path, out);
  sink.stream() << (skeleton ? "path_id,t,x,event\n" : "path_id,t,x\n");
  const std::size_t chunk = 256;
  std::vector<double> terminals;
  terminals.reserve(paths);
  for (std::size_t base = 0; base < paths; base += chunk) {
    const std::size_t count = std::min(chunk, paths - base);
    const auto blocks = parallel_map(count, cfg.workers(), [&](std::size_t i) {
      RngStream rng = root.child(base + i);
      return one_path(rng);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::string id = std::to_string(base + i);
      std::istringstream lines(blocks[i]);
      std::string line;
      std::string last;
      while (std::getline(lines, line)) {
        sink.stream() << id << ',' << line << '\n';
        last = line;
      }
      const auto c1 = last.find(',');
      const auto c2 = last.find(',', c1 + 1);
      terminals.push_back(std::stod(last.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1)));
    }
  }
  sink.finish(out_path);

  if (!p.text("report").empty()) {
    double pos = 0.0;
    for (double v : terminals) pos += v > 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
    const MeanEstimate m = mean_estimate(terminals);
    json doc;
    doc["config"] = cfg.params;
    doc["command"] = cfg.command;
    doc["paths"] = paths;
    doc["mean_terminal"] = m.mean;
    doc["mean_terminal_std_error"] = m.std_error;
    doc["sign_frequency"] = pos / static_cast<double>(paths);
    write_json(p.text("report"), doc);
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------
// density

int cmd_density(const RunConfig& cfg, std::ostream& out) {
  const Params p{cfg.params};
  const TransitionDensityModel model(p.alpha());
  const double t = p.positive("t");
  const double x = p.real("x");
  const double y = p.real("y");
  const double q = model.density(t, x, y);
  const double F = model.cdf(t, x, y);
  out << "density " << csv_number(q) << '\n' << "cdf " << csv_number(F) << '\n';
  json doc;
  doc["config"] = cfg.params;
  doc["command"] = cfg.command;
  doc["density"] = q;
  doc["cdf"] = F;
  write_json(p.text("report"), doc);
  return kExitPass;
}

// ---------------------------------------------------------------------------
// validate

ValidationReport suite_sign(const Params& p, const RunConfig& cfg, bool ks) {
  const std::string method = method_of(p);
  const TerminalSampler sampler(p, method);
  const auto N = static_cast<std::size_t>(p.count("paths"));
  const RngStream root(*cfg.seed(), 0);
  const double T = p.positive("t");
  const double width = sampler.lattice() ? 2.0 / sampler.n() : 0.0;
  const auto samples = monte_carlo(N, root, cfg.workers(), [&](std::size_t, RngStream& rng) {
    const double v = sampler(rng);
    if (!ks || width == 0.0) return v;
    RngStream d = rng.child(7);
    return v + (d.uniform() - 0.5) * width;
  });
  const SkewParameter alpha = p.alpha();
  if (ks) {
    ValidationReport r = gof_marginal(samples, T, 0.0, alpha, *cfg.seed());
    r.name = "marginal";
    return r;
  }
  double pos = 0.0;
  for (double v : samples) pos += v > 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
  const double n = static_cast<double>(N);
  const double a = alpha.alpha();
  ValidationReport r{"sign_law", *cfg.seed(), N};
  r.add(check_sigma("P[X_t >= 0] vs alpha", a, pos / n, std::sqrt(a * (1.0 - a) / n), 3.0));
  return r;
}

struct ExitOutcome {
  double up;
  double time;
};

ValidationReport suite_exit(const Params& p, const RunConfig& cfg, bool hitting) {
  const std::string method = method_of(p);
  if (method != "walk" && method != "scheme_c" && method != "scheme_e")
    throw UsageError("suite '" + p.text("suite") + "' supports generator walk and schemes c, e");
  const SkewParameter alpha = p.alpha();
  const double L = p.positive("level");
  const auto N = static_cast<std::size_t>(p.count("paths"));
  const RngStream root(*cfg.seed(), 0);
  const PiecewiseDiffusion coeffs = p.coefficients();

  std::function<ExitOutcome(RngStream&)> run;
  std::optional<BrownianReduction> red;
  std::optional<ExitGrid> grid;
  std::optional<SchemeE> sch;
  if (method == "walk") {
    const auto n = static_cast<int>(p.count("n"));
    const double nl = L * n;
    if (std::abs(nl - std::round(nl)) > 1e-9) throw UsageError("'level' times 'n' must be an integer");
    const auto K = static_cast<std::int64_t>(std::llround(nl));
    run = [=](RngStream& rng) {
      WalkSpec spec;
      spec.n = n;
      spec.T = 1.0;
      spec.alpha = alpha;
      SkewWalk w(spec);
      while (std::abs(w.position()) < K) w.advance(static_cast<std::uint64_t>(K - std::abs(w.position())), rng);
      return ExitOutcome{w.position() > 0 ? 1.0 : 0.0, static_cast<double>(w.time()) / (static_cast<double>(n) * n)};
    };
  } else if (method == "scheme_c") {
    red.emplace(brownian_reduction(coeffs));
    const double lo = red->to_reduced(-L);
    const double hi = red->to_reduced(L);
    grid.emplace(ExitGrid::build(*red, lo, hi, p.positive("step")));
    run = [&, lo, hi](RngStream& rng) {
      const SkeletonPath s =
          gen_scheme_C(*red, *grid, std::numeric_limits<double>::infinity(), 0.0, rng, StopRule{lo, hi});
      return ExitOutcome{s.positions.back() >= hi - 1e-12 ? 1.0 : 0.0, s.times.back()};
    };
  } else {
    const double step = p.positive("step");
    std::vector<double> g;
    const long k = std::lround(L / step);
    if (std::abs(L / step - static_cast<double>(k)) > 1e-9) throw UsageError("'level' must be a multiple of 'step'");
    for (long i = -k; i <= k; ++i) g.push_back(static_cast<double>(i) * step);
    sch.emplace(coeffs, std::move(g));
    run = [&, L](RngStream& rng) {
      const SkeletonPath s = sch->run(std::numeric_limits<double>::infinity(), 0.0, rng, StopRule{-L, L});
      return ExitOutcome{s.positions.back() >= L - 1e-12 ? 1.0 : 0.0, s.times.back()};
    };
  }
  const auto outcomes = monte_carlo(N, root, cfg.workers(), [&](std::size_t, RngStream& rng) { return run(rng); });
  std::vector<double> ups;
  std::vector<double> times;
  for (const auto& o : outcomes) {
    ups.push_back(o.up);
    times.push_back(o.time);
  }
  const ScaleSpeedModel model = ScaleSpeedModel::build(coeffs);
  if (hitting) {
    const double target = hitting_probability(model, 0.0, -L, L);
    const MeanEstimate m = mean_estimate(ups);
    ValidationReport r{"hitting", *cfg.seed(), N};
    r.add(check_sigma("P[hit L before -L]", target, m.mean, std::sqrt(target * (1.0 - target) / static_cast<double>(N)),
                      3.0));
    return r;
  }
  const double target = exit_time_moments(model, 0.0, -L, L).expected;
  const MeanEstimate m = mean_estimate(times);
  ValidationReport r{"exit_time", *cfg.seed(), N};
  r.add(check_sigma("E[exit time of (-L, L)]", target, m.mean, m.std_error, 3.0));
  r.value("L_squared", L * L);
  return r;
}

ValidationReport suite_occupation(const Params& p, const RunConfig& cfg) {
  const SkewParameter alpha = p.alpha();
  const auto n = static_cast<int>(p.count("n"));
  const double T = p.positive("t");
  const auto N = static_cast<std::size_t>(p.count("paths"));
  const RngStream root(*cfg.seed(), 0);
  const auto fr = monte_carlo(N, root, cfg.workers(), [&](std::size_t, RngStream& rng) {
    WalkSpec spec;
    spec.n = n;
    spec.T = T;
    spec.alpha = alpha;
    return walk_occupation_fraction(spec, rng);
  });
  return occupation_report(fr, alpha, *cfg.seed());
}

ValidationReport suite_local_time(const Params& p, const RunConfig& cfg) {
  const SkewParameter alpha = p.alpha();
  const double dt = p.positive("dt");
  const double T = p.positive("t");
  const double eps = p.positive("eps");
  const auto N = static_cast<std::size_t>(p.count("paths"));
  const RngStream root(*cfg.seed(), 0);
  const SkewSDE sde = skew_brownian_sde(alpha);
  const auto samples = monte_carlo(N, root, cfg.workers(), [&](std::size_t, RngStream& rng) {
    return local_time_sample(gen_euler(sde, dt, T, 0.0, rng), eps, alpha.beta());
  });
  return local_time_report(samples, alpha, eps, *cfg.seed());
}

ValidationReport suite_rescaling(const Params& p, const RunConfig& cfg) {
  const double c = p.real("drift");
  const PiecewiseFunction b({-1.0, 1.0}, {0.0, c, 0.0});
  RescalingOptions o;
  o.sample_size = static_cast<std::size_t>(p.count("paths"));
  o.dt = p.positive("dt");
  o.workers = cfg.workers();
  return rescaling_limit(b, static_cast<int>(p.count("n")), RngStream(*cfg.seed(), 0), o);
}

ValidationReport suite_pde(const Params& p) {
  const SkewParameter alpha = p.alpha();
  const double t = p.positive("t");
  auto phi = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); };
  std::vector<double> probes;
  for (int i = -20; i <= 20; ++i) probes.push_back(0.1 * i);
  return pde_vs_density(alpha, phi, t, probes);
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const Params p{cfg.params};
  const std::string suite = p.text("suite");
  ValidationReport r;
  if (suite == "sign_law") r = suite_sign(p, cfg, false);
  else if (suite == "marginal") r = suite_sign(p, cfg, true);
  else if (suite == "hitting") r = suite_exit(p, cfg, true);
  else if (suite == "exit_time") r = suite_exit(p, cfg, false);
  else if (suite == "occupation") r = suite_occupation(p, cfg);
  else if (suite == "local_time") r = suite_local_time(p, cfg);
  else if (suite == "rescaling") r = suite_rescaling(p, cfg);
  else if (suite == "pde") r = suite_pde(p);
  else throw UsageError("invalid value for 'suite': '" + suite + "'");
  out << format_table(r);
  json doc;
  doc["config"] = cfg.params;
  doc["command"] = cfg.command;
  doc["report"] = r.to_json();
  write_json(p.text("report"), doc);
  return r.pass() ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// pde

int cmd_pde(const RunConfig& cfg, std::ostream& out) {
  const Params p{cfg.params};
  const std::string init = p.text("initial");
  std::function<double(double)> phi;
  if (init == "gaussian") phi = [](double x) { return std::exp(-x * x / 2.0); };
  else if (init == "step") phi = [](double x) { return x >= 0.0 ? 1.0 : 0.0; };
  else if (init == "one") phi = [](double) { return 1.0; };
  else throw UsageError("invalid value for 'initial': '" + init + "'");
  TransmissionProblem prob;
  prob.coeffs = p.coefficients();
  prob.initial = phi;
  prob.T = p.positive("t");
  prob.R = p.positive("R");
  prob.theta = p.real("theta");
  prob.startup_steps = static_cast<int>(p.count("startup", 0));
  const auto nt = static_cast<int>(p.count("nt"));
  const auto snaps = p.count("snapshots");
  for (long long k = 1; k <= snaps; ++k) prob.snapshot_times.push_back(prob.T * static_cast<double>(k) / snaps);
  const TransmissionSolution sol = solve_transmission(prob, static_cast<int>(p.count("nx", 2)), nt);

  const std::string path = p.text("output");
  Sink sink(path, out);
  sink.stream() << "t,x,u\n";
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    for (std::size_t i = 0; i < sol.x.size(); ++i)
      sink.stream() << csv_number(sol.times[k]) << ',' << csv_number(sol.x[i]) << ',' << csv_number(sol.u[k][i]) << '\n';
  sink.finish(path);

  if (!p.text("report").empty()) {
    double worst = 0.0;
    for (double r : sol.flux_residual) worst = std::max(worst, std::abs(r));
    json doc;
    doc["config"] = cfg.params;
    doc["command"] = cfg.command;
    doc["nodes"] = sol.x.size();
    doc["weighted_mass_final"] = sol.weighted_mass(sol.u.size() - 1);
    doc["max_flux_residual"] = worst;
    doc["u_at_0"] = sol.value_at(0.0);
    write_json(p.text("report"), doc);
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------
// rate

int cmd_rate(const RunConfig& cfg, std::ostream& out) {
  const Params p{cfg.params};
  const auto ns = p.p.at("ns").get<std::vector<int>>();
  RateOptions o;
  o.T = p.positive("t");
  o.replications = static_cast<std::size_t>(p.count("replications"));
  o.probes = static_cast<int>(p.count("probes"));
  o.workers = cfg.workers();
  const ValidationReport r =
      convergence_rate(p.alpha(), ns, static_cast<int>(p.count("reference")), RngStream(*cfg.seed(), 0), o);
  out << format_table(r);
  json doc;
  doc["config"] = cfg.params;
  doc["command"] = cfg.command;
  doc["report"] = r.to_json();
  write_json(p.text("report"), doc);
  return r.pass() ? kExitPass : kExitFail;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"simulate", "density", "validate", "pde", "rate"};
  return names;
}

const std::vector<KeySpec>& command_keys(const std::string& command) {
  const auto& t = key_table();
  const auto it = t.find(command);
  if (it == t.end()) throw UsageError("unknown command '" + command + "'");
  return it->second;
}

std::optional<std::uint64_t> RunConfig::seed() const {
  if (params.at("seed").is_null()) return std::nullopt;
  return params.at("seed").get<std::uint64_t>();
}

unsigned RunConfig::workers() const { return static_cast<unsigned>(params.at("workers").get<long long>()); }

RunConfig resolve_config(const std::string& command, const nlohmann::json& file, const nlohmann::json& flags,
                         const std::optional<std::string>& env_seed) {
  const auto& keys = command_keys(command);
  RunConfig cfg;
  cfg.command = command;
  for (const KeySpec& k : keys) cfg.params[k.name] = k.fallback;
  auto find = [&](const std::string& name) -> const KeySpec& {
    for (const KeySpec& k : keys)
      if (k.name == name) return k;
    throw UsageError("unknown key '" + name + "' for command '" + command + "'");
  };
  auto merge = [&](const nlohmann::json& doc, const char* what) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw UsageError(std::string(what) + " must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() == "command") {
        if (!it.value().is_string() || it.value().get<std::string>() != command)
          throw UsageError("config key 'command' does not match '" + command + "'");
        continue;
      }
      const KeySpec& k = find(it.key());
      check_type(k, it.value());
      if (k.kind == Kind::real && !it.value().is_null()) cfg.params[k.name] = it.value().get<double>();
      else cfg.params[k.name] = it.value();
    }
  };
  merge(file, "config file");
  if (cfg.params["seed"].is_null() && env_seed && !env_seed->empty()) {
    const KeySpec& k = find("seed");
    try {
      cfg.params["seed"] = convert_text(k, *env_seed);
    } catch (const UsageError&) {
      throw UsageError("invalid value for 'seed' in SKEWSIM_SEED: '" + *env_seed + "'");
    }
  }
  merge(flags, "flags");
  const long long w = cfg.params["workers"].get<long long>();
  if (w < 1) throw UsageError("'workers' must be >= 1, got " + std::to_string(w));
  if (is_stochastic(cfg) && cfg.params["seed"].is_null())
    throw UsageError("'seed' is required for command '" + command + "' (flag, config or SKEWSIM_SEED)");
  return cfg;
}

RunConfig parse_command_line(int argc, const char* const* argv,
                             const std::function<const char*(const char*)>& getenv) {
  CLI::App app{"skew diffusion simulation and validation", "skewsim"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_path;
  for (const std::string& c : commands()) {
    CLI::App* sub = app.add_subcommand(c, c + " command");
    sub->add_option("--config", config_path[c], "JSON config file (flags override)");
    for (const KeySpec& k : command_keys(c)) sub->add_option("--" + k.name, raw[c][k.name], k.help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();
  CLI::App* sub = app.get_subcommand(command);
  nlohmann::json file;
  if (!config_path[command].empty()) {
    std::ifstream in(config_path[command]);
    if (!in) throw UsageError("cannot read config file '" + config_path[command] + "'");
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("config file '" + config_path[command] + "': " + e.what());
    }
  }
  nlohmann::json flags = nlohmann::json::object();
  for (const KeySpec& k : command_keys(command)) {
    if (sub->count("--" + k.name) == 0) continue;
    flags[k.name] = convert_text(k, raw[command][k.name]);
  }
  const char* env = getenv("SKEWSIM_SEED");
  return resolve_config(command, file, flags, env ? std::optional<std::string>(env) : std::nullopt);
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  (void)err;
  if (config.command == "simulate") return cmd_simulate(config, out);
  if (config.command == "density") return cmd_density(config, out);
  if (config.command == "validate") return cmd_validate(config, out);
  if (config.command == "pde") return cmd_pde(config, out);
  if (config.command == "rate") return cmd_rate(config, out);
  throw UsageError("unknown command '" + config.command + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_command_line(argc, argv, [](const char* k) { return std::getenv(k); });
    return execute(cfg, out, err);
  } catch (const CLI::CallForHelp&) {
    CLI::App app{"skew diffusion simulation and validation", "skewsim"};
    for (const std::string& c : commands()) app.add_subcommand(c, c + " command");
    out << app.help();
    for (const std::string& c : commands()) {
      out << "\n" << c << ":\n";
      for (const KeySpec& k : command_keys(c)) out << "  --" << k.name << "  " << k.help << '\n';
    }
    return kExitPass;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace skewsim::cli
