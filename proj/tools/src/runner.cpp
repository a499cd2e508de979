#include "benjctl/app/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "benjctl/errors.hpp"
#include "benjctl/hum.hpp"
#include "benjctl/io.hpp"
#include "benjctl/moment_control.hpp"
#include "benjctl/operators.hpp"
#include "benjctl/random_state.hpp"
#include "benjctl/spectral.hpp"
#include "benjctl/spectrum.hpp"
#include "benjctl/stabilization.hpp"

#ifndef BENJCTL_VERSION
#define BENJCTL_VERSION "0.0.0"
#endif

namespace benjctl::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown after a report describing the failure has already been written.
struct ReportedFailure : std::runtime_error {
  ReportedFailure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
  int code;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError(key + ": " + what);
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[i] = a + (b - a) * i / (count - 1);
  t.back() = b;
  return t;
}

// Everything an experiment needs besides its own section.
struct Context {
  const Scenario& sc;
  fs::path out;
  std::uint64_t seed = 0;
  SystemParams system;
  bool mu_from_mean = false;
  double shift = 0.0;  // mean removed from the states when mu_from_mean is set
  int n = 16;
  int n_sim = 0;
  double s = 0.0;
  int nx = 64;
  std::optional<TorusFunction> u0;
};

json parse_coefficients(const std::string& text, const std::string& key) {
  try {
    json j = json::parse(text);
    if (j.is_object() && j.contains("coefficients")) j = j.at("coefficients");
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(key + ": malformed JSON (" + e.what() + ")");
  }
}

json read_coefficients_file(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  require(static_cast<bool>(in), key, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_coefficients(buf.str(), key);
}

TorusFunction explicit_state(const json& j, int n, const std::string& key) {
  TorusFunction f;
  try {
    f = torus_function_from_json(j, true);
  } catch (const ValidationError& e) {
    throw ValidationError(key + ": " + e.what());
  }
  require(f.order() <= n, key, "coefficients beyond the truncation order n=" + std::to_string(n));
  return f.resized(n);
}

// initial.* or target.*; kinds zero, random, cosine, sine, coefficients, file.
TorusFunction load_state(const Context& ctx, const std::string& which, std::uint64_t seed_default,
                         double mean_default) {
  const Scenario& sc = ctx.sc;
  const std::string kind = sc.get_string(which + ".kind", "random");
  const int n = ctx.n;
  TorusFunction f;
  double mean_value = sc.get_double(which + ".mean", mean_default);
  if (kind == "zero") {
    f = TorusFunction::constant(0.0, n);
  } else if (kind == "random") {
    const double s = sc.get_double(which + ".s", ctx.s);
    const double norm = sc.get_double(which + ".norm", 1.0);
    require(s >= 0.0, which + ".s", "must be >= 0");
    require(norm >= 0.0, which + ".norm", "must be >= 0");
    f = random_state(sc.get_seed(which + ".seed", seed_default), n, s, norm);
  } else if (kind == "cosine" || kind == "sine") {
    const int mode = sc.get_int(which + ".mode", 1);
    const double amp = sc.get_double(which + ".amplitude", 1.0);
    require(mode >= 1 && mode <= n, which + ".mode", "must lie in [1, n]");
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * n + 1);
    const Complex half = kind == "cosine" ? Complex(0.5 * amp, 0.0) : Complex(0.0, -0.5 * amp);
    c[n + mode] = half;
    c[n - mode] = std::conj(half);
    f = TorusFunction::from_coefficients(c, true);
  } else if (kind == "coefficients") {
    auto text = sc.raw(which + ".coefficients");
    require(text.has_value(), which + ".coefficients", "required when kind = coefficients");
    f = explicit_state(parse_coefficients(*text, which + ".coefficients"), n, which + ".coefficients");
    mean_value = sc.get_double(which + ".mean", 0.0);
  } else if (kind == "file") {
    auto path = sc.raw(which + ".file");
    require(path.has_value(), which + ".file", "required when kind = file");
    f = explicit_state(read_coefficients_file(*path, which + ".file"), n, which + ".file");
    mean_value = sc.get_double(which + ".mean", 0.0);
  } else {
    throw ValidationError(which + ".kind: unknown state kind '" + kind +
                          "' (expected zero, random, cosine, sine, coefficients, file" +
                          (which == "target" ? ", free_flow)" : ")"));
  }
  return f + TorusFunction::constant(mean_value, n);
}

Context load_context(const Scenario& sc) {
  Context ctx{sc};
  ctx.out = sc.get_string("experiment.out", "out");
  ctx.seed = sc.get_seed("experiment.seed", 0);
  ctx.n = sc.get_int("discretization.n", 16);
  require(ctx.n >= 1, "discretization.n", "must be >= 1");
  ctx.n_sim = sc.get_int("discretization.n_sim", 0);
  require(ctx.n_sim == 0 || ctx.n_sim > ctx.n, "discretization.n_sim", "must be 0 (off) or > n");
  ctx.s = sc.get_double("control.s", 0.0);
  require(ctx.s >= 0.0, "control.s", "must be >= 0");
  ctx.nx = sc.get_int("output.samples_x", std::max(64, 4 * ctx.n));
  require(ctx.nx >= 2 * ctx.n + 1, "output.samples_x", "must be >= 2n+1 to resolve every mode");

  const Rational alpha = sc.get_rational("system.alpha", Rational::make(1, 1));
  require(alpha.value() > 0.0, "system.alpha", "must be > 0");
  ctx.mu_from_mean = sc.get_bool("system.mu_from_mean", false);
  if (ctx.mu_from_mean) {
    require(!sc.has("system.mu"), "system.mu", "cannot be combined with system.mu_from_mean");
    TorusFunction u0 = load_state(ctx, "initial", splitmix64(ctx.seed), 0.0);
    ctx.shift = mean(u0).real();
    ctx.system.alpha = alpha.value();
    ctx.system.alpha_exact = alpha;
    ctx.system.mu = ctx.shift;
    ctx.u0 = u0 - TorusFunction::constant(ctx.shift, ctx.n);
  } else {
    ctx.system = SystemParams::from_rationals(alpha, sc.get_rational("system.mu", Rational::make(0, 1)));
  }
  try {
    ctx.system.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("system: ") + e.what());
  }
  return ctx;
}

TorusFunction initial_state(const Context& ctx) {
  if (ctx.u0) return *ctx.u0;
  return load_state(ctx, "initial", splitmix64(ctx.seed), 0.0);
}

BumpProfile load_bump(const Scenario& sc, int order) {
  const std::string name = sc.get_string("bump.kind", "raised_cosine");
  const auto kind = parse_bump_kind(name);
  require(kind.has_value(), "bump.kind",
          "unknown bump '" + name + "' (expected uniform, raised_cosine, smooth_exp_bump, explicit)");
  const double center = sc.get_double("bump.center", std::numbers::pi);
  const double width = sc.get_double("bump.width", std::numbers::pi / 2);
  try {
    switch (*kind) {
      case BumpKind::uniform: return BumpProfile::uniform(order);
      case BumpKind::raised_cosine: return BumpProfile::raised_cosine(order, center, width);
      case BumpKind::smooth_exp_bump: return BumpProfile::smooth_exp_bump(order, center, width);
      case BumpKind::explicit_coefficients: break;
    }
    json j;
    if (auto text = sc.raw("bump.coefficients")) {
      j = parse_coefficients(*text, "bump.coefficients");
    } else if (auto path = sc.raw("bump.coefficients_file")) {
      j = read_coefficients_file(*path, "bump.coefficients_file");
    } else {
      throw ValidationError("bump.coefficients: required when bump.kind = explicit");
    }
    return BumpProfile::from_coefficients(coefficients_from_json(j, order));
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("bump.", 0) == 0) throw;
    throw ValidationError("bump: " + msg);
  }
}

FeedbackLaw make_law(LawKind kind, double lambda, double T, const Spectrum& spec, const MMatrix& m) {
  switch (kind) {
    case LawKind::none: return FeedbackLaw::none(spec, m);
    case LawKind::simple: return FeedbackLaw::simple(spec, m);
    case LawKind::gramian: return FeedbackLaw::gramian(build_L_lambda(m, spec, lambda, T), spec, m);
  }
  throw ValidationError("unknown feedback law");
}

LawKind load_law(const Scenario& sc, const std::string& key, const std::string& fallback) {
  const std::string name = sc.get_string(key, fallback);
  auto kind = parse_law_kind(name);
  require(kind.has_value(), key, "unknown law '" + name + "' (expected none, simple, gramian)");
  return *kind;
}

double max_mean_drift(const std::vector<TorusFunction>& states, Complex m0) {
  double d = 0.0;
  for (const auto& u : states) d = std::max(d, std::abs(mean(u) - m0));
  return d;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] * (1.0 + 1e-12) + 1e-15) return false;
  }
  return true;
}

std::vector<double> fluctuation_norms(const std::vector<TorusFunction>& states, double s) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& u : states) out.push_back(sobolev_norm(project_mean_zero(u), s));
  return out;
}

void write_trajectory(const fs::path& path, const std::vector<double>& times,
                      const std::vector<TorusFunction>& states, double s, double shift) {
  const auto l2 = fluctuation_norms(states, 0.0);
  const auto hs = fluctuation_norms(states, s);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    rows.push_back({times[i], l2[i], hs[i], mean(states[i]).real() + shift});
  }
  write_csv(path, {"t", "L2_norm", "Hs_norm", "mean"}, rows);
}

void write_samples(const fs::path& path, const std::string& column, const std::vector<double>& times,
                   const std::vector<TorusFunction>& fields, int nx, double shift) {
  std::vector<std::vector<double>> rows;
  rows.reserve(times.size() * static_cast<std::size_t>(nx));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::VectorXcd v = synthesize(fields[i], static_cast<std::size_t>(nx));
    for (int j = 0; j < nx; ++j) rows.push_back({times[i], grid_node(j, nx), v[j].real() + shift});
  }
  write_csv(path, {"t", "x", column}, rows);
}

json warnings_json(const std::vector<std::string>& a, const std::vector<std::string>& b = {}) {
  json w = json::array();
  for (const auto& s : a) w.push_back(s);
  for (const auto& s : b) w.push_back(s);
  return w;
}

json base_report(const std::string& kind, const Scenario& sc) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["experiment"] = kind;
  r["provenance"] = {{"toolkit", "benjctl"},
                     {"version", toolkit_version()},
                     {"scenario_hash", sc.hash()},
                     {"seed", sc.get_string("experiment.seed", "0")}};
  r["scenario"] = sc.entries();
  return r;
}

// --- experiments -----------------------------------------------------------

json run_spectrum(Context& ctx) {
  const Spectrum spec = Spectrum::build(ctx.system, ctx.n);
  json clusters = json::array();
  std::size_t largest = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& c : spec.clusters()) {
    largest = std::max(largest, c.size());
    if (c.size() > 1) clusters.push_back(c);
  }
  for (int k = -ctx.n; k <= ctx.n; ++k) {
    rows.push_back({static_cast<double>(k), spec.lambda(k),
                    static_cast<double>(spec.clusters()[static_cast<std::size_t>(spec.cluster_of(k))].size())});
  }
  write_csv(ctx.out / "spectrum.csv", {"k", "lambda", "cluster_size"}, rows);
  return {{"alpha", spec.alpha()},
          {"mu", spec.mu()},
          {"n", ctx.n},
          {"lambdas", spec.lambdas()},
          {"clusters", clusters},
          {"largest_cluster", largest},
          {"distinct_eigenvalues", spec.distinct().size()},
          {"gamma", spec.gap_gamma()},
          {"gamma_window", spec.gap_gamma_window()},
          {"window_bound", spec.window_bound()},
          {"window_verified", spec.window_verified()},
          {"exact_clustering", spec.exact_clustering()},
          {"warnings", warnings_json(spec.warnings())}};
}

json run_simulate(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const LawKind kind = load_law(sc, "simulate.law", "none");
  const double lambda = sc.get_double("simulate.lambda", 1.0);
  const double T = sc.get_double("simulate.T", 1.0);
  const double t_end = sc.get_double("simulate.t_end", 1.0);
  const int samples = sc.get_int("simulate.samples", 101);
  const double s = sc.get_double("simulate.s", 1.0);
  require(lambda > 0.0, "simulate.lambda", "must be > 0");
  require(T > 0.0, "simulate.T", "must be > 0");
  require(t_end > 0.0, "simulate.t_end", "must be > 0");
  require(samples >= 2, "simulate.samples", "must be >= 2");
  require(s >= 0.0, "simulate.s", "must be >= 0");

  const TorusFunction u0 = initial_state(ctx);
  const Spectrum spec = Spectrum::build(ctx.system, ctx.n);
  const auto times = linspace(0.0, t_end, samples);
  json result = {{"law", to_string(kind)}, {"t_end", t_end}, {"samples", samples}, {"s", s},
                 {"mean_shift", ctx.shift}};
  std::vector<TorusFunction> states;
  std::vector<std::string> law_warnings;
  if (kind == LawKind::none) {
    const double n0 = sobolev_norm(u0, s);
    double defect = 0.0;
    for (double t : times) {
      states.push_back(evolve_free(u0, t, spec));
      defect = std::max(defect, std::abs(sobolev_norm(states.back(), s) - n0));
    }
    result["isometry_defect"] = n0 > 0.0 ? defect / n0 : defect;
  } else {
    const MMatrix m = MMatrix::build(load_bump(sc, 2 * ctx.n), ctx.n);
    const FeedbackLaw law = make_law(kind, lambda, T, spec, m);
    states = simulate_closed_loop(u0, law, times).states;
    result["spectral_abscissa"] = law.spectral_abscissa();
    if (kind == LawKind::gramian) {
      result["lambda"] = lambda;
      result["T"] = T;
    }
    law_warnings = law.warnings();
  }
  const auto l2 = fluctuation_norms(states, 0.0);
  result["initial_norm_L2"] = l2.front();
  result["final_norm_L2"] = l2.back();
  result["monotone_L2"] = nonincreasing(l2);
  result["max_mean_drift"] = max_mean_drift(states, mean(u0));
  result["warnings"] = warnings_json(spec.warnings(), law_warnings);
  write_trajectory(ctx.out / "trajectory.csv", times, states, s, ctx.shift);
  write_samples(ctx.out / "samples.csv", "u", times, states, ctx.nx, ctx.shift);
  return result;
}

json run_control(Context& ctx, json& report) {
  const Scenario& sc = ctx.sc;
  const double T = sc.get_double("control.T", 1.0);
  const int samples = sc.get_int("control.samples_t", 21);
  require(T > 0.0 && std::isfinite(T), "control.T", "must be > 0");
  require(samples >= 2, "control.samples_t", "must be >= 2");
  const int order = 2 * std::max(ctx.n, ctx.n_sim);

  ControlProblem p;
  p.system = ctx.system;
  p.T = T;
  p.s = ctx.s;
  p.n = ctx.n;
  p.g = load_bump(sc, order);
  p.u0 = initial_state(ctx);
  const Spectrum spec = Spectrum::build(ctx.system, ctx.n);
  if (sc.get_string("target.kind", "random") == "free_flow") {
    p.u1 = evolve_free(p.u0, T, spec);
  } else {
    const double m0 = mean(p.u0).real() + ctx.shift;
    p.u1 = load_state(ctx, "target", splitmix64(splitmix64(ctx.seed)), m0) -
           TorusFunction::constant(ctx.shift, ctx.n);
  }

  const ControlSolution sol = synthesize_control(p);
  const BiorthogonalFamily& fam = *sol.family;
  const MomentReport mr = verify_moments(sol.signal, sol.targets, sol.spectrum, sol.m,
                                         sc.get_bool("control.quadrature", true));
  const double cond = fam.condition_number();
  const double tol = cond > 1e4 ? std::min(1e-12 * cond, 1e-6) : 1e-8;
  const double u_norms = sobolev_norm(p.u0, ctx.s) + sobolev_norm(p.u1, ctx.s);
  const double h_norm = sol.signal.norm(ctx.s);

  json result = {{"T", T},
                 {"n", ctx.n},
                 {"s", ctx.s},
                 {"mean_shift", ctx.shift},
                 {"terminal_residual", sol.terminal_residual},
                 {"terminal_tolerance", tol},
                 {"terminal_within_tolerance", sol.terminal_residual <= tol},
                 {"moment_residual", mr.residual},
                 {"moment_residual_quadrature", mr.quadrature_residual},
                 {"closed_vs_quadrature", mr.closed_vs_quadrature},
                 {"quadrature_nodes", mr.quadrature_nodes},
                 {"cond_gamma", cond},
                 {"biorthogonality_residual", fam.biorthogonality_residual()},
                 {"family_size", fam.size()},
                 {"control_norm", h_norm},
                 {"control_norm_L2", sol.signal.norm(0.0)},
                 {"nu_empirical", u_norms > 0.0 ? h_norm / u_norms : 0.0},
                 {"hermitian_defect", sol.hermitian_defect},
                 {"symmetrized_moment_change", sol.symmetrized_moment_change},
                 {"beta", sol.m.beta()},
                 {"delta", sol.m.delta()},
                 {"bump_tail_l1", p.g.tail_l1()}};
  if (ctx.n_sim > 0) {
    result["n_sim"] = ctx.n_sim;
    result["spillover"] = spillover_norm(sol.signal, p.g, ctx.system, ctx.n_sim, ctx.s);
  }

  json hum_json;
  json hum_multiplier = json::array();
  try {
    const HumControl hum = HumControl::build(p, sol.spectrum, sol.m);
    const TorusFunction reached = TorusFunction::from_psi_coefficients(hum.terminal(), false);
    hum_json = {{"status", "ok"},
                {"control_norm_L2", hum.norm()},
                {"terminal_residual", relative_distance(reached, p.u1.resized(ctx.n), ctx.s)},
                {"gramian_condition", hum.gramian_condition()},
                {"not_above_moment_norm", hum.norm() <= sol.signal.norm(0.0) + 1e-8}};
    hum_multiplier = coefficients_to_json(hum.multiplier());
  } catch (const NumericalError& e) {
    hum_json = {{"status", "failed"}, {"diagnostic", e.what()}};
  }
  result["hum"] = hum_json;

  const auto times = linspace(0.0, T, samples);
  std::vector<TorusFunction> states;
  std::vector<TorusFunction> controls;
  for (double t : times) {
    states.push_back(evolve_controlled(p.u0, sol.signal, t, sol.spectrum, sol.m));
    controls.push_back(sol.signal.at(t));
  }
  result["max_mean_drift"] = max_mean_drift(states, mean(p.u0));
  result["warnings"] = warnings_json(spec.warnings());

  write_trajectory(ctx.out / "trajectory.csv", times, states, ctx.s, ctx.shift);
  write_samples(ctx.out / "control_samples.csv", "h", times, controls, ctx.nx, 0.0);
  json dual = json::array();
  for (int j = -ctx.n; j <= ctx.n; ++j) dual.push_back({j, sol.signal.dual_index(j)});
  const TorusFunction shift = TorusFunction::constant(ctx.shift, ctx.n);
  write_json(ctx.out / "coefficients.json",
             {{"schema_version", kSchemaVersion},
              {"n", ctx.n},
              {"T", T},
              {"control", coefficients_to_json(sol.signal.coefficients())},
              {"dual_index", dual},
              {"dual_eigenvalues", fam.eigenvalues()},
              {"moment_targets", coefficients_to_json(sol.targets)},
              {"initial", to_json(p.u0 + shift)},
              {"target", to_json(p.u1 + shift)},
              {"terminal", to_json(sol.terminal + shift)},
              {"hum_multiplier", hum_multiplier}});

  if (sol.terminal_residual > tol) {
    std::ostringstream os;
    os << "terminal residual " << sol.terminal_residual << " exceeds tolerance " << tol << " (cond "
       << cond << ")";
    report["status"] = "failed";
    report["diagnostic"] = os.str();
    report["result"] = result;
    write_json(ctx.out / "report.json", report);
    throw ReportedFailure(kNumericalFailure, os.str());
  }
  return result;
}

json run_stabilize(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const LawKind kind = load_law(sc, "stabilize.law", "gramian");
  require(kind != LawKind::none, "stabilize.law", "must be simple or gramian");
  const double lambda = sc.get_double("stabilize.lambda", 1.0);
  const double T = sc.get_double("stabilize.T", 1.0);
  const int samples = sc.get_int("stabilize.samples", 121);
  const double s = sc.get_double("stabilize.s", 1.0);
  const int energy_samples = sc.get_int("stabilize.energy_samples", 20);
  require(lambda > 0.0, "stabilize.lambda", "must be > 0");
  require(T > 0.0, "stabilize.T", "must be > 0");
  require(samples >= 12, "stabilize.samples", "must be >= 12");
  require(s >= 0.0, "stabilize.s", "must be >= 0");
  require(energy_samples >= 1, "stabilize.energy_samples", "must be >= 1");

  const TorusFunction u0 = initial_state(ctx);
  const Spectrum spec = Spectrum::build(ctx.system, ctx.n);
  const MMatrix m = MMatrix::build(load_bump(sc, 2 * ctx.n), ctx.n);
  const FeedbackLaw law = make_law(kind, lambda, T, spec, m);
  const double abscissa = law.spectral_abscissa();
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "closed loop is not exponentially stable (spectral abscissa " << abscissa << ")";
    throw NumericalError(os.str());
  }
  double t_end = sc.get_double("stabilize.t_end", 0.0);
  require(t_end >= 0.0, "stabilize.t_end", "must be >= 0 (0 picks 30/|abscissa|)");
  if (t_end == 0.0) t_end = 30.0 / -abscissa;

  const auto times = linspace(0.0, t_end, samples);
  const Trajectory tr = simulate_closed_loop(u0, law, times);
  const auto l2 = tr.fluctuation_norms(0.0);
  const DecayFit fit = estimate_decay_rate(times, l2);

  bool abscissa_ok = false;
  bool trajectory_ok = false;
  if (kind == LawKind::gramian) {
    abscissa_ok = abscissa <= -lambda * (1.0 - 1e-6);
    trajectory_ok = fit.rate >= 0.99 * lambda;
  } else {
    abscissa_ok = true;
    trajectory_ok = fit.rate > 0.0 && std::abs(fit.rate + abscissa) <= 0.05 * -abscissa;
  }

  json result = {{"law", to_string(kind)},
                 {"t_end", t_end},
                 {"samples", samples},
                 {"s", s},
                 {"mean_shift", ctx.shift},
                 {"fitted_rate", fit.rate},
                 {"M", fit.M},
                 {"r_squared", fit.r_squared},
                 {"log_linear", fit.log_linear},
                 {"fit_window", {fit.first, fit.last}},
                 {"spectral_abscissa", abscissa},
                 {"abscissa_check", abscissa_ok},
                 {"trajectory_check", trajectory_ok},
                 {"discrepancy", abscissa_ok != trajectory_ok},
                 {"monotone_L2", nonincreasing(l2)},
                 {"max_mean_drift", max_mean_drift(tr.states, mean(u0))}};
  if (kind == LawKind::gramian) {
    result["lambda"] = lambda;
    result["T"] = T;
  }
  std::vector<std::string> warnings = law.warnings();
  if (!fit.log_linear) {
    std::ostringstream os;
    os << "no window reached R^2 >= 0.999; rate fitted over the whole usable history (R^2 " << fit.r_squared << ")";
    warnings.push_back(os.str());
  }
  try {
    result["delta"] = observability_constant(m, spec, T).delta;
  } catch (const NumericalError& e) {
    result["delta"] = nullptr;
    warnings.push_back(std::string("observability: ") + e.what());
  }
  if (kind == LawKind::simple) {
    const double e0 = l2.front() * l2.front();
    double worst = 0.0;
    const std::size_t last = tr.states.size() - 1;
    for (int i = 0; i < energy_samples; ++i) {
      const std::size_t idx = energy_samples == 1 ? 0 : last * i / (energy_samples - 1);
      worst = std::max(worst, energy_identity_defect(law, tr.states[idx]));
    }
    result["energy_identity_defect"] = e0 > 0.0 ? worst / e0 : worst;
  }
  result["warnings"] = warnings_json(spec.warnings(), warnings);
  write_csv(ctx.out / "decay.csv", {"t", "L2_norm", "Hs_norm"}, [&] {
    const auto hs = tr.fluctuation_norms(s);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < times.size(); ++i) rows.push_back({times[i], l2[i], hs[i]});
    return rows;
  }());
  return result;
}

json run_observability(Context& ctx) {
  const auto Ts = ctx.sc.get_list("observability.T", {0.01, 0.1, 1.0});
  for (double T : Ts) require(T > 0.0, "observability.T", "every horizon must be > 0");
  const Spectrum spec = Spectrum::build(ctx.system, ctx.n);
  const MMatrix m = MMatrix::build(load_bump(ctx.sc, 2 * ctx.n), ctx.n);
  json pairs = json::array();
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<double, double>> sorted;
  for (double T : Ts) {
    const Observability ob = observability_constant(m, spec, T);
    pairs.push_back({{"T", T},
                     {"delta", ob.delta},
                     {"min_eigenvalue", ob.min_eigenvalue},
                     {"tolerance", ob.tolerance},
                     {"minimizer", to_json(TorusFunction::from_psi_coefficients(ob.minimizer, false))}});
    rows.push_back({T, ob.delta});
    sorted.emplace_back(T, ob.delta);
  }
  std::sort(sorted.begin(), sorted.end());
  bool monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) monotone = monotone && sorted[i].second >= sorted[i - 1].second;
  write_csv(ctx.out / "observability.csv", {"T", "delta"}, rows);
  return {{"n", ctx.n}, {"pairs", pairs}, {"nondecreasing", monotone}, {"warnings", warnings_json(spec.warnings())}};
}

// --- sweep -----------------------------------------------------------------

struct SweepPoint {
  Scenario scenario;
  std::vector<std::pair<std::string, std::string>> values;
  std::uint64_t seed = 0;
  int exit_code = 0;
  std::string diagnostic;
};

json run_sweep(Context& ctx, json& report) {
  const Scenario& sc = ctx.sc;
  const std::string kind = sc.get_string("sweep.experiment", "");
  require(is_experiment(kind) && kind != "sweep", "sweep.experiment",
          "must name the experiment each point runs (spectrum, simulate, control, stabilize, observability)");
  const int workers = sc.get_int("sweep.workers", 1);
  require(workers >= 1, "sweep.workers", "must be >= 1");

  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  Scenario base = sc;
  for (const auto& [key, value] : sc.entries()) {
    if (key.rfind("sweep.", 0) != 0) continue;
    base.erase(key);
    if (key == "sweep.workers" || key == "sweep.experiment") continue;
    auto items = split_list(value);
    require(!items.empty(), key, "empty list");
    axes.emplace_back(key.substr(6), std::move(items));
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.second.size();

  const bool seed_swept =
      std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.first == "experiment.seed"; });
  std::vector<SweepPoint> points(total);
  for (std::size_t i = 0; i < total; ++i) {
    SweepPoint& pt = points[i];
    pt.scenario = base;
    std::size_t rest = i;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      const auto& v = it->second[rest % it->second.size()];
      rest /= it->second.size();
      pt.scenario.set(it->first, v);
      pt.values.emplace(pt.values.begin(), it->first, v);
    }
    if (!seed_swept) pt.scenario.set("experiment.seed", std::to_string(splitmix64(ctx.seed + i)));
    pt.seed = pt.scenario.get_seed("experiment.seed", 0);
    std::ostringstream dir;
    dir << "point_" << std::setw(4) << std::setfill('0') << i;
    pt.scenario.set("experiment.out", (ctx.out / dir.str()).string());
    pt.scenario.set("experiment.kind", kind);
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      points[i].exit_code = execute(kind, points[i].scenario, &points[i].diagnostic);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(workers, static_cast<int>(total)); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  json rows = json::array();
  int worst = 0;
  int failures = 0;
  std::ofstream csv(ctx.out / "sweep.csv");
  csv << "index,seed,exit_code";
  for (const auto& a : axes) csv << "," << a.first;
  csv << "\n";
  for (std::size_t i = 0; i < total; ++i) {
    const SweepPoint& pt = points[i];
    worst = std::max(worst, pt.exit_code);
    failures += pt.exit_code != 0;
    json summary = json::object();
    std::ifstream in(fs::path(pt.scenario.get_string("experiment.out", "")) / "report.json");
    if (in) {
      const json r = json::parse(in, nullptr, false);
      if (r.is_object() && r.contains("result")) {
        for (const auto& [k, v] : r["result"].items()) {
          if (v.is_primitive()) summary[k] = v;
        }
      }
    }
    json values = json::object();
    for (const auto& [k, v] : pt.values) values[k] = v;
    json row = {{"index", i},
                {"seed", std::to_string(pt.seed)},
                {"exit_code", pt.exit_code},
                {"values", values},
                {"summary", summary}};
    if (!pt.diagnostic.empty()) row["diagnostic"] = pt.diagnostic;
    rows.push_back(row);
    csv << i << "," << pt.seed << "," << pt.exit_code;
    for (const auto& [k, v] : pt.values) csv << ",\"" << v << "\"";
    csv << "\n";
  }
  json result = {{"experiment", kind}, {"points", rows}, {"failures", failures}};
  if (failures > 0) {
    const std::string what = std::to_string(failures) + " of " + std::to_string(total) + " sweep points failed";
    report["status"] = "failed";
    report["diagnostic"] = what;
    report["result"] = result;
    write_json(ctx.out / "report.json", report);
    throw ReportedFailure(worst, what);
  }
  return result;
}

}  // namespace

std::string toolkit_version() { return BENJCTL_VERSION; }

bool is_experiment(const std::string& kind) {
  return kind == "spectrum" || kind == "simulate" || kind == "control" || kind == "stabilize" ||
         kind == "observability" || kind == "sweep";
}

json run_experiment(const std::string& kind, const Scenario& scenario) {
  require(is_experiment(kind), "experiment.kind",
          "unknown experiment '" + kind + "' (expected spectrum, simulate, control, stabilize, observability, sweep)");
  Context ctx = load_context(scenario);
  fs::create_directories(ctx.out);
  json report = base_report(kind, scenario);
  json result;
  if (kind == "spectrum") result = run_spectrum(ctx);
  else if (kind == "simulate") result = run_simulate(ctx);
  else if (kind == "control") result = run_control(ctx, report);
  else if (kind == "stabilize") result = run_stabilize(ctx);
  else if (kind == "observability") result = run_observability(ctx);
  else result = run_sweep(ctx, report);
  report["status"] = "ok";
  report["result"] = result;
  write_json(ctx.out / "report.json", report);
  return report;
}

int execute(const std::string& kind, const Scenario& scenario, std::string* diagnostic) {
  auto fail = [&](int code, const std::string& category, const std::string& what) {
    if (diagnostic) *diagnostic = what;
    try {
      json report = base_report(kind, scenario);
      report["status"] = "failed";
      report["error"] = category;
      report["diagnostic"] = what;
      const fs::path out = scenario.get_string("experiment.out", "out");
      fs::create_directories(out);
      write_json(out / "report.json", report);
    } catch (const std::exception&) {
      // the diagnostic still reaches the caller
    }
    return code;
  };
  try {
    run_experiment(kind, scenario);
    return kSuccess;
  } catch (const ReportedFailure& e) {
    if (diagnostic) *diagnostic = e.what();
    return e.code;
  } catch (const ValidationError& e) {
    return fail(kValidationFailure, "validation", e.what());
  } catch (const NumericalError& e) {
    return fail(kNumericalFailure, "numerical", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(kValidationFailure, "validation", e.what());
  } catch (const std::exception& e) {
    return fail(1, "io", e.what());
  }
}

}  // namespace benjctl::app
