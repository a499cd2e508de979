#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "benjctl/app/runner.hpp"
#include "benjctl/app/scenario.hpp"
#include "benjctl/errors.hpp"

namespace {

struct Flags {
  std::string scenario;
  std::optional<std::string> alpha, mu, n, T, lambda, law, seed, out, s, workers;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("scenario", f.scenario, "scenario file");
  cmd->add_option("--alpha", f.alpha, "system.alpha (decimal or fraction)");
  cmd->add_option("--mu", f.mu, "system.mu");
  cmd->add_option("--n", f.n, "discretization.n");
  cmd->add_option("--seed", f.seed, "experiment.seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.sets, "override any key: section.key=value")->allow_extra_args(false);
}

// --T, --lambda and --law land in the section of the running experiment.
void apply(benjctl::app::Scenario& sc, const std::string& kind, const Flags& f) {
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) sc.set(key, *v);
  };
  put("system.alpha", f.alpha);
  put("system.mu", f.mu);
  put("discretization.n", f.n);
  put("experiment.seed", f.seed);
  put("experiment.out", f.out);
  put("control.s", f.s);
  put("sweep.workers", f.workers);
  if (f.T) {
    if (kind == "observability") sc.set("observability.T", *f.T);
    else if (kind == "stabilize") sc.set("stabilize.T", *f.T);
    else if (kind == "simulate") sc.set("simulate.t_end", *f.T);
    else sc.set("control.T", *f.T);
  }
  const std::string section = kind == "simulate" ? "simulate." : "stabilize.";
  if (f.lambda) sc.set(section + "lambda", *f.lambda);
  if (f.law) sc.set(section + "law", *f.law);
  for (const auto& a : f.sets) sc.set_assignment(a);
  sc.set("experiment.kind", kind);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace benjctl::app;
  CLI::App app{"Moment-method control and feedback stabilization of the linearized Benjamin equation"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);

  Flags f;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, clusters and gap");
  auto* simulate = app.add_subcommand("simulate", "free or closed-loop evolution");
  auto* control = app.add_subcommand("control", "steer an initial state to a target at time T");
  auto* stabilize = app.add_subcommand("stabilize", "closed-loop decay under a feedback law");
  auto* observability = app.add_subcommand("observability", "observability constant for a list of horizons");
  auto* sweep = app.add_subcommand("sweep", "run a grid of scenarios across workers");
  for (auto* cmd : {spectrum, simulate, control, stabilize, observability, sweep}) add_common(cmd, f);
  for (auto* cmd : {simulate, control, stabilize, observability, sweep}) {
    cmd->add_option("--T", f.T, "horizon (a comma-separated list for observability)");
  }
  for (auto* cmd : {simulate, stabilize, sweep}) {
    cmd->add_option("--lambda", f.lambda, "prescribed decay rate of the gramian law");
    cmd->add_option("--law", f.law, "none, simple or gramian");
  }
  for (auto* cmd : {control, sweep}) cmd->add_option("--s", f.s, "Sobolev index");
  sweep->add_option("--workers", f.workers, "concurrent scenarios");

  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  Scenario sc;
  try {
    if (!f.scenario.empty()) sc = Scenario::load(f.scenario);
    apply(sc, kind, f);
  } catch (const benjctl::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  }

  std::string diagnostic;
  const int code = execute(kind, sc, &diagnostic);
  if (code != kSuccess) {
    std::cerr << (code == kValidationFailure ? "invalid scenario: " : "error: ") << diagnostic << "\n";
  } else {
    std::cout << sc.get_string("experiment.out", "out") << "/report.json\n";
  }
  return code;
}
