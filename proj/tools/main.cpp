#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "slngbm/version.hpp"

using slngbm::cli::ExperimentSpec;
using slngbm::cli::Report;

namespace {

// Shared flags; values override whatever the spec file carries.
void add_common_options(CLI::App* cmd, ExperimentSpec& spec, std::string& spec_file) {
  cmd->add_option("--spec", spec_file, "JSON experiment spec; flags override its fields");
  cmd->add_option("--n", spec.n, "matrix dimension (>= 2)");
  cmd->add_option("--tau", spec.tau, "time horizon");
  cmd->add_option("--dt", spec.dt, "step size (0 = default for the horizon)");
  cmd->add_option("--paths", spec.n_paths, "Monte Carlo paths");
  cmd->add_option("--seed", spec.seed, "master seed");
  cmd->add_option("--scheme", spec.scheme, "euler | exponential")
      ->check(CLI::IsMember({"euler", "exponential"}));
  cmd->add_option("--p", spec.p, "highest trace power (1..8)");
  cmd->add_option("--out", spec.out_dir, "output directory");
  cmd->add_option("--format", spec.format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--workers", spec.workers, "worker threads (0 = SLN_GBM_THREADS or hardware)");
}

ExperimentSpec merge(CLI::App* cmd, const ExperimentSpec& flags, const std::string& spec_file,
                     const std::string& command) {
  ExperimentSpec spec = flags;
  if (!spec_file.empty()) {
    spec = ExperimentSpec::from_json_file(spec_file);
    auto given = [&](const char* name) {
      const CLI::Option* opt = cmd->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--n")) spec.n = flags.n;
    if (given("--tau")) spec.tau = flags.tau;
    if (given("--dt")) spec.dt = flags.dt;
    if (given("--paths")) spec.n_paths = flags.n_paths;
    if (given("--seed")) spec.seed = flags.seed;
    if (given("--scheme")) spec.scheme = flags.scheme;
    if (given("--p")) spec.p = flags.p;
    if (given("--out")) spec.out_dir = flags.out_dir;
    if (given("--format")) spec.format = flags.format;
    if (given("--workers")) spec.workers = flags.workers;
    if (given("--tau-grid")) spec.tau_grid = flags.tau_grid;
    if (given("--samples")) spec.qv_samples = flags.qv_samples;
    if (given("--in")) spec.input = flags.input;
  }
  spec.command = command;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampler, integrator and exact-moment engine for isotropic "
               "multiplicative matrix Brownian motion on SL(n)"};
  app.set_version_flag("--version", slngbm::kVersion);
  app.require_subcommand(1);

  ExperimentSpec flags;
  std::string spec_file;

  CLI::App* simulate = app.add_subcommand("simulate", "run trajectories and estimate trace moments");
  add_common_options(simulate, flags, spec_file);

  CLI::App* moments = app.add_subcommand("moments", "exact trace-moment tables and growth bounds");
  add_common_options(moments, flags, spec_file);

  CLI::App* qvcheck = app.add_subcommand("qvcheck", "validate the sampled noise law");
  add_common_options(qvcheck, flags, spec_file);
  qvcheck->add_option("--samples", flags.qv_samples, "number of increments");

  CLI::App* nontight = app.add_subcommand("nontight", "truncated second-moment functional");
  add_common_options(nontight, flags, spec_file);
  nontight->add_option("--tau-grid", flags.tau_grid, "tau* horizons (default 10 20 40)");

  CLI::App* pde = app.add_subcommand("pde", "backward observable solver and integral bounds");
  add_common_options(pde, flags, spec_file);
  pde->add_option("--tau-grid", flags.tau_grid, "tau* horizons (default 10 20 40)");

  CLI::App* report = app.add_subcommand("report", "re-render summary and plots from a report");
  report->add_option("--in", flags.input, "existing report.json")->required();
  report->add_option("--out", flags.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    const ExperimentSpec spec = merge(active, flags, spec_file, active->get_name());
    const Report result = slngbm::cli::run_experiment(spec);
    for (const std::string& line : result.summary) std::printf("%s\n", line.c_str());
    if (!result.ok) {
      std::fprintf(stderr, "error: one or more checks failed or a divergence budget was hit\n");
      return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
