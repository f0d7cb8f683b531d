#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "commands.hpp"
#include "exhawkes/core/log.hpp"

namespace {

int usage_error(const CLI::App& app, const CLI::ParseError& e) {
  std::cerr << e.what() << "\n\n" << app.help();
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace exhawkes::cli;
  CLI::App app{"Marked self-exciting point process toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a pattern from the [simulate] section of a config");
  simulate->add_option("--config", sim.config, "config file")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--seed", sim.seed, "overrides simulate.seed");

  FitMarksArgs fm;
  auto* fit_marks = app.add_subcommand("fit-marks", "Bayesian fit of the mark mixture");
  fit_marks->add_option("--events", fm.events, "event CSV")->required()->check(CLI::ExistingFile);
  fit_marks->add_option("--covariates", fm.covariates, "covariate CSV")->check(CLI::ExistingFile);
  fit_marks->add_option("--config", fm.config, "config file")->check(CLI::ExistingFile);
  fit_marks->add_option("--threshold", fm.threshold, "body/tail threshold u");
  fit_marks->add_option("--samples", fm.samples, "total iterations");
  fit_marks->add_option("--burnin", fm.burn_in, "burn-in iterations");
  fit_marks->add_option("--thin", fm.thin, "thinning interval");
  fit_marks->add_option("--seed", fm.seed, "random seed");
  fit_marks->add_option("--body", fm.body, "zip or zinb");
  fit_marks->add_option("--tail", fm.tail, "gzd or gpd");
  fit_marks->add_option("--out", fm.out, "output directory")->required();

  SelectMarksArgs sm;
  auto* select_marks = app.add_subcommand("select-marks", "AIC table over body, tail and threshold");
  select_marks->add_option("--events", sm.events, "event CSV")->required()->check(CLI::ExistingFile);
  select_marks->add_option("--config", sm.config, "config file")->check(CLI::ExistingFile);
  select_marks->add_option("--thresholds", sm.thresholds, "comma-separated thresholds")->delimiter(',');
  select_marks->add_option("--out", sm.out, "output CSV")->required();

  FitIntensityArgs fi;
  auto* fit_intensity = app.add_subcommand("fit-intensity", "hybrid MCMC for the intensity");
  fit_intensity->add_option("--events", fi.events, "event CSV")->required()->check(CLI::ExistingFile);
  fit_intensity->add_option("--covariates", fi.covariates, "covariate CSV")->check(CLI::ExistingFile);
  fit_intensity->add_option("--config", fi.config, "config file")->check(CLI::ExistingFile);
  fit_intensity->add_option("--seed", fi.seed, "overrides mcmc.seed");
  fit_intensity->add_option("--samples", fi.samples, "overrides mcmc.samples");
  fit_intensity->add_flag("--resume", fi.resume, "continue from the checkpoint in the output directory");
  fit_intensity->add_option("--out", fi.out, "output directory")->required();

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "yearly, extreme-event and forecast intensity grids");
  predict->add_option("--chain", pr.chain, "fit-intensity output directory")->required()->check(CLI::ExistingDirectory);
  predict->add_option("--events", pr.events, "event CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--covariates", pr.covariates, "covariate CSV")->check(CLI::ExistingFile);
  predict->add_option("--config", pr.config, "config file (default: the chain's snapshot)")->check(CLI::ExistingFile);
  predict->add_option("--marks", pr.marks, "fit-marks output directory")->check(CLI::ExistingDirectory);
  predict->add_option("--years", pr.years, "comma-separated years");
  predict->add_option("--mark-threshold", pr.mark_threshold, "casualty threshold k of the extreme grid");
  predict->add_option("--grid", pr.grid, "cell size DXxDY in degrees");
  predict->add_option("--horizon", pr.horizon, "forecast horizon as a decimal year");
  predict->add_option("--time-samples", pr.time_samples, "time draws per year");
  predict->add_option("--out", pr.out, "output directory")->required();

  DiagnoseArgs dg;
  auto* diagnose = app.add_subcommand("diagnose", "ESS, acceptance rates and traces of a chain");
  diagnose->add_option("--chain", dg.chain, "directory with chain.csv")->required()->check(CLI::ExistingDirectory);
  diagnose->add_option("--out", dg.out, "output directory (default: <chain>/diagnose)");

  ExploreArgs ex;
  auto* explore = app.add_subcommand("explore", "casualty histogram, ECDF and quantiles");
  explore->add_option("--events", ex.events, "event CSV")->required()->check(CLI::ExistingFile);
  explore->add_option("--config", ex.config, "config file")->check(CLI::ExistingFile);
  explore->add_option("--out", ex.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    return usage_error(*failed, e);
  }

  exhawkes::log::set_verbose(verbose);
  const CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == simulate) run_simulate(sim);
    else if (chosen == fit_marks) run_fit_marks(fm);
    else if (chosen == select_marks) run_select_marks(sm);
    else if (chosen == fit_intensity) run_fit_intensity(fi);
    else if (chosen == predict) run_predict(pr);
    else if (chosen == diagnose) run_diagnose(dg);
    else if (chosen == explore) run_explore(ex);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = {{"command", chosen->get_name()}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
