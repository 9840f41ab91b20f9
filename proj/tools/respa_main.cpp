// Command-line driver: train | attack | eval | sweep | surface.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "respa/config.hpp"
#include "respa/error.hpp"
#include "respa/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  bool force = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "Path to the run config (JSON)")->required();
  cmd->add_flag("--force", args.force, "Replace differing existing outputs");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer-attack benchmark harness: residual-perturbation and baseline "
               "sign-step attacks on small differentiable classifiers"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train every configured model and write checkpoints");
  add_common(train, train_args);

  CommonArgs attack_args;
  std::string attack_surrogate;
  std::string attack_id;
  CLI::App* attack = app.add_subcommand(
      "attack", "Generate adversarial examples and per-sample traces for one surrogate/attack pair");
  add_common(attack, attack_args);
  attack->add_option("--surrogate", attack_surrogate, "Model id to attack")->required();
  attack->add_option("--attack", attack_id, "Attack id from the config")->required();

  CommonArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score the generated adversarial sets on every target");
  add_common(eval, eval_args);

  CommonArgs sweep_args;
  std::string sweep_param;
  std::vector<double> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "Re-run the transfer summary across one hyperparameter");
  add_common(sweep, sweep_args);
  sweep->add_option("--param", sweep_param, "One of beta, N, theta, gamma, rho")->required();
  sweep->add_option("--values", sweep_values, "Values to sweep")->required()->delimiter(',');

  CommonArgs surface_args;
  std::vector<std::string> surface_attacks;
  std::string surface_surrogate;
  int surface_samples = 8;
  CLI::App* surface = app.add_subcommand("surface", "Probe loss surfaces around adversarial examples");
  add_common(surface, surface_args);
  surface->add_option("--attack", surface_attacks, "Attack ids (default: all configured)");
  surface->add_option("--samples", surface_samples, "Adversarial examples to probe per attack");
  surface->add_option("--surrogate", surface_surrogate,
                      "Surrogate id (default: first in evaluation.surrogates)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      respa::cmd_train(respa::load_run_config(train_args.config_path),
                       {train_args.force, train_args.quiet});
    } else if (attack->parsed()) {
      respa::cmd_attack(respa::load_run_config(attack_args.config_path), attack_surrogate,
                        attack_id, {attack_args.force, attack_args.quiet});
    } else if (eval->parsed()) {
      respa::cmd_eval(respa::load_run_config(eval_args.config_path),
                      {eval_args.force, eval_args.quiet});
    } else if (sweep->parsed()) {
      respa::cmd_sweep(respa::load_run_config(sweep_args.config_path), sweep_param, sweep_values,
                       {sweep_args.force, sweep_args.quiet});
    } else if (surface->parsed()) {
      respa::cmd_surface(respa::load_run_config(surface_args.config_path), surface_attacks,
                         surface_samples, surface_surrogate,
                         {surface_args.force, surface_args.quiet});
    }
  } catch (const respa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
