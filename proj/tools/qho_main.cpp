#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "qho/commands.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config,
                  "Problem config (JSON path or bundled fixture ex1/ex2)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-moment analysis and coherent observer synthesis for "
               "closed oscillator networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("qho ") + qho::kVersion);

  CommonOptions moments_opts, backaction_opts, synthesize_opts, check_opts;
  std::string tau_grid_text;
  double mu_max = 5.0;
  int steps = 64;

  CLI::App* moments = app.add_subcommand(
      "moments", "Discounted second moments of a single oscillator over a tau grid");
  add_common(moments, moments_opts);
  moments->add_option("--tau-grid", tau_grid_text, "Horizon grid a:b:n (default tau/100:tau:40)");

  CLI::App* backaction = app.add_subcommand(
      "backaction", "Observer back-action bounds along a coupling sweep");
  add_common(backaction, backaction_opts);
  backaction->add_option("--mu-max", mu_max, "Sweep endpoint (default 5)");
  backaction->add_option("--steps", steps, "Sweep steps (default 64)");

  CLI::App* synthesize = app.add_subcommand(
      "synthesize", "Homotopy continuation of the optimal mirrored coupling");
  add_common(synthesize, synthesize_opts);
  synthesize->add_option("--mu-max", mu_max, "Continuation endpoint (default 5)");
  synthesize->add_option("--steps", steps, "Continuation steps (default 64)");

  CLI::App* check = app.add_subcommand("check", "Run the invariant suite on a config");
  add_common(check, check_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    qho::CommandResult result;
    if (moments->parsed()) {
      const qho::ProblemConfig config = qho::load_config(moments_opts.config);
      const qho::TauGrid grid =
          tau_grid_text.empty() ? qho::TauGrid{} : qho::parse_tau_grid(tau_grid_text);
      result = qho::cmd_moments(config, grid, moments_opts.out_dir);
    } else if (backaction->parsed()) {
      const qho::ProblemConfig config = qho::load_config(backaction_opts.config);
      result = qho::cmd_backaction(config, mu_max, steps, backaction_opts.out_dir);
    } else if (synthesize->parsed()) {
      const qho::ProblemConfig config = qho::load_config(synthesize_opts.config);
      result = qho::cmd_synthesize(config, mu_max, steps, synthesize_opts.out_dir);
    } else {
      const qho::ProblemConfig config = qho::load_config(check_opts.config);
      result = qho::cmd_check(config, check_opts.out_dir);
    }
    if (!result.message.empty()) std::cout << result.message << "\n";
    return result.status;
  } catch (const qho::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qho::kExitConfig;
  } catch (const qho::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return qho::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qho::kExitNumerical;
  }
}
