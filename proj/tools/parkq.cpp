// parkq: analytic solves, simulations and sweeps for the parking queue model.
//
// Exit codes: 0 success, 2 configuration error, 3 internal error.

#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#include "parking/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::string config_path;
  std::string preset;
  std::string kind = "nash";
  int seeds = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Options& opt, bool with_kind, bool with_seeds) {
  auto* src = cmd->add_option_group("source");
  src->add_option("--config", opt.config_path, "scenario config file");
  src->add_option("--preset", opt.preset, "preset name, searched in $PARKQ_PRESET_DIR");
  src->require_option(1);
  if (with_kind) {
    cmd->add_option("--kind", opt.kind, "equilibrium to use")
        ->check(CLI::IsMember({"nash", "social"}));
  }
  if (with_seeds) {
    cmd->add_option("--seeds", opt.seeds, "use seeds 1..N instead of the configured list")
        ->check(CLI::PositiveNumber);
  }
  cmd->add_option("--out", opt.out, "write CSV here instead of stdout");
}

parking::ScenarioConfig load(const Options& opt) {
  auto cfg = parking::load_config(opt.config_path.empty() ? parking::preset_path(opt.preset)
                                                          : opt.config_path);
  if (opt.seeds > 0) {
    cfg.simulation.seeds.resize(static_cast<std::size_t>(opt.seeds));
    std::iota(cfg.simulation.seeds.begin(), cfg.simulation.seeds.end(), std::uint64_t{1});
  }
  return cfg;
}

parking::SolutionKind parse_kind(const std::string& text) {
  return text == "social" ? parking::SolutionKind::social_optimum : parking::SolutionKind::nash;
}

void emit(const parking::CommandOutput& result, const Options& opt) {
  std::cerr << result.report;
  if (opt.out.empty()) {
    std::cout << result.csv;
    return;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) throw parking::ConfigError("--out: cannot write '" + opt.out + "'");
  file << result.csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parking queue games and queue-flow simulation"};
  app.require_subcommand(1);

  Options opt;
  auto* analyze = app.add_subcommand("analyze", "balking levels, welfare curve, price intervals");
  add_common(analyze, opt, false, false);
  auto* equilibrium = app.add_subcommand("equilibrium", "Nash or social optimum of the costly game");
  add_common(equilibrium, opt, true, false);
  auto* simulate = app.add_subcommand("simulate", "simulate the network under an equilibrium");
  add_common(simulate, opt, true, true);
  auto* sweep = app.add_subcommand("sweep", "long-form parameter sweep");
  add_common(sweep, opt, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto cfg = load(opt);
    parking::CommandOutput result;
    if (analyze->parsed()) {
      result = parking::cmd_analyze(cfg);
    } else if (equilibrium->parsed()) {
      result = parking::cmd_equilibrium(cfg, parse_kind(opt.kind));
    } else if (simulate->parsed()) {
      result = parking::cmd_simulate(cfg, parse_kind(opt.kind));
    } else {
      result = parking::cmd_sweep(cfg);
    }
    emit(result, opt);
  } catch (const parking::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const parking::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (...) {
    std::cerr << "internal error\n";
    return kExitInternal;
  }
  return 0;
}
