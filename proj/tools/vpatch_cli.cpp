// vpatch: command-line front end.
//
//   vpatch <subcommand> [--config file.json] [flags] [--out dir]
//
// Flags override values read from --config. Outputs go to --out, else
// $VPATCH_OUT_DIR, else ./vpatch_out. Exit codes: 0 ok, 1 invalid
// configuration, 2 numerical invariant violated.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>

#include "commands.hpp"
#include "output.hpp"
#include "vpatch/errors.hpp"

namespace {

struct Binder {
  CLI::App& app;
  vpcli::RunConfig& flags;
  std::vector<std::pair<CLI::Option*, std::function<void(vpcli::RunConfig&)>>> appliers;

  template <class T>
  void add(const std::string& name, T vpcli::RunConfig::*field, const std::string& help) {
    CLI::Option* o = app.add_option(name, flags.*field, help)->delimiter(',');
    appliers.emplace_back(o, [this, field](vpcli::RunConfig& c) { c.*field = flags.*field; });
  }
  void flag(const std::string& name, bool vpcli::RunConfig::*field, const std::string& help) {
    CLI::Option* o = app.add_flag(name, flags.*field, help);
    appliers.emplace_back(o, [this, field](vpcli::RunConfig& c) { c.*field = flags.*field; });
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vortex patch quasi-periodic analysis toolkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  vpcli::RunConfig flags;
  Binder bind{app, flags, {}};
  std::string config_path, amplitudes, out_dir;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  CLI::Option* amp_opt = app.add_option("--amplitudes", amplitudes, "initial profile j:a,... for r0 = sum a cos(j theta)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "seed for synthetic remainders");
  CLI::Option* out_opt = app.add_option("--out", out_dir, "output directory");
  bind.add("--b", &vpcli::RunConfig::b, "equilibrium radius b in (0,1)");
  bind.add("--sites", &vpcli::RunConfig::sites, "tangential sites, e.g. 1,2");
  bind.add("--M", &vpcli::RunConfig::M, "angular grid size");
  bind.add("--N", &vpcli::RunConfig::N, "matrix truncation |j| <= N");
  bind.add("--dt", &vpcli::RunConfig::dt, "time step");
  bind.add("--T", &vpcli::RunConfig::T, "final time (linear flow residual time for linearize)");
  bind.add("--stride", &vpcli::RunConfig::stride, "record every n-th step");
  bind.add("--modes", &vpcli::RunConfig::modes, "Fourier modes to record");
  bind.add("--dealias", &vpcli::RunConfig::dealias, "2/3 filter after each step (true/false)");
  bind.add("--jmax", &vpcli::RunConfig::jmax, "largest j in the frequency table");
  bind.flag("--transversality", &vpcli::RunConfig::transversality, "run the transversality scan");
  bind.add("--grid", &vpcli::RunConfig::grid, "transversality scan grid size");
  bind.add("--eps-hat", &vpcli::RunConfig::eps_hat, "perturbation for a second transversality scan");
  bind.add("--kind", &vpcli::RunConfig::kind, "transport, first-order or second-order");
  bind.add("--gamma", &vpcli::RunConfig::gamma, "Diophantine constant");
  bind.add("--tau1", &vpcli::RunConfig::tau1, "exponent tau1");
  bind.add("--tau2", &vpcli::RunConfig::tau2, "exponent tau2");
  bind.add("--upsilon", &vpcli::RunConfig::upsilon, "exponent upsilon");
  bind.add("--lmax", &vpcli::RunConfig::lmax, "largest |l|_1");
  bind.add("--gammas", &vpcli::RunConfig::gammas, "gamma sequence for the measure study");
  bind.add("--rho0", &vpcli::RunConfig::rho0, "transversality constant for the Russmann check (0 skips it)");
  bind.add("--omega", &vpcli::RunConfig::omega, "Diophantine frequency vector");
  bind.add("--phi-grid", &vpcli::RunConfig::phi_grid, "grid sizes in the phi variables");
  bind.add("--v-amp", &vpcli::RunConfig::v_amp, "a in f0 = a cos(theta) + w cos(phi + theta)");
  bind.add("--w-amp", &vpcli::RunConfig::w_amp, "w in f0");
  bind.add("--steps", &vpcli::RunConfig::steps, "KAM steps");
  bind.add("--N0", &vpcli::RunConfig::N0, "initial truncation N0");
  bind.add("--delta0", &vpcli::RunConfig::delta0, "size of the synthetic remainder");
  bind.add("--L", &vpcli::RunConfig::L, "time-frequency cap of the remainder");
  bind.add("--J", &vpcli::RunConfig::J, "space-mode cap of the remainder");
  bind.add("--lsupp", &vpcli::RunConfig::lsupp, "|l|_1 support of the synthetic remainder");
  bind.add("--band", &vpcli::RunConfig::band, "|j-k| band of the synthetic remainder");
  bind.add("--jobs", &vpcli::RunConfig::jobs, "worker threads for scans");

  for (const char* name : {"simulate", "linearize", "spectrum", "cantor", "kam-transport", "kam-remainder"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    vpcli::RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      vpcli::merge_json(nlohmann::json::parse(in), cfg);
    }
    for (auto& [opt, apply] : bind.appliers)
      if (opt->count() > 0) apply(cfg);
    if (amp_opt->count() > 0) cfg.amplitudes = vpcli::parse_amplitudes(amplitudes);
    if (seed_opt->count() > 0) cfg.seed = seed;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (out_opt->count() > 0) {
      cfg.out = out_dir;
    } else if (cfg.out.empty()) {
      const char* env = std::getenv("VPATCH_OUT_DIR");
      cfg.out = env && *env ? env : "vpatch_out";
    }
    cfg.validate();

    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    nlohmann::json echo = cfg;
    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    std::vector<std::string> files;
    try {
      files = vpcli::run_subcommand(cfg, dir);
    } catch (const vpatch::invariant_violation& e) {
      std::cerr << "invariant violated: " << e.what() << '\n';
      code = 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    vpcli::write_manifest(dir, cfg.subcommand, echo, files, wall);
    if (code == 0) std::cout << "wrote " << files.size() << " files to " << dir.string() << '\n';
    return code;
  } catch (const vpatch::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
