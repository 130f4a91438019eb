// Command-line front end: one subcommand per simulator product, a JSON
// config file for everything else, and a handful of override flags with
// precedence flag > config file > built-in default.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error,
// 4 degenerate spectrum under the fail policy.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dradar/commands.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int runs = 0;
  std::string array_spec;
  std::string algo;
  std::string material;
  double p_exponent = 0.0;
  int threads = 0;
};

void add_common_options(CLI::App* cmd, CliOverrides* o) {
  cmd->add_option("--config", o->config_path, "JSON config file");
  cmd->add_option("--out", o->out_dir, "Output directory");
  cmd->add_option("--seed", o->seed, "Master seed for all random draws");
  cmd->add_option("--runs", o->runs, "Monte-Carlo runs per sweep cell");
  cmd->add_option("--array", o->array_spec, "MIMO array as NTXxNRX, e.g. 8x8");
  cmd->add_option("--algo", o->algo, "DOA algorithm")
      ->check(CLI::IsMember({"music", "mvdr"}));
  cmd->add_option("--material", o->material, "Wall material name");
  cmd->add_option("--p-exponent", o->p_exponent,
                  "Distance scaling exponent p in [0, 4]");
  cmd->add_option("--threads", o->threads, "Worker threads (0 = hardware)");
}

std::pair<int, int> parse_array_spec(const std::string& spec) {
  const auto x = spec.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= spec.size()) {
    throw dradar::config_error("--array expects NTXxNRX, got: " + spec);
  }
  try {
    const int n_tx = std::stoi(spec.substr(0, x));
    const int n_rx = std::stoi(spec.substr(x + 1));
    return {n_tx, n_rx};
  } catch (const std::exception&) {
    throw dradar::config_error("--array expects NTXxNRX, got: " + spec);
  }
}

dradar::RunConfig build_config(const CLI::App* cmd, const CliOverrides& o,
                               const std::string& command_name) {
  dradar::RunConfig cfg = o.config_path.empty()
                              ? dradar::RunConfig::defaults()
                              : dradar::RunConfig::from_file(o.config_path);
  const auto given = [&](const std::string& name) { return cmd->count(name) > 0; };

  if (given("--out")) cfg.set_override("/output/directory", o.out_dir);
  if (given("--seed")) cfg.set_override("/doa/master_seed", o.seed);
  if (given("--runs")) cfg.set_override("/doa/monte_carlo_runs", o.runs);
  if (given("--threads")) cfg.set_override("/doa/threads", o.threads);
  if (given("--p-exponent")) cfg.set_override("/scaling/p_exponent", o.p_exponent);
  if (given("--array")) {
    const auto [n_tx, n_rx] = parse_array_spec(o.array_spec);
    cfg.set_override("/array/n_tx", n_tx);
    cfg.set_override("/array/n_rx", n_rx);
    cfg.set_override("/array/grid_nx", 0);
    cfg.set_override("/array/grid_ny", 0);
  }
  if (given("--algo")) {
    cfg.set_override("/doa/algorithms", nlohmann::json::array({o.algo}));
  }
  if (given("--material")) {
    if (command_name == "link-budget") {
      cfg.set_override("/link_budget/materials", nlohmann::json::array({o.material}));
    } else {
      cfg.set_override("/doa/material", o.material);
    }
  }
  return cfg;
}

void write_run_meta(const dradar::RunConfig& cfg, const std::string& command,
                    double elapsed_s) {
  const std::time_t now = std::time(nullptr);
  char stamp[32] = {0};
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const nlohmann::json meta = {
      {"command", command}, {"elapsed_seconds", elapsed_s}, {"timestamp_utc", stamp}};
  const std::filesystem::path dir(cfg.output_directory());
  std::filesystem::create_directories(dir);
  dradar::detail::write_text_file(dir / "run_meta.json", meta.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-band MIMO FMCW radar array simulator"};
  app.require_subcommand(1);
  CliOverrides overrides;

  CLI::App* doa = app.add_subcommand("doa-sweep", "Monte-Carlo DOA accuracy sweep");
  CLI::App* link = app.add_subcommand("link-budget", "Required TX power vs SNR and distance");
  CLI::App* power = app.add_subcommand("power-budget", "DC power budget vs array size");
  CLI::App* factor = app.add_subcommand("array-factor", "Array factor over the field of view");
  CLI::App* chirp = app.add_subcommand("chirp-demo", "Range recovery from dechirped echoes");
  for (CLI::App* cmd : {doa, link, power, factor, chirp}) {
    add_common_options(cmd, &overrides);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    const dradar::RunConfig cfg = build_config(cmd, overrides, name);
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "doa-sweep") {
      dradar::run_doa_sweep(cfg);
    } else if (name == "link-budget") {
      dradar::run_link_budget(cfg);
    } else if (name == "power-budget") {
      dradar::run_power_budget(cfg);
    } else if (name == "array-factor") {
      dradar::run_array_factor(cfg);
    } else {
      dradar::run_chirp_demo(cfg);
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    write_run_meta(cfg, name, dt.count());
    return 0;
  } catch (const dradar::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dradar::degenerate_spectrum_error& e) {
    std::cerr << "degenerate spectrum: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
