// Batch front end: reads a JSON run config and writes tables under --out.
// Exit codes: 0 success, 1 runtime failure, 2 config error, 3 failed check
// inside a cell.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "capi.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;

void report(const char* kind, const std::string& message, const std::string& path = {}) {
  nlohmann::ordered_json err{{"error", kind}};
  if (!path.empty()) err["path"] = path;
  err["message"] = message;
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated density of states approximants with error certificates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(idsa_version()));

  std::string config_path;
  cli::RunOptions opt;
  int workers = 0;
  std::uint64_t seed = 0;

  using Command = void (*)(const cli::RunConfig&, const cli::RunOptions&);
  Command chosen = nullptr;
  const std::pair<const char*, Command> commands[] = {
      {"ids", cli::cmd_ids},
      {"folner-audit", cli::cmd_folner_audit},
      {"percolation", cli::cmd_percolation},
      {"continuity", cli::cmd_continuity},
  };
  const char* help[] = {
      "approximants, certificates and summary per (j, n)",
      "per-n table of tile sizes, boundaries and diameters",
      "empirical vs analytic pattern frequencies and per-seed certificates",
      "IDS continuity gap over an eps grid",
  };
  for (std::size_t i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "colouring seed (overrides the config)");
    sub->callback([&chosen, cmd = commands[i].second] { chosen = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--workers")) opt.workers = workers;
    if (sub->count("--seed")) opt.seed = seed;
  }

  try {
    const cli::RunConfig cfg = cli::load_config(config_path);
    chosen(cfg, opt);
  } catch (const cli::ConfigError& e) {
    report("config", e.what(), e.path());
    return kExitConfig;
  } catch (const cli::CellAssertion& e) {
    report("assertion", e.what());
    return kExitAssertion;
  } catch (const std::exception& e) {
    report("runtime", e.what());
    return kExitRuntime;
  }
  return 0;
}
