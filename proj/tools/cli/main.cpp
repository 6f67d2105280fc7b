#include <CLI11.hpp>

#include <iostream>
#include <new>
#include <utility>

#include "commands.hpp"
#include "config.hpp"

using namespace latgauge;

int main(int argc, char** argv) {
  CLI::App app{"latgauge: Hamiltonian lattice gauge theory toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::string format;

  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "lowest eigenvalues and gap at one coupling"},
      {"scan", "gap scan over a coupling/size grid"},
      {"classical", "leapfrog evolution of the compact-abelian classical theory"},
      {"perturb", "exact vs Fock excitation ratios at weak coupling"},
      {"oracle", "dense diagonalization of a small sector or full space"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--threads", threads, "worker threads (default 1)")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "records, csv or both")->check(CLI::IsMember({"records", "csv", "both"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto config = cli::load_config(config_path, cli::parse_command(command));
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (threads > 0) config.threads = threads;
    if (!format.empty()) config.output.formats = format;
    return cli::run(config, std::cerr);
  } catch (const Error& e) {
    std::cerr << "latgauge " << command << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    return cli::exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "latgauge " << command << ": resource: out of memory\n";
    return cli::kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "latgauge " << command << ": " << e.what() << '\n';
    return 1;
  }
}
