#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latgauge/group.hpp"
#include "latgauge/hilbert.hpp"
#include "latgauge/spectra.hpp"

namespace latgauge::cli {

inline constexpr const char* kFormatVersion = "latgauge-records/1";

enum class Command { kSpectrum, kScan, kClassical, kPerturb, kOracle };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct GaugeConfig {
  /// "cyclic", "group-file" or "u1".
  std::string kind = "cyclic";
  int n = 2;
  std::string path;
  int n_max = 1;
  int max_charge = TruncatedU1::kDefaultMaxCharge;
  int max_order = FiniteGroup::kDefaultMaxOrder;
  int character = 1;
};

struct ClassicalConfig {
  /// "zero", "mode", "random" or "uniform_flux".
  std::string initial = "zero";
  int mode = 0;
  double amplitude = 0.1;
  std::optional<std::uint64_t> seed;
  /// Empty picks 0.05/ω_max.
  std::optional<double> dt;
  long steps = 1000;
  long sample_every = 10;
};

struct PerturbConfig {
  std::vector<int> n_max{1};
  std::vector<double> g{0.3};
  int k = 4;
  bool zero_winding = true;
};

struct OracleConfig {
  /// "sector" or "full".
  std::string space = "sector";
  std::uint64_t cap = 4096;
  bool export_operator = false;
};

struct OutputConfig {
  std::string directory = "out";
  /// "records", "csv" or "both".
  std::string formats = "both";
  bool timing = true;
};

struct RunConfig {
  Command command = Command::kSpectrum;
  std::optional<GaugeConfig> gauge;
  std::vector<int> dims;
  std::optional<double> g;
  std::optional<double> a;
  std::optional<double> f;
  std::optional<double> electric_prefactor;
  std::optional<double> magnetic_prefactor;
  SolverOptions solver;
  bool seed_given = false;
  std::string sector_mode = "auto";
  SectorOptions sector;
  std::optional<double> degeneracy_tol;
  std::vector<GridPoint> grid;
  ClassicalConfig classical;
  PerturbConfig perturb;
  OracleConfig oracle;
  OutputConfig output;
  int threads = 1;
};

/// Strict parse: unknown keys, wrong types and missing required fields raise
/// Error(kParse) or Error(kInvalidParameter) naming the offending field.
RunConfig parse_config(const nlohmann::json& doc, Command command);
RunConfig load_config(const std::filesystem::path& path, Command command);

/// The configuration with every default filled in.
nlohmann::json resolved_json(const RunConfig& config);

GaugeStructure make_structure(const GaugeConfig& gauge);

}  // namespace latgauge::cli
