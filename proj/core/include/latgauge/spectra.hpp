#pragma once

// Low-lying spectra: a restarted block Lanczos solver, the dense oracle, gap
// extraction and coupling scans.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latgauge/group.hpp"
#include "latgauge/hamiltonian.hpp"
#include "latgauge/hilbert.hpp"

namespace latgauge {

/// Label carried by every gap value the library reports.
inline constexpr std::string_view kGapDisclaimer =
    "finite-lattice energy gap above the vacuum cluster; not a continuum mass gap";

/// A real symmetric operator seen only through its action.
///
/// When `project` is set it is applied to every Krylov vector, which keeps the
/// iteration inside the range of a projector commuting with `apply`.
/// `effective_dimension` is the rank of that range (equal to `dimension`
/// when there is no projector).
struct LinearOperator {
  std::uint64_t dimension = 0;
  std::uint64_t effective_dimension = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::function<void(std::span<double>)> project;
};

LinearOperator as_linear_operator(const SparseOperator& op);
/// Full-space H_Γ restricted by an implicit or explicit Gauss projector,
/// either matrix-free or through an assembled full-space matrix.
LinearOperator projected_operator(const LatticeHamiltonian& h, const GaussSector& sector);
LinearOperator projected_operator(const SparseOperator& full, const GaussSector& sector);

struct SolverOptions {
  int k = 6;
  double tol = 1e-10;
  /// Number of restarts before giving up.
  int max_iter = 200;
  std::uint64_t seed = 0;
  /// 0 picks k + 2.
  int block_size = 0;
  /// 0 picks min(n, max(40, 8·block)).
  int krylov_dim = 0;
  bool keep_vectors = false;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  /// Only filled when SolverOptions::keep_vectors is set.
  std::vector<std::vector<double>> eigenvectors;
  double ground_energy = 0.0;
  int iterations = 0;
  std::uint64_t matvecs = 0;
  std::uint64_t seed = 0;
  std::string method;
};

/// The k lowest eigenpairs, each with ‖Av − λv‖ ≤ tol·max(1, |λ|) checked
/// by an independent residual recomputation. Deterministic for fixed seed.
SpectrumReport lowest_k(const LinearOperator& op, const SolverOptions& options);
SpectrumReport lowest_k(const SparseOperator& op, int k, double tol, std::uint64_t seed);

/// Every eigenvalue, ascending, by dense diagonalization.
std::vector<double> dense_oracle(const SparseOperator& op, std::uint64_t cap = 4096);

struct GapResult {
  std::optional<double> gap;
  int vacuum_multiplicity = 0;
  double ground_mean = 0.0;
  /// Spread of the ground cluster.
  double splitting = 0.0;
  double tolerance = 0.0;

  [[nodiscard]] bool indeterminate() const noexcept { return !gap.has_value(); }
};

/// Clusters the ascending eigenvalues by chaining neighbours closer than the
/// tolerance (default 1e-6 times the spread of the list). The gap is
/// measured from the ground-cluster mean to the first eigenvalue outside it;
/// it is empty when every eigenvalue falls in one cluster.
GapResult mass_gap(std::span<const double> eigenvalues, std::optional<double> degeneracy_tol = {});

/// g = f/|ln a| for 0 < a < 1 and f > 0.
double coupling_schedule(double a, double f);

struct GridPoint {
  std::vector<int> dims;
  std::optional<double> g;
  std::optional<double> a;
  std::optional<double> f;
};

struct ScanConfig {
  GaugeStructure structure;
  SectorOptions sector{};
  SolverOptions solver{};
  std::optional<double> electric_prefactor{};
  std::optional<double> magnetic_prefactor{};
  std::optional<double> degeneracy_tol{};
  /// Grid points solved concurrently.
  int threads = 1;
  /// Record wall-clock seconds; zero is written otherwise.
  bool timing = true;
};

struct ScanRecord {
  std::size_t index = 0;
  std::vector<int> dims;
  std::string structure_id;
  double g = 0.0;
  std::optional<double> a;
  std::optional<double> f;
  std::uint64_t sector_dim = 0;
  std::string sector_mode;
  std::vector<double> eigenvalues;
  double ground_energy = 0.0;
  std::optional<double> gap;
  int vacuum_mult = 0;
  double splitting = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  bool ok = false;
  std::string error_kind;
  std::string error_message;
  std::string disclaimer{kGapDisclaimer};
};

/// Resolves g for one grid point (explicit g or the schedule).
double resolve_coupling(const GridPoint& point);

/// Builds, projects and solves one coupling point.
SpectrumReport solve_point(const LatticeGeometry& geom, const ScanConfig& config, double g,
                           std::uint64_t* sector_dim = nullptr, std::string* sector_mode = nullptr);

/// One record per grid point in grid order. Errors are captured per point.
/// `emit` sees each record as soon as it and all earlier ones are done.
std::vector<ScanRecord> gap_scan(const std::vector<GridPoint>& grid, const ScanConfig& config,
                                 const std::function<void(const ScanRecord&)>& emit = {});

}  // namespace latgauge
