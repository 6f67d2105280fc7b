#pragma once

// Weak-coupling structure of the compact abelian theory: normal modes of the
// quadratic approximation, the free-photon Fock ladder, and generic
// Rayleigh–Schrödinger coefficients.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "latgauge/hamiltonian.hpp"
#include "latgauge/lattice.hpp"
#include "latgauge/spectra.hpp"

namespace latgauge {

struct NormalModeSet {
  /// Ascending, strictly positive.
  std::vector<double> frequencies;
  /// Link-space mode shapes, one unit column per frequency.
  Eigen::MatrixXd shapes;
  /// Flat directions left after removing the n0 − 1 pure-gauge directions
  /// (the harmonic Wilson lines of the torus).
  int zero_mode_count = 0;
  int gauge_directions = 0;
  /// n1 − n0 + 1: dimension of the gauge-reduced configuration space.
  int reduced_dimension = 0;
  std::vector<int> dims;
};

/// Quadratic expansion c − cos Φ → Φ²/2 about the trivial connection:
/// ω² = 2·electric_prefactor·magnetic_prefactor·λ(CᵀC) with C the
/// plaquette-link curl matrix.
NormalModeSet normal_modes(const LatticeGeometry& geom, const CouplingParams& coupling = {});
/// As above; kUnsupportedStructure unless the structure is truncated U(1).
NormalModeSet normal_modes(const LatticeGeometry& geom, const GaugeStructure& structure,
                           const CouplingParams& coupling = {});

/// The plaquette × link matrix of signs.
Eigen::MatrixXd curl_matrix(const LatticeGeometry& geom);

struct FockLevel {
  std::vector<int> occupation;
  double energy = 0.0;
};

/// Every occupation vector with Σ n_k ω_k ≤ cutoff, ascending by energy and
/// then lexicographically by occupation.
std::vector<FockLevel> fock_spectrum(const std::vector<double>& frequencies, double energy_cutoff);
std::vector<FockLevel> fock_spectrum(const NormalModeSet& modes, double energy_cutoff);

struct SeriesCoefficients {
  std::vector<double> coefficients;
  /// Smallest |E_n − E_m| over m ≠ n.
  double level_spacing = 0.0;
};

/// E(λ) ≈ E⁽⁰⁾ + λ·E⁽¹⁾ + λ²·E⁽²⁾ for eigenvalue `level` (0-based, ascending)
/// of H0 + λV. Both operators are diagonalized densely. kDegeneracy when the
/// level is within `degeneracy_threshold` of a neighbour.
SeriesCoefficients rs_series(const SparseOperator& h0, const SparseOperator& v, int level, int order,
                             double degeneracy_threshold = 1e-8);

struct WeakCouplingOptions {
  bool zero_winding = true;
  SolverOptions solver;
  int max_charge = TruncatedU1::kDefaultMaxCharge;
};

struct WeakCouplingRow {
  int level = 0;
  double exact_energy = 0.0;
  double exact_ratio = 0.0;
  double fock_energy = 0.0;
  double fock_ratio = 0.0;
  double deviation = 0.0;
};

struct WeakCouplingTable {
  double g = 0.0;
  int n_max = 0;
  std::uint64_t sector_dim = 0;
  std::vector<WeakCouplingRow> rows;
  double max_deviation = 0.0;
};

/// Compares the k lowest excitation energies of truncated U(1), divided by
/// the first, with the same ratios on the Fock ladder of normal_modes.
WeakCouplingTable weak_coupling_check(const LatticeGeometry& geom, int n_max, double g, int k,
                                      const WeakCouplingOptions& options = {});

}  // namespace latgauge
