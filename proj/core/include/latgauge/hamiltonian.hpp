#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "latgauge/group.hpp"
#include "latgauge/hilbert.hpp"
#include "latgauge/lattice.hpp"

namespace latgauge {

/// H_Γ = electric_prefactor·Δ + magnetic_prefactor·Σ_s (c − Re V_s).
struct CouplingParams {
  double g = 1.0;
  double electric_prefactor = 0.5;
  double magnetic_prefactor = 1.0;

  /// Default prefactors g²/2 and 1/g².
  static CouplingParams from_g(double g);
  /// Throws kInvalidParameter unless g > 0 and both prefactors are finite and positive.
  void validate() const;
};

struct Triplet {
  std::uint64_t row = 0;
  std::uint64_t col = 0;
  double value = 0.0;
};

/// Real symmetric operator in compressed-row form.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::uint64_t dimension, std::vector<std::uint64_t> row_offsets,
                 std::vector<std::uint64_t> columns, std::vector<double> values,
                 bool gauge_invariant);

  /// Sorts, merges duplicates and drops exact zeros.
  static SparseOperator from_triplets(std::uint64_t dimension, std::vector<Triplet> triplets,
                                      bool gauge_invariant);
  static SparseOperator from_dense(const Eigen::MatrixXd& dense, bool gauge_invariant = false);
  static SparseOperator diagonal(std::span<const double> entries, bool gauge_invariant = false);

  [[nodiscard]] std::uint64_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::uint64_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] bool gauge_invariant() const noexcept { return gauge_invariant_; }

  [[nodiscard]] std::span<const std::uint64_t> row_columns(std::uint64_t row) const;
  [[nodiscard]] std::span<const double> row_values(std::uint64_t row) const;

  void apply(std::span<const double> in, std::span<double> out) const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> in) const;

  /// Dense copy; kResource when the dimension exceeds cap.
  [[nodiscard]] Eigen::MatrixXd to_dense(std::uint64_t cap = 4096) const;

  [[nodiscard]] SparseOperator scaled(double factor) const;
  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);

  /// One "row col value" triplet per line, values at 17 significant digits.
  void write_coordinate(std::ostream& out) const;

 private:
  std::uint64_t dimension_ = 0;
  std::vector<std::uint64_t> row_offsets_{0};
  std::vector<std::uint64_t> columns_;
  std::vector<double> values_;
  bool gauge_invariant_ = false;
};

/// Which pieces of H_Γ a column generator emits.
enum class HamiltonianTerms { kElectric, kMagnetic, kFull };

struct MatrixEntry {
  StateCode target = 0;
  double value = 0.0;
};

/// Matrix-free lattice Hamiltonian on the full product space.
///
/// column() lists the nonzero entries ⟨target|H|state⟩ of one column, with
/// possible duplicates; everything else is built from it.
class LatticeHamiltonian {
 public:
  LatticeHamiltonian(LatticeGeometry geom, LinkOperatorSet links, CouplingParams coupling);

  [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geom_; }
  [[nodiscard]] const LinkOperatorSet& links() const noexcept { return links_; }
  [[nodiscard]] const CouplingParams& coupling() const noexcept { return coupling_; }
  [[nodiscard]] const ProductBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] bool gauge_invariant() const noexcept { return links_.bi_invariant; }

  /// Unscaled Δ when terms = kElectric, unscaled Σ_s(c − Re V_s) when
  /// kMagnetic, the prefactored sum when kFull.
  void column(StateCode state, HamiltonianTerms terms, std::vector<MatrixEntry>& out) const;
  /// Unscaled Re V_s.
  void plaquette_column(StateCode state, int plaquette, std::vector<MatrixEntry>& out) const;

  void apply(std::span<const double> in, std::span<double> out) const;

  [[nodiscard]] SparseOperator full_operator(HamiltonianTerms terms = HamiltonianTerms::kFull) const;
  /// Restriction to an explicit Gauss sector using one representative per
  /// orbit; requires the operator to commute with the sector's symmetry group.
  [[nodiscard]] SparseOperator sector_operator(const GaussSector& sector,
                                               HamiltonianTerms terms = HamiltonianTerms::kFull) const;

 private:
  void electric_column(StateCode state, double scale, std::vector<MatrixEntry>& out) const;
  void magnetic_column(StateCode state, double scale, std::vector<MatrixEntry>& out) const;
  void holonomy_shift(StateCode state, int plaquette, double amplitude, std::vector<MatrixEntry>& out) const;
  [[nodiscard]] int holonomy(StateCode state, int plaquette) const;

  LatticeGeometry geom_;
  LinkOperatorSet links_;
  CouplingParams coupling_;
  ProductBasis basis_;
  std::vector<std::vector<std::pair<int, double>>> laplacian_columns_;
};

SparseOperator electric_term(const LatticeGeometry& geom, const LinkOperatorSet& links);
SparseOperator plaquette_operator(const LatticeGeometry& geom, const LinkOperatorSet& links, int plaquette);
SparseOperator magnetic_term(const LatticeGeometry& geom, const LinkOperatorSet& links);
SparseOperator assemble(const LatticeGeometry& geom, const LinkOperatorSet& links,
                        const CouplingParams& coupling);

/// Restriction ⟨o_b|A|o_a⟩ of a full-space operator to an explicit sector,
/// summing over whole orbits (no symmetry assumption).
SparseOperator restrict_to_sector(const SparseOperator& full, const GaussSector& sector);

}  // namespace latgauge
