#pragma once

// Per-link gauge degrees of freedom: finite groups given by multiplication
// tables and the electric-basis truncation of U(1).

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace latgauge {

/// A finite group stored as a dense multiplication table.
///
/// Construction validates every axiom exhaustively (identity, inverses,
/// associativity over all triples) and checks that the generating set is
/// symmetric, excludes the identity and generates the whole group. The
/// first failure is reported as an Error of kind kValidation.
class FiniteGroup {
 public:
  static constexpr int kDefaultMaxOrder = 48;

  FiniteGroup(int order, std::vector<int> table, int identity,
              std::vector<int> generators, int max_order = kDefaultMaxOrder);

  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] int identity() const noexcept { return identity_; }
  [[nodiscard]] int multiply(int a, int b) const noexcept {
    return table_[static_cast<std::size_t>(a) * order_ + b];
  }
  [[nodiscard]] int inverse(int a) const noexcept { return inverse_[a]; }

  [[nodiscard]] std::span<const int> table() const noexcept { return table_; }
  [[nodiscard]] std::span<const int> inverses() const noexcept { return inverse_; }
  [[nodiscard]] std::span<const int> generators() const noexcept { return generators_; }

  [[nodiscard]] bool is_abelian() const noexcept { return abelian_; }
  /// True when g·h·g⁻¹ lies in the generating set for every g and generator h.
  [[nodiscard]] bool generators_conjugation_closed() const noexcept {
    return conjugation_closed_;
  }
  /// N when the table is exactly (i + j) mod N with identity 0.
  [[nodiscard]] std::optional<int> cyclic_order() const noexcept;

  /// Short label used in output metadata, e.g. "Z2" or "G6".
  [[nodiscard]] std::string label() const;

  friend bool operator==(const FiniteGroup& a, const FiniteGroup& b) {
    return a.order_ == b.order_ && a.identity_ == b.identity_ &&
           a.table_ == b.table_ && a.generators_ == b.generators_;
  }

 private:
  int order_;
  int identity_;
  std::vector<int> table_;
  std::vector<int> inverse_;
  std::vector<int> generators_;
  bool abelian_ = false;
  bool conjugation_closed_ = false;
};

/// Z_N with generating set {1, N-1} ({1} for N = 2).
FiniteGroup make_cyclic_group(int n, int max_order = FiniteGroup::kDefaultMaxOrder);

/// Parses the group-table text format (JSON object with exactly the keys
/// `order`, `identity`, `table` (row-major) and `generators`).
FiniteGroup load_group(std::string_view text,
                       int max_order = FiniteGroup::kDefaultMaxOrder);
FiniteGroup load_group_file(const std::filesystem::path& path,
                            int max_order = FiniteGroup::kDefaultMaxOrder);
/// Inverse of load_group.
std::string dump_group(const FiniteGroup& group);

/// U(1) restricted to the electric window n ∈ {-n_max, …, n_max}.
class TruncatedU1 {
 public:
  static constexpr int kDefaultMaxCharge = 8;

  explicit TruncatedU1(int n_max, int cap = kDefaultMaxCharge);

  [[nodiscard]] int n_max() const noexcept { return n_max_; }
  [[nodiscard]] int dimension() const noexcept { return 2 * n_max_ + 1; }
  [[nodiscard]] int charge(int index) const noexcept { return index - n_max_; }
  /// Basis index of charge n, or -1 outside the window.
  [[nodiscard]] int index(int n) const noexcept {
    return (n < -n_max_ || n > n_max_) ? -1 : n + n_max_;
  }

  friend bool operator==(const TruncatedU1&, const TruncatedU1&) = default;

 private:
  int n_max_;
};

/// One link's degree of freedom together with the character used for the
/// plaquette term.
///
/// For cyclic groups the character is the one-dimensional representation
/// x ↦ exp(2πi·k·x/N) with k = character_charge. Other finite groups use the
/// normalized regular character (1 on the identity, 0 elsewhere). For U(1)
/// the holonomy raises the electric charge by k on each link.
class GaugeStructure {
 public:
  explicit GaugeStructure(FiniteGroup group, int character_charge = 1);
  explicit GaugeStructure(TruncatedU1 u1, int character_charge = 1);

  [[nodiscard]] bool is_finite_group() const noexcept {
    return std::holds_alternative<FiniteGroup>(impl_);
  }
  [[nodiscard]] const FiniteGroup& group() const;
  [[nodiscard]] const TruncatedU1& u1() const;

  [[nodiscard]] int link_dimension() const noexcept;
  [[nodiscard]] bool is_abelian() const noexcept;
  [[nodiscard]] int character_charge() const noexcept { return charge_; }
  /// Re χ(x) for finite groups.
  [[nodiscard]] double character(int element) const { return character_.at(element); }
  /// Identifier echoed into records, e.g. "Z2", "U1(n_max=2)".
  [[nodiscard]] std::string id() const;
  /// Name of the character convention, e.g. "defining(k=1)".
  [[nodiscard]] std::string character_label() const;

 private:
  std::variant<FiniteGroup, TruncatedU1> impl_;
  int charge_;
  std::vector<double> character_;
};

enum class LinkKind { kFiniteGroup, kTruncatedU1 };

/// Single-link operators used to assemble lattice Hamiltonians.
///
/// Permutations are stored as index maps: left_translations[g][x] = g·x and
/// right_translations[g][x] = x·g. For U(1), raising[i] is the basis index
/// reached by adding the character charge to the electric label, -1 when that
/// leaves the window; lowering is its inverse map.
struct LinkOperatorSet {
  LinkKind kind = LinkKind::kFiniteGroup;
  int dimension = 0;
  Eigen::MatrixXd laplacian;
  std::vector<std::vector<int>> left_translations;
  std::vector<std::vector<int>> right_translations;
  std::vector<int> inverse;
  int identity = 0;
  std::vector<int> raising;
  std::vector<int> lowering;
  std::vector<double> character_weights;
  double character_identity = 1.0;
  /// Laplacian commutes with both left and right translations.
  bool bi_invariant = true;
};

LinkOperatorSet link_operators(const GaugeStructure& structure);

/// Dense matrix with (P)[perm[x], x] = 1; entries with perm[x] < 0 are dropped.
Eigen::MatrixXd index_map_matrix(std::span<const int> perm);

}  // namespace latgauge
