#pragma once

// Many-link product basis, the gauge-group action on it, and the Gauss-law
// sector (the gauge-invariant subspace).

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latgauge/group.hpp"
#include "latgauge/lattice.hpp"

namespace latgauge {

using StateCode = std::uint64_t;

/// Mixed-radix encoding of per-link labels, link 0 least significant.
class ProductBasis {
 public:
  ProductBasis(int link_dimension, int num_links);

  [[nodiscard]] std::uint64_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] int link_dimension() const noexcept { return link_dimension_; }
  [[nodiscard]] int num_links() const noexcept { return static_cast<int>(strides_.size()); }
  [[nodiscard]] std::uint64_t stride(int link) const noexcept { return strides_[link]; }

  [[nodiscard]] int label(StateCode code, int link) const noexcept {
    return static_cast<int>((code / strides_[link]) % static_cast<std::uint64_t>(link_dimension_));
  }
  [[nodiscard]] StateCode relabel(StateCode code, int link, int from, int to) const noexcept {
    return code - static_cast<std::uint64_t>(from) * strides_[link] +
           static_cast<std::uint64_t>(to) * strides_[link];
  }
  [[nodiscard]] StateCode encode(std::span<const int> labels) const;
  void decode(StateCode code, std::span<int> labels) const;
  [[nodiscard]] std::vector<int> decode(StateCode code) const;

 private:
  int link_dimension_;
  std::uint64_t dimension_ = 1;
  std::vector<std::uint64_t> strides_;
};

/// g_p per site, acting as U_ℓ → g_p U_ℓ g_q⁻¹ for ℓ = (p → q).
struct GroupGaugeTransformation {
  std::vector<int> site_elements;
};

/// exp(iα_p) per site; diagonal in the electric basis.
struct U1GaugeTransformation {
  std::vector<double> site_angles;
};

using GaugeTransformation = std::variant<GroupGaugeTransformation, U1GaugeTransformation>;

struct GaugeImage {
  StateCode state = 0;
  std::complex<double> phase{1.0, 0.0};
  bool clipped = false;
};

GaugeImage gauge_action(const LatticeGeometry& geom, const GaugeStructure& structure,
                        const ProductBasis& basis, StateCode state,
                        const GaugeTransformation& transformation);

/// Site-wise product (second ∘ first), so acting by the result equals acting
/// by `first` and then `second`.
GroupGaugeTransformation compose(const FiniteGroup& group, const GroupGaugeTransformation& second,
                                 const GroupGaugeTransformation& first);

/// Applies a transformation to a full-space vector: out[t(i)] = phase·in[i].
void apply_gauge_transformation(const LatticeGeometry& geom, const GaugeStructure& structure,
                                const ProductBasis& basis, const GaugeTransformation& t,
                                std::span<const std::complex<double>> in,
                                std::span<std::complex<double>> out);

/// Per-site signed sum of incident electric charges (outgoing minus incoming).
std::vector<int> charge_divergence(const LatticeGeometry& geom, const TruncatedU1& u1,
                                   const ProductBasis& basis, StateCode state);

/// Eigenvalue of the Gauss operator exp(iα·G_p) on an electric basis state.
std::complex<double> gauss_operator_eigenvalue(const LatticeGeometry& geom, const TruncatedU1& u1,
                                               const ProductBasis& basis, StateCode state,
                                               int site, double angle);

/// Net electric flux through the cut of each direction (U(1) only).
std::vector<int> electric_winding(const LatticeGeometry& geom, const TruncatedU1& u1,
                                  const ProductBasis& basis, StateCode state);

enum class ProjectorMode { kAuto, kExplicit, kImplicit };

std::string to_string(ProjectorMode mode);

struct SectorOptions {
  ProjectorMode mode = ProjectorMode::kAuto;
  /// Largest state count the explicit mode will materialize.
  std::uint64_t explicit_budget = std::uint64_t{1} << 24;
  /// Largest full space the implicit mode will work on.
  std::uint64_t implicit_budget = std::uint64_t{1} << 20;
  /// Static background charge per site (truncated U(1) only; empty = zero).
  std::vector<int> static_charges;
  /// Also restrict to zero electric winding through every cut (abelian only).
  bool zero_winding = false;
};

/// The gauge-invariant subspace of the product space.
///
/// Explicit mode stores an orthonormal basis: each basis vector is the
/// normalized uniform sum over one orbit of the (possibly enlarged) gauge
/// group. For truncated U(1) the orbits are single electric states with the
/// prescribed divergence. Implicit mode never enumerates the sector and
/// projects full-space vectors by local group averaging or by the diagonal
/// divergence filter.
class GaussSector {
 public:
  GaussSector(const LatticeGeometry& geom, const GaugeStructure& structure,
              const SectorOptions& options = {});

  [[nodiscard]] ProjectorMode mode() const noexcept { return mode_; }
  [[nodiscard]] std::uint64_t full_dimension() const noexcept { return basis_.dimension(); }
  [[nodiscard]] std::uint64_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const ProductBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geom_; }
  [[nodiscard]] const GaugeStructure& structure() const noexcept { return structure_; }
  [[nodiscard]] bool zero_winding() const noexcept { return zero_winding_; }
  [[nodiscard]] std::span<const int> static_charges() const noexcept { return charges_; }

  /// Explicit mode: basis states in sector vector a (amplitude 1/sqrt(size)).
  [[nodiscard]] std::span<const StateCode> orbit(std::size_t a) const;
  /// Explicit mode: index of the sector vector whose support contains state.
  [[nodiscard]] std::optional<std::size_t> locate(StateCode state) const;

  /// P·in on full-space vectors (both modes).
  void apply_projector(std::span<const double> in, std::span<double> out) const;
  void project_in_place(std::span<double> v) const;

  /// Explicit mode: full-space vector for sector coefficients.
  [[nodiscard]] std::vector<double> embed(std::span<const double> coefficients) const;
  /// Explicit mode: sector coefficients of a full-space vector.
  [[nodiscard]] std::vector<double> restrict_vector(std::span<const double> full) const;

 private:
  void check_implicit_budget(std::uint64_t budget) const;
  void build_group_orbits();
  void build_u1_states();
  void average_site(std::span<const double> in, std::span<double> out, int site) const;
  void average_cut(std::span<const double> in, std::span<double> out, int direction) const;
  [[nodiscard]] bool u1_admissible(StateCode state) const;

  LatticeGeometry geom_;
  GaugeStructure structure_;
  ProductBasis basis_;
  ProjectorMode mode_;
  std::uint64_t budget_;
  std::vector<int> charges_;
  bool zero_winding_;
  std::uint64_t dimension_ = 0;
  std::vector<std::uint64_t> orbit_offsets_;
  std::vector<StateCode> orbit_states_;
  std::vector<std::uint32_t> orbit_of_;
};

GaussSector gauss_projector(const LatticeGeometry& geom, const GaugeStructure& structure,
                            const SectorOptions& options = {});

/// Burnside count (1/|G_Γ|)·Σ_t |Fix(t)| computed link by link, without
/// enumerating basis states. With zero_winding the group is enlarged by a
/// shift of every cut (abelian groups only).
std::uint64_t sector_dimension(const LatticeGeometry& geom, const FiniteGroup& group,
                               bool zero_winding = false);

/// Visits every electric configuration in the window satisfying the given
/// site divergences (and zero winding when requested), in an order fixed by
/// the geometry. Returns the number visited.
std::uint64_t enumerate_u1_sector(const LatticeGeometry& geom, const TruncatedU1& u1,
                                  const ProductBasis& basis, std::span<const int> charges,
                                  bool zero_winding,
                                  const std::function<void(StateCode)>& visit);

}  // namespace latgauge
