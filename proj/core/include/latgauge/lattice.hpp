#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace latgauge {

/// A link traversed forwards (sign +1) or backwards (sign -1).
struct SignedLink {
  int link = 0;
  int sign = 1;
  friend bool operator==(const SignedLink&, const SignedLink&) = default;
};

/// A plaquette containing a link, with the orientation the link has in it.
struct PlaquetteIncidence {
  int plaquette = 0;
  int sign = 1;
  friend bool operator==(const PlaquetteIncidence&, const PlaquetteIncidence&) = default;
};

/// Periodic hypercubic spatial lattice in d = 2 or 3 dimensions.
///
/// Index convention (kIndexConvention):
///  - site = x0 + L0·(x1 + L1·x2), first coordinate fastest;
///  - link = direction·n0 + site, pointing from site to site + e_direction;
///  - plaquette = plane·n0 + site for planes (0,1), (0,2), (1,2) in that
///    order, traversed from its lowest corner s as
///    +μ(s), +ν(s+μ), -μ(s+ν), -ν(s).
class LatticeGeometry {
 public:
  static constexpr std::string_view kIndexConvention = "x-fastest/direction-major/corner-ccw/v1";

  explicit LatticeGeometry(std::vector<int> dims);

  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(dims_.size()); }
  [[nodiscard]] std::span<const int> dims() const noexcept { return dims_; }
  [[nodiscard]] int num_sites() const noexcept { return num_sites_; }
  [[nodiscard]] int num_links() const noexcept { return num_sites_ * dimension(); }
  [[nodiscard]] int num_plaquettes() const noexcept {
    return static_cast<int>(plaquettes_.size());
  }

  [[nodiscard]] std::vector<int> coordinates(int site) const;
  /// Site at the given coordinates, wrapped periodically.
  [[nodiscard]] int site_index(std::span<const int> coords) const;
  [[nodiscard]] int shift(int site, int direction, int steps = 1) const;

  [[nodiscard]] int link_index(int site, int direction) const noexcept {
    return direction * num_sites_ + site;
  }
  [[nodiscard]] int link_source(int link) const noexcept { return link % num_sites_; }
  [[nodiscard]] int link_direction(int link) const noexcept { return link / num_sites_; }
  [[nodiscard]] int link_target(int link) const {
    return shift(link_source(link), link_direction(link));
  }

  [[nodiscard]] const std::array<SignedLink, 4>& plaquette(int p) const;
  /// The 2d links touching a site; +1 for outgoing, -1 for incoming.
  [[nodiscard]] std::span<const SignedLink> incidence(int site) const;
  [[nodiscard]] std::span<const PlaquetteIncidence> coboundary(int link) const;
  /// Links in `direction` whose source has coordinate 0 along that direction.
  /// The signed flux through this cut is the electric winding number.
  [[nodiscard]] std::vector<int> cut_links(int direction) const;

  friend bool operator==(const LatticeGeometry& a, const LatticeGeometry& b) {
    return a.dims_ == b.dims_;
  }

 private:
  std::vector<int> dims_;
  int num_sites_ = 0;
  std::vector<std::array<SignedLink, 4>> plaquettes_;
  std::vector<SignedLink> incidence_;
  std::vector<int> coboundary_offsets_;
  std::vector<PlaquetteIncidence> coboundary_;
};

LatticeGeometry build_lattice(std::vector<int> dims);

/// Bounds-checked plaquette lookup (kIndex error on a bad index).
std::array<SignedLink, 4> plaquette_cycle(const LatticeGeometry& geom, int p);

}  // namespace latgauge
