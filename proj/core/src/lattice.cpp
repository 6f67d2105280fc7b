#include "latgauge/lattice.hpp"

#include <string>

#include "latgauge/error.hpp"

namespace latgauge {

LatticeGeometry::LatticeGeometry(std::vector<int> dims) : dims_(std::move(dims)) {
  const int d = dimension();
  if (d != 2 && d != 3) {
    throw Error(ErrorKind::kInvalidParameter,
                "lattice dimension must be 2 or 3, got " + std::to_string(d));
  }
  num_sites_ = 1;
  for (int i = 0; i < d; ++i) {
    if (dims_[i] < 2) {
      throw Error(ErrorKind::kDegenerateLattice,
                  "side length " + std::to_string(dims_[i]) + " in direction " +
                      std::to_string(i) + " is below 2");
    }
    num_sites_ *= dims_[i];
  }

  for (int mu = 0; mu < d; ++mu) {
    for (int nu = mu + 1; nu < d; ++nu) {
      for (int s = 0; s < num_sites_; ++s) {
        const int s_mu = shift(s, mu);
        const int s_nu = shift(s, nu);
        plaquettes_.push_back({SignedLink{link_index(s, mu), 1},
                               SignedLink{link_index(s_mu, nu), 1},
                               SignedLink{link_index(s_nu, mu), -1},
                               SignedLink{link_index(s, nu), -1}});
      }
    }
  }

  incidence_.reserve(static_cast<std::size_t>(num_sites_) * 2 * d);
  for (int s = 0; s < num_sites_; ++s) {
    for (int mu = 0; mu < d; ++mu) {
      incidence_.push_back({link_index(s, mu), 1});
      incidence_.push_back({link_index(shift(s, mu, -1), mu), -1});
    }
  }

  const int n1 = num_links();
  std::vector<std::vector<PlaquetteIncidence>> per_link(n1);
  for (int p = 0; p < num_plaquettes(); ++p) {
    for (const auto& sl : plaquettes_[p]) per_link[sl.link].push_back({p, sl.sign});
  }
  coboundary_offsets_.assign(n1 + 1, 0);
  for (int l = 0; l < n1; ++l) {
    coboundary_offsets_[l + 1] = coboundary_offsets_[l] + static_cast<int>(per_link[l].size());
    coboundary_.insert(coboundary_.end(), per_link[l].begin(), per_link[l].end());
  }
}

std::vector<int> LatticeGeometry::coordinates(int site) const {
  std::vector<int> c(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    c[i] = site % dims_[i];
    site /= dims_[i];
  }
  return c;
}

int LatticeGeometry::site_index(std::span<const int> coords) const {
  int index = 0;
  int stride = 1;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const int L = dims_[i];
    index += (((coords[i] % L) + L) % L) * stride;
    stride *= L;
  }
  return index;
}

int LatticeGeometry::shift(int site, int direction, int steps) const {
  auto c = coordinates(site);
  c[direction] += steps;
  return site_index(c);
}

const std::array<SignedLink, 4>& LatticeGeometry::plaquette(int p) const {
  return plaquettes_[p];
}

std::span<const SignedLink> LatticeGeometry::incidence(int site) const {
  const std::size_t per = 2 * dims_.size();
  return {incidence_.data() + per * site, per};
}

std::span<const PlaquetteIncidence> LatticeGeometry::coboundary(int link) const {
  return {coboundary_.data() + coboundary_offsets_[link],
          static_cast<std::size_t>(coboundary_offsets_[link + 1] - coboundary_offsets_[link])};
}

std::vector<int> LatticeGeometry::cut_links(int direction) const {
  std::vector<int> links;
  for (int s = 0; s < num_sites_; ++s) {
    if (coordinates(s)[direction] == 0) links.push_back(link_index(s, direction));
  }
  return links;
}

LatticeGeometry build_lattice(std::vector<int> dims) { return LatticeGeometry(std::move(dims)); }

std::array<SignedLink, 4> plaquette_cycle(const LatticeGeometry& geom, int p) {
  if (p < 0 || p >= geom.num_plaquettes()) {
    throw Error(ErrorKind::kIndex, "plaquette index " + std::to_string(p) + " out of range [0, " +
                                       std::to_string(geom.num_plaquettes()) + ")");
  }
  return geom.plaquette(p);
}

}  // namespace latgauge
