#include "latgauge/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "latgauge/error.hpp"

namespace latgauge {

CouplingParams CouplingParams::from_g(double g) {
  CouplingParams c;
  c.g = g;
  c.electric_prefactor = g * g / 2.0;
  c.magnetic_prefactor = 1.0 / (g * g);
  c.validate();
  return c;
}

void CouplingParams::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw Error(ErrorKind::kInvalidParameter, "coupling g must be positive and finite");
  }
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidParameter, std::string(name) + " must be positive and finite");
    }
  };
  check(electric_prefactor, "electric_prefactor");
  check(magnetic_prefactor, "magnetic_prefactor");
}

// ---------------------------------------------------------------------------
// SparseOperator

SparseOperator::SparseOperator(std::uint64_t dimension, std::vector<std::uint64_t> row_offsets,
                               std::vector<std::uint64_t> columns, std::vector<double> values,
                               bool gauge_invariant)
    : dimension_(dimension),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)),
      gauge_invariant_(gauge_invariant) {
  if (row_offsets_.size() != dimension_ + 1 || columns_.size() != values_.size() ||
      row_offsets_.back() != values_.size()) {
    throw Error(ErrorKind::kInvalidParameter, "inconsistent compressed-row arrays");
  }
}

SparseOperator SparseOperator::from_triplets(std::uint64_t dimension, std::vector<Triplet> triplets,
                                             bool gauge_invariant) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::uint64_t> offsets(dimension + 1, 0);
  std::vector<std::uint64_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t i = 0;
  for (std::uint64_t r = 0; r < dimension; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      const auto c = triplets[i].col;
      double v = 0.0;
      while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) v += triplets[i++].value;
      if (v != 0.0) {
        cols.push_back(c);
        vals.push_back(v);
      }
    }
    offsets[r + 1] = vals.size();
  }
  if (i != triplets.size()) throw Error(ErrorKind::kIndex, "triplet row out of range");
  return SparseOperator(dimension, std::move(offsets), std::move(cols), std::move(vals), gauge_invariant);
}

SparseOperator SparseOperator::from_dense(const Eigen::MatrixXd& dense, bool gauge_invariant) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        t.push_back({static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), dense(i, j)});
      }
    }
  }
  return from_triplets(static_cast<std::uint64_t>(dense.rows()), std::move(t), gauge_invariant);
}

SparseOperator SparseOperator::diagonal(std::span<const double> entries, bool gauge_invariant) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < entries.size(); ++i) t.push_back({i, i, entries[i]});
  return from_triplets(entries.size(), std::move(t), gauge_invariant);
}

std::span<const std::uint64_t> SparseOperator::row_columns(std::uint64_t row) const {
  return {columns_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
}

std::span<const double> SparseOperator::row_values(std::uint64_t row) const {
  return {values_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
}

void SparseOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != dimension_ || out.size() != dimension_) {
    throw Error(ErrorKind::kInvalidParameter, "operator/vector dimension mismatch");
  }
  for (std::uint64_t r = 0; r < dimension_; ++r) {
    double acc = 0.0;
    for (auto k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) acc += values_[k] * in[columns_[k]];
    out[r] = acc;
  }
}

std::vector<double> SparseOperator::apply(std::span<const double> in) const {
  std::vector<double> out(dimension_);
  apply(in, out);
  return out;
}

Eigen::MatrixXd SparseOperator::to_dense(std::uint64_t cap) const {
  if (dimension_ > cap) {
    throw Error(ErrorKind::kResource, "dense copy of a " + std::to_string(dimension_) +
                                          "-dimensional operator exceeds cap " + std::to_string(cap));
  }
  const auto n = static_cast<Eigen::Index>(dimension_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::uint64_t r = 0; r < dimension_; ++r) {
    for (auto k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(columns_[k])) += values_[k];
    }
  }
  return m;
}

SparseOperator SparseOperator::scaled(double factor) const {
  SparseOperator out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (a.dimension_ != b.dimension_) throw Error(ErrorKind::kInvalidParameter, "operator dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (const SparseOperator* op : {&a, &b}) {
    for (std::uint64_t r = 0; r < op->dimension_; ++r) {
      for (auto k = op->row_offsets_[r]; k < op->row_offsets_[r + 1]; ++k) {
        t.push_back({r, op->columns_[k], op->values_[k]});
      }
    }
  }
  return SparseOperator::from_triplets(a.dimension_, std::move(t),
                                       a.gauge_invariant_ && b.gauge_invariant_);
}

void SparseOperator::write_coordinate(std::ostream& out) const {
  char buffer[64];
  for (std::uint64_t r = 0; r < dimension_; ++r) {
    for (auto k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      std::snprintf(buffer, sizeof buffer, "%.17g", values_[k]);
      out << r << ' ' << columns_[k] << ' ' << buffer << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// LatticeHamiltonian

LatticeHamiltonian::LatticeHamiltonian(LatticeGeometry geom, LinkOperatorSet links,
                                       CouplingParams coupling)
    : geom_(std::move(geom)),
      links_(std::move(links)),
      coupling_(coupling),
      basis_(links_.dimension, geom_.num_links()) {
  coupling_.validate();
  const int d = links_.dimension;
  laplacian_columns_.resize(d);
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      const double v = links_.laplacian(y, x);
      if (v != 0.0) laplacian_columns_[x].emplace_back(y, v);
    }
  }
}

void LatticeHamiltonian::electric_column(StateCode state, double scale,
                                         std::vector<MatrixEntry>& out) const {
  double diag = 0.0;
  for (int l = 0; l < geom_.num_links(); ++l) {
    const int x = basis_.label(state, l);
    for (const auto& [y, v] : laplacian_columns_[x]) {
      if (y == x) {
        diag += v;
      } else {
        out.push_back({basis_.relabel(state, l, x, y), scale * v});
      }
    }
  }
  if (diag != 0.0) out.push_back({state, scale * diag});
}

int LatticeHamiltonian::holonomy(StateCode state, int plaquette) const {
  int h = links_.identity;
  for (const auto& sl : geom_.plaquette(plaquette)) {
    int u = basis_.label(state, sl.link);
    if (sl.sign < 0) u = links_.inverse[u];
    h = links_.right_translations[u][h];
  }
  return h;
}

// Adds amplitude·W_s|state⟩ and amplitude·W_s†|state⟩, where W_s raises the
// electric label along forward links and lowers it along backward links.
void LatticeHamiltonian::holonomy_shift(StateCode state, int plaquette, double amplitude,
                                        std::vector<MatrixEntry>& out) const {
  for (int direction : {1, -1}) {
    StateCode target = state;
    bool inside = true;
    for (const auto& sl : geom_.plaquette(plaquette)) {
      const int x = basis_.label(target, sl.link);
      const int y = (sl.sign * direction > 0) ? links_.raising[x] : links_.lowering[x];
      if (y < 0) {
        inside = false;
        break;
      }
      target = basis_.relabel(target, sl.link, x, y);
    }
    if (inside) out.push_back({target, amplitude});
  }
}

void LatticeHamiltonian::magnetic_column(StateCode state, double scale,
                                         std::vector<MatrixEntry>& out) const {
  const double c = links_.character_identity;
  if (links_.kind == LinkKind::kFiniteGroup) {
    double diag = 0.0;
    for (int p = 0; p < geom_.num_plaquettes(); ++p) {
      diag += c - links_.character_weights[holonomy(state, p)];
    }
    if (diag != 0.0) out.push_back({state, scale * diag});
    return;
  }
  out.push_back({state, scale * c * geom_.num_plaquettes()});
  for (int p = 0; p < geom_.num_plaquettes(); ++p) holonomy_shift(state, p, -0.5 * scale, out);
}

void LatticeHamiltonian::column(StateCode state, HamiltonianTerms terms,
                                std::vector<MatrixEntry>& out) const {
  out.clear();
  switch (terms) {
    case HamiltonianTerms::kElectric:
      electric_column(state, 1.0, out);
      break;
    case HamiltonianTerms::kMagnetic:
      magnetic_column(state, 1.0, out);
      break;
    case HamiltonianTerms::kFull:
      electric_column(state, coupling_.electric_prefactor, out);
      magnetic_column(state, coupling_.magnetic_prefactor, out);
      break;
  }
}

void LatticeHamiltonian::plaquette_column(StateCode state, int plaquette,
                                          std::vector<MatrixEntry>& out) const {
  out.clear();
  if (links_.kind == LinkKind::kFiniteGroup) {
    const double v = links_.character_weights[holonomy(state, plaquette)];
    if (v != 0.0) out.push_back({state, v});
    return;
  }
  holonomy_shift(state, plaquette, 0.5, out);
}

void LatticeHamiltonian::apply(std::span<const double> in, std::span<double> out) const {
  const auto dim = basis_.dimension();
  if (in.size() != dim || out.size() != dim) {
    throw Error(ErrorKind::kInvalidParameter, "Hamiltonian/vector dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<MatrixEntry> entries;
  for (StateCode s = 0; s < dim; ++s) {
    if (in[s] == 0.0) continue;
    column(s, HamiltonianTerms::kFull, entries);
    for (const auto& e : entries) out[e.target] += e.value * in[s];
  }
}

namespace {

template <class ColumnFn>
SparseOperator build_symmetric(std::uint64_t dim, bool gauge_invariant, ColumnFn&& fill_column) {
  std::vector<std::uint64_t> offsets(dim + 1, 0);
  std::vector<std::uint64_t> cols;
  std::vector<double> vals;
  std::vector<MatrixEntry> entries;
  for (StateCode s = 0; s < dim; ++s) {
    fill_column(s, entries);
    std::sort(entries.begin(), entries.end(),
              [](const MatrixEntry& a, const MatrixEntry& b) { return a.target < b.target; });
    for (std::size_t i = 0; i < entries.size();) {
      const auto t = entries[i].target;
      double v = 0.0;
      while (i < entries.size() && entries[i].target == t) v += entries[i++].value;
      if (v != 0.0) {
        cols.push_back(t);
        vals.push_back(v);
      }
    }
    offsets[s + 1] = vals.size();
  }
  // Symmetric operators: column s equals row s.
  return SparseOperator(dim, std::move(offsets), std::move(cols), std::move(vals), gauge_invariant);
}

}  // namespace

SparseOperator LatticeHamiltonian::full_operator(HamiltonianTerms terms) const {
  return build_symmetric(basis_.dimension(), gauge_invariant(),
                         [&](StateCode s, std::vector<MatrixEntry>& e) { column(s, terms, e); });
}

SparseOperator LatticeHamiltonian::sector_operator(const GaussSector& sector,
                                                   HamiltonianTerms terms) const {
  if (sector.mode() != ProjectorMode::kExplicit) {
    throw Error(ErrorKind::kInvalidParameter, "sector_operator needs an explicit Gauss sector");
  }
  if (!gauge_invariant()) {
    throw Error(ErrorKind::kUnsupportedStructure,
                "link Laplacian is not bi-invariant; the Hamiltonian does not descend to the sector");
  }
  const auto dim = sector.dimension();
  std::vector<Triplet> triplets;
  std::vector<MatrixEntry> entries;
  for (std::size_t a = 0; a < dim; ++a) {
    const auto orbit_a = sector.orbit(a);
    const double size_a = static_cast<double>(orbit_a.size());
    column(orbit_a.front(), terms, entries);
    for (const auto& e : entries) {
      const auto b = sector.locate(e.target);
      if (!b) throw Error(ErrorKind::kUnsupportedStructure, "operator leaves the Gauss sector");
      const double size_b = static_cast<double>(sector.orbit(*b).size());
      // ⟨o_b|H|o_a⟩ = sqrt(|o_a|/|o_b|) · Σ_{i∈o_b} H_{i,r_a}
      const double v = e.value * std::sqrt(size_a / size_b);
      triplets.push_back({*b, a, 0.5 * v});
      triplets.push_back({a, *b, 0.5 * v});
    }
  }
  return SparseOperator::from_triplets(dim, std::move(triplets), true);
}

SparseOperator electric_term(const LatticeGeometry& geom, const LinkOperatorSet& links) {
  const LatticeHamiltonian h(geom, links, CouplingParams{});
  return h.full_operator(HamiltonianTerms::kElectric);
}

SparseOperator plaquette_operator(const LatticeGeometry& geom, const LinkOperatorSet& links,
                                  int plaquette) {
  (void)plaquette_cycle(geom, plaquette);
  const LatticeHamiltonian h(geom, links, CouplingParams{});
  return build_symmetric(h.basis().dimension(), true, [&](StateCode s, std::vector<MatrixEntry>& e) {
    h.plaquette_column(s, plaquette, e);
  });
}

SparseOperator magnetic_term(const LatticeGeometry& geom, const LinkOperatorSet& links) {
  const LatticeHamiltonian h(geom, links, CouplingParams{});
  return h.full_operator(HamiltonianTerms::kMagnetic);
}

SparseOperator assemble(const LatticeGeometry& geom, const LinkOperatorSet& links,
                        const CouplingParams& coupling) {
  const LatticeHamiltonian h(geom, links, coupling);
  return h.full_operator(HamiltonianTerms::kFull);
}

SparseOperator restrict_to_sector(const SparseOperator& full, const GaussSector& sector) {
  if (sector.mode() != ProjectorMode::kExplicit) {
    throw Error(ErrorKind::kInvalidParameter, "restrict_to_sector needs an explicit Gauss sector");
  }
  if (full.dimension() != sector.full_dimension()) {
    throw Error(ErrorKind::kInvalidParameter, "operator and sector dimensions differ");
  }
  std::vector<Triplet> triplets;
  for (std::size_t a = 0; a < sector.dimension(); ++a) {
    const auto orbit_a = sector.orbit(a);
    const double w_a = 1.0 / std::sqrt(static_cast<double>(orbit_a.size()));
    for (auto j : orbit_a) {
      const auto cols = full.row_columns(j);
      const auto vals = full.row_values(j);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto b = sector.locate(cols[k]);
        if (!b) continue;
        const double w_b = 1.0 / std::sqrt(static_cast<double>(sector.orbit(*b).size()));
        triplets.push_back({a, *b, w_a * w_b * vals[k]});
      }
    }
  }
  return SparseOperator::from_triplets(sector.dimension(), std::move(triplets), full.gauge_invariant());
}

}  // namespace latgauge
