#include "latgauge/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "latgauge/error.hpp"

namespace latgauge {

ProductBasis::ProductBasis(int link_dimension, int num_links) : link_dimension_(link_dimension) {
  if (link_dimension < 1 || num_links < 0) {
    throw Error(ErrorKind::kInvalidParameter, "product basis needs positive link dimension");
  }
  strides_.resize(num_links);
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
  for (int l = 0; l < num_links; ++l) {
    strides_[l] = dimension_;
    if (dimension_ > kLimit / static_cast<std::uint64_t>(link_dimension)) {
      throw Error(ErrorKind::kResource, "product basis dimension " + std::to_string(link_dimension) +
                                            "^" + std::to_string(num_links) +
                                            " does not fit a 62-bit state code");
    }
    dimension_ *= static_cast<std::uint64_t>(link_dimension);
  }
}

StateCode ProductBasis::encode(std::span<const int> labels) const {
  StateCode code = 0;
  for (std::size_t l = 0; l < strides_.size(); ++l) {
    code += static_cast<std::uint64_t>(labels[l]) * strides_[l];
  }
  return code;
}

void ProductBasis::decode(StateCode code, std::span<int> labels) const {
  const auto d = static_cast<std::uint64_t>(link_dimension_);
  for (std::size_t l = 0; l < strides_.size(); ++l) {
    labels[l] = static_cast<int>(code % d);
    code /= d;
  }
}

std::vector<int> ProductBasis::decode(StateCode code) const {
  std::vector<int> labels(strides_.size());
  decode(code, labels);
  return labels;
}

// ---------------------------------------------------------------------------
// Gauge action

GaugeImage gauge_action(const LatticeGeometry& geom, const GaugeStructure& structure,
                        const ProductBasis& basis, StateCode state,
                        const GaugeTransformation& transformation) {
  GaugeImage image;
  image.state = state;
  if (const auto* t = std::get_if<GroupGaugeTransformation>(&transformation)) {
    const auto& g = structure.group();
    if (static_cast<int>(t->site_elements.size()) != geom.num_sites()) {
      throw Error(ErrorKind::kInvalidParameter, "gauge transformation needs one element per site");
    }
    StateCode out = state;
    for (int l = 0; l < geom.num_links(); ++l) {
      const int gp = t->site_elements[geom.link_source(l)];
      const int gq = t->site_elements[geom.link_target(l)];
      const int x = basis.label(state, l);
      const int y = g.multiply(g.multiply(gp, x), g.inverse(gq));
      out = basis.relabel(out, l, x, y);
    }
    image.state = out;
    return image;
  }
  const auto& t = std::get<U1GaugeTransformation>(transformation);
  const auto& u1 = structure.u1();
  if (static_cast<int>(t.site_angles.size()) != geom.num_sites()) {
    throw Error(ErrorKind::kInvalidParameter, "gauge transformation needs one angle per site");
  }
  const auto div = charge_divergence(geom, u1, basis, state);
  double phase = 0.0;
  for (int p = 0; p < geom.num_sites(); ++p) phase += t.site_angles[p] * div[p];
  image.phase = std::polar(1.0, phase);
  return image;
}

GroupGaugeTransformation compose(const FiniteGroup& group, const GroupGaugeTransformation& second,
                                 const GroupGaugeTransformation& first) {
  GroupGaugeTransformation out;
  out.site_elements.resize(first.site_elements.size());
  for (std::size_t p = 0; p < first.site_elements.size(); ++p) {
    out.site_elements[p] = group.multiply(second.site_elements[p], first.site_elements[p]);
  }
  return out;
}

void apply_gauge_transformation(const LatticeGeometry& geom, const GaugeStructure& structure,
                                const ProductBasis& basis, const GaugeTransformation& t,
                                std::span<const std::complex<double>> in,
                                std::span<std::complex<double>> out) {
  const auto dim = basis.dimension();
  std::fill(out.begin(), out.end(), std::complex<double>{});
  for (StateCode i = 0; i < dim; ++i) {
    const auto image = gauge_action(geom, structure, basis, i, t);
    out[image.state] += image.phase * in[i];
  }
}

std::vector<int> charge_divergence(const LatticeGeometry& geom, const TruncatedU1& u1,
                                   const ProductBasis& basis, StateCode state) {
  std::vector<int> div(geom.num_sites(), 0);
  for (int p = 0; p < geom.num_sites(); ++p) {
    for (const auto& sl : geom.incidence(p)) div[p] += sl.sign * u1.charge(basis.label(state, sl.link));
  }
  return div;
}

std::complex<double> gauss_operator_eigenvalue(const LatticeGeometry& geom, const TruncatedU1& u1,
                                               const ProductBasis& basis, StateCode state,
                                               int site, double angle) {
  int div = 0;
  for (const auto& sl : geom.incidence(site)) div += sl.sign * u1.charge(basis.label(state, sl.link));
  return std::polar(1.0, angle * div);
}

std::vector<int> electric_winding(const LatticeGeometry& geom, const TruncatedU1& u1,
                                  const ProductBasis& basis, StateCode state) {
  std::vector<int> w(geom.dimension(), 0);
  for (int mu = 0; mu < geom.dimension(); ++mu) {
    for (int l : geom.cut_links(mu)) w[mu] += u1.charge(basis.label(state, l));
  }
  return w;
}

std::string to_string(ProjectorMode mode) {
  switch (mode) {
    case ProjectorMode::kAuto: return "auto";
    case ProjectorMode::kExplicit: return "explicit";
    case ProjectorMode::kImplicit: return "implicit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// U(1) constraint enumeration

std::uint64_t enumerate_u1_sector(const LatticeGeometry& geom, const TruncatedU1& u1,
                                  const ProductBasis& basis, std::span<const int> charges,
                                  bool zero_winding,
                                  const std::function<void(StateCode)>& visit) {
  struct Term {
    int constraint;
    int coef;
  };
  const int n1 = geom.num_links();
  const int n_max = u1.n_max();
  std::vector<int> target;
  std::vector<int> size;
  std::vector<std::vector<Term>> terms_of_link(n1);
  for (int p = 0; p < geom.num_sites(); ++p) {
    const int c = static_cast<int>(target.size());
    target.push_back(charges.empty() ? 0 : charges[p]);
    size.push_back(0);
    for (const auto& sl : geom.incidence(p)) {
      terms_of_link[sl.link].push_back({c, sl.sign});
      ++size[c];
    }
  }
  if (zero_winding) {
    for (int mu = 0; mu < geom.dimension(); ++mu) {
      const int c = static_cast<int>(target.size());
      target.push_back(0);
      size.push_back(0);
      for (int l : geom.cut_links(mu)) {
        terms_of_link[l].push_back({c, 1});
        ++size[c];
      }
    }
  }
  const auto num_constraints = target.size();

  // Static elimination order: always take the link closest to closing one of
  // its constraints, so that most links end up forced.
  std::vector<int> order;
  std::vector<int> forced_by;
  {
    std::vector<int> remaining = size;
    std::vector<bool> used(n1, false);
    for (int pos = 0; pos < n1; ++pos) {
      int best = -1;
      int best_score = std::numeric_limits<int>::max();
      for (int l = 0; l < n1; ++l) {
        if (used[l]) continue;
        int score = std::numeric_limits<int>::max() - 1;
        for (const auto& t : terms_of_link[l]) score = std::min(score, remaining[t.constraint]);
        if (score < best_score) {
          best_score = score;
          best = l;
        }
      }
      used[best] = true;
      order.push_back(best);
      int forced = -1;
      for (const auto& t : terms_of_link[best]) {
        if (remaining[t.constraint] == 1 && forced < 0) forced = t.constraint;
        --remaining[t.constraint];
      }
      forced_by.push_back(forced);
    }
  }

  std::vector<int> partial(num_constraints, 0);
  std::vector<int> remaining = size;
  std::uint64_t count = 0;

  auto assign = [&](int link, int value) {
    bool ok = true;
    for (const auto& t : terms_of_link[link]) {
      partial[t.constraint] += t.coef * value;
      const int left = --remaining[t.constraint];
      const int gap = target[t.constraint] - partial[t.constraint];
      if (left == 0 ? gap != 0 : std::abs(gap) > left * n_max) ok = false;
    }
    return ok;
  };
  auto unassign = [&](int link, int value) {
    for (const auto& t : terms_of_link[link]) {
      partial[t.constraint] -= t.coef * value;
      ++remaining[t.constraint];
    }
  };

  std::function<void(int, StateCode)> descend = [&](int pos, StateCode code) {
    if (pos == n1) {
      ++count;
      visit(code);
      return;
    }
    const int link = order[pos];
    int lo = -n_max;
    int hi = n_max;
    if (const int c = forced_by[pos]; c >= 0) {
      int coef = 0;
      for (const auto& t : terms_of_link[link]) {
        if (t.constraint == c) coef = t.coef;
      }
      const int v = (target[c] - partial[c]) * coef;
      if (v < -n_max || v > n_max) return;
      lo = hi = v;
    }
    for (int v = lo; v <= hi; ++v) {
      if (assign(link, v)) {
        descend(pos + 1, code + static_cast<std::uint64_t>(u1.index(v)) * basis.stride(link));
      }
      unassign(link, v);
    }
  };
  descend(0, 0);
  return count;
}

// ---------------------------------------------------------------------------
// Gauss sector

namespace {

// Code of the state obtained by acting with h at a single site.
StateCode act_at_site(const LatticeGeometry& geom, const FiniteGroup& g, const ProductBasis& basis,
                      StateCode code, int site, int h) {
  StateCode out = code;
  for (const auto& sl : geom.incidence(site)) {
    const int x = basis.label(code, sl.link);
    const int y = sl.sign > 0 ? g.multiply(h, x) : g.multiply(x, g.inverse(h));
    out = basis.relabel(out, sl.link, x, y);
  }
  return out;
}

StateCode act_on_cut(const FiniteGroup& g, const ProductBasis& basis, std::span<const int> cut,
                     StateCode code, int h) {
  StateCode out = code;
  for (int l : cut) {
    const int x = basis.label(code, l);
    out = basis.relabel(out, l, x, g.multiply(x, h));
  }
  return out;
}

}  // namespace

GaussSector::GaussSector(const LatticeGeometry& geom, const GaugeStructure& structure,
                         const SectorOptions& options)
    : geom_(geom),
      structure_(structure),
      basis_(structure.link_dimension(), geom.num_links()),
      mode_(options.mode),
      budget_(options.explicit_budget),
      charges_(options.static_charges),
      zero_winding_(options.zero_winding) {
  if (!charges_.empty() && static_cast<int>(charges_.size()) != geom.num_sites()) {
    throw Error(ErrorKind::kInvalidParameter, "static charges need one entry per site");
  }
  const bool nonzero_charge = std::any_of(charges_.begin(), charges_.end(), [](int q) { return q != 0; });
  if (structure.is_finite_group()) {
    if (nonzero_charge) {
      throw Error(ErrorKind::kUnsupportedStructure,
                  "static charges are only supported for truncated U(1)");
    }
    if (zero_winding_ && !structure.is_abelian()) {
      throw Error(ErrorKind::kUnsupportedStructure, "winding sectors need an abelian group");
    }
    if (mode_ == ProjectorMode::kAuto) {
      mode_ = basis_.dimension() <= budget_ ? ProjectorMode::kExplicit : ProjectorMode::kImplicit;
    }
    if (mode_ == ProjectorMode::kExplicit) {
      build_group_orbits();
    } else {
      check_implicit_budget(options.implicit_budget);
      dimension_ = sector_dimension(geom_, structure_.group(), zero_winding_);
    }
  } else {
    if (mode_ == ProjectorMode::kAuto) mode_ = ProjectorMode::kExplicit;
    if (mode_ == ProjectorMode::kExplicit) {
      build_u1_states();
    } else {
      check_implicit_budget(options.implicit_budget);
      dimension_ = enumerate_u1_sector(geom_, structure_.u1(), basis_, charges_, zero_winding_,
                                       [](StateCode) {});
    }
  }
}

void GaussSector::check_implicit_budget(std::uint64_t budget) const {
  if (basis_.dimension() > budget) {
    throw Error(ErrorKind::kResource, "implicit Gauss projector needs full-space vectors of " +
                                          std::to_string(basis_.dimension()) + " states (budget " +
                                          std::to_string(budget) + ")");
  }
}

void GaussSector::build_group_orbits() {
  const auto dim = basis_.dimension();
  if (dim > budget_) {
    throw Error(ErrorKind::kResource,
                "explicit Gauss projector needs " + std::to_string(dim) + " states (budget " +
                    std::to_string(budget_) + "); use implicit mode");
  }
  const auto& g = structure_.group();
  std::vector<std::vector<int>> cuts;
  if (zero_winding_) {
    for (int mu = 0; mu < geom_.dimension(); ++mu) cuts.push_back(geom_.cut_links(mu));
  }
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  orbit_of_.assign(dim, kUnset);
  orbit_offsets_.assign(1, 0);
  orbit_states_.reserve(dim);
  std::vector<StateCode> frontier;
  for (StateCode start = 0; start < dim; ++start) {
    if (orbit_of_[start] != kUnset) continue;
    const auto id = static_cast<std::uint32_t>(orbit_offsets_.size() - 1);
    const auto begin = orbit_states_.size();
    orbit_of_[start] = id;
    orbit_states_.push_back(start);
    frontier.assign(1, start);
    auto reach = [&](StateCode next) {
      if (orbit_of_[next] == kUnset) {
        orbit_of_[next] = id;
        orbit_states_.push_back(next);
        frontier.push_back(next);
      }
    };
    while (!frontier.empty()) {
      const StateCode s = frontier.back();
      frontier.pop_back();
      for (int p = 0; p < geom_.num_sites(); ++p) {
        for (int h : g.generators()) reach(act_at_site(geom_, g, basis_, s, p, h));
      }
      for (const auto& cut : cuts) {
        for (int h : g.generators()) reach(act_on_cut(g, basis_, cut, s, h));
      }
    }
    std::sort(orbit_states_.begin() + static_cast<std::ptrdiff_t>(begin), orbit_states_.end());
    orbit_offsets_.push_back(orbit_states_.size());
  }
  dimension_ = orbit_offsets_.size() - 1;
}

void GaussSector::build_u1_states() {
  orbit_states_.clear();
  const auto count = enumerate_u1_sector(geom_, structure_.u1(), basis_, charges_, zero_winding_,
                                         [&](StateCode s) {
                                           if (orbit_states_.size() >= budget_) {
                                             throw Error(ErrorKind::kResource,
                                                         "U(1) sector exceeds the explicit budget of " +
                                                             std::to_string(budget_) + " states");
                                           }
                                           orbit_states_.push_back(s);
                                         });
  std::sort(orbit_states_.begin(), orbit_states_.end());
  dimension_ = count;
  orbit_offsets_.resize(count + 1);
  for (std::uint64_t a = 0; a <= count; ++a) orbit_offsets_[a] = a;
}

std::span<const StateCode> GaussSector::orbit(std::size_t a) const {
  if (mode_ != ProjectorMode::kExplicit) {
    throw Error(ErrorKind::kInvalidParameter, "sector orbits are only stored in explicit mode");
  }
  return {orbit_states_.data() + orbit_offsets_[a], orbit_offsets_[a + 1] - orbit_offsets_[a]};
}

std::optional<std::size_t> GaussSector::locate(StateCode state) const {
  if (mode_ != ProjectorMode::kExplicit) {
    throw Error(ErrorKind::kInvalidParameter, "sector lookup needs explicit mode");
  }
  if (structure_.is_finite_group()) {
    if (state >= orbit_of_.size()) return std::nullopt;
    return orbit_of_[state];
  }
  auto it = std::lower_bound(orbit_states_.begin(), orbit_states_.end(), state);
  if (it == orbit_states_.end() || *it != state) return std::nullopt;
  return static_cast<std::size_t>(it - orbit_states_.begin());
}

bool GaussSector::u1_admissible(StateCode state) const {
  const auto& u1 = structure_.u1();
  const auto div = charge_divergence(geom_, u1, basis_, state);
  for (int p = 0; p < geom_.num_sites(); ++p) {
    if (div[p] != (charges_.empty() ? 0 : charges_[p])) return false;
  }
  if (zero_winding_) {
    for (int w : electric_winding(geom_, u1, basis_, state)) {
      if (w != 0) return false;
    }
  }
  return true;
}

namespace {

// Visits every basis state in code order with its decoded labels, updating the
// labels as an odometer instead of dividing.
template <class Fn>
void sweep_states(const ProductBasis& basis, Fn&& fn) {
  const int n1 = basis.num_links();
  const int d = basis.link_dimension();
  std::vector<int> labels(n1, 0);
  const auto dim = basis.dimension();
  for (StateCode code = 0; code < dim; ++code) {
    fn(code, labels);
    for (int l = 0; l < n1; ++l) {
      if (++labels[l] < d) break;
      labels[l] = 0;
    }
  }
}

}  // namespace

void GaussSector::average_site(std::span<const double> in, std::span<double> out, int site) const {
  const auto& g = structure_.group();
  const int order = g.order();
  const double weight = 1.0 / order;
  const auto incident = geom_.incidence(site);
  // shifted[h][slot][x]: label of incident link `slot` after acting with h
  std::vector<std::vector<std::vector<int>>> shifted(order);
  for (int h = 0; h < order; ++h) {
    for (const auto& sl : incident) {
      std::vector<int> row(order);
      for (int x = 0; x < order; ++x) row[x] = sl.sign > 0 ? g.multiply(h, x) : g.multiply(x, g.inverse(h));
      shifted[h].push_back(std::move(row));
    }
  }
  sweep_states(basis_, [&](StateCode code, const std::vector<int>& labels) {
    double acc = 0.0;
    for (int h = 0; h < order; ++h) {
      StateCode image = code;
      for (std::size_t slot = 0; slot < incident.size(); ++slot) {
        const int l = incident[slot].link;
        image = basis_.relabel(image, l, labels[l], shifted[h][slot][labels[l]]);
      }
      acc += in[image];
    }
    out[code] = weight * acc;
  });
}

void GaussSector::average_cut(std::span<const double> in, std::span<double> out, int direction) const {
  const auto& g = structure_.group();
  const int order = g.order();
  const auto cut = geom_.cut_links(direction);
  const double weight = 1.0 / order;
  sweep_states(basis_, [&](StateCode code, const std::vector<int>& labels) {
    double acc = 0.0;
    for (int h = 0; h < order; ++h) {
      StateCode image = code;
      for (int l : cut) image = basis_.relabel(image, l, labels[l], g.multiply(labels[l], h));
      acc += in[image];
    }
    out[code] = weight * acc;
  });
}

void GaussSector::apply_projector(std::span<const double> in, std::span<double> out) const {
  const auto dim = basis_.dimension();
  if (in.size() != dim || out.size() != dim) {
    throw Error(ErrorKind::kInvalidParameter, "projector vectors must have full dimension");
  }
  if (mode_ == ProjectorMode::kExplicit) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < dimension_; ++a) {
      const auto states = orbit(a);
      double mean = 0.0;
      for (auto s : states) mean += in[s];
      mean /= static_cast<double>(states.size());
      for (auto s : states) out[s] = mean;
    }
    return;
  }
  if (!structure_.is_finite_group()) {
    for (StateCode i = 0; i < dim; ++i) out[i] = u1_admissible(i) ? in[i] : 0.0;
    return;
  }
  std::vector<double> buffer(in.begin(), in.end());
  std::vector<double> next(dim);
  for (int p = 0; p < geom_.num_sites(); ++p) {
    average_site(buffer, next, p);
    buffer.swap(next);
  }
  if (zero_winding_) {
    for (int mu = 0; mu < geom_.dimension(); ++mu) {
      average_cut(buffer, next, mu);
      buffer.swap(next);
    }
  }
  std::copy(buffer.begin(), buffer.end(), out.begin());
}

void GaussSector::project_in_place(std::span<double> v) const {
  std::vector<double> tmp(v.size());
  apply_projector(v, tmp);
  std::copy(tmp.begin(), tmp.end(), v.begin());
}

std::vector<double> GaussSector::embed(std::span<const double> coefficients) const {
  if (coefficients.size() != dimension_) {
    throw Error(ErrorKind::kInvalidParameter, "sector coefficient vector has wrong size");
  }
  std::vector<double> full(basis_.dimension(), 0.0);
  for (std::size_t a = 0; a < dimension_; ++a) {
    const auto states = orbit(a);
    const double amp = coefficients[a] / std::sqrt(static_cast<double>(states.size()));
    for (auto s : states) full[s] = amp;
  }
  return full;
}

std::vector<double> GaussSector::restrict_vector(std::span<const double> full) const {
  std::vector<double> coeffs(dimension_, 0.0);
  for (std::size_t a = 0; a < dimension_; ++a) {
    const auto states = orbit(a);
    double acc = 0.0;
    for (auto s : states) acc += full[s];
    coeffs[a] = acc / std::sqrt(static_cast<double>(states.size()));
  }
  return coeffs;
}

GaussSector gauss_projector(const LatticeGeometry& geom, const GaugeStructure& structure,
                            const SectorOptions& options) {
  return GaussSector(geom, structure, options);
}

std::uint64_t sector_dimension(const LatticeGeometry& geom, const FiniteGroup& group,
                               bool zero_winding) {
  if (zero_winding && !group.is_abelian()) {
    throw Error(ErrorKind::kUnsupportedStructure, "winding sectors need an abelian group");
  }
  const int order = group.order();
  const int n0 = geom.num_sites();
  const int n1 = geom.num_links();
  const int d = geom.dimension();
  const int factors = n0 + (zero_winding ? d : 0);
  const double log_terms = factors * std::log2(static_cast<double>(order));
  if (log_terms > 28.0 || n1 * std::log2(static_cast<double>(order)) > 120.0) {
    throw Error(ErrorKind::kResource, "Burnside enumeration too large for this lattice");
  }

  // fix[a][b] = #{x : a·x·b⁻¹ = x}
  std::vector<int> fix(static_cast<std::size_t>(order) * order, 0);
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      int count = 0;
      for (int x = 0; x < order; ++x) {
        if (group.multiply(group.multiply(a, x), group.inverse(b)) == x) ++count;
      }
      fix[static_cast<std::size_t>(a) * order + b] = count;
    }
  }
  std::vector<int> cut_direction(n1, -1);
  if (zero_winding) {
    for (int mu = 0; mu < d; ++mu) {
      for (int l : geom.cut_links(mu)) cut_direction[l] = mu;
    }
  }

  __extension__ using Wide = unsigned __int128;
  Wide total = 0;
  std::vector<int> t(factors, 0);
  while (true) {
    Wide product = 1;
    for (int l = 0; l < n1 && product != 0; ++l) {
      const int a = t[geom.link_source(l)];
      const int b = t[geom.link_target(l)];
      int count = 0;
      if (cut_direction[l] >= 0) {
        // abelian: a·x·b⁻¹·c = x  ⇔  a·b⁻¹·c = e
        const int c = t[n0 + cut_direction[l]];
        count = group.multiply(group.multiply(a, group.inverse(b)), c) == group.identity() ? order : 0;
      } else {
        count = fix[static_cast<std::size_t>(a) * order + b];
      }
      product *= static_cast<Wide>(count);
    }
    total += product;
    int pos = 0;
    while (pos < factors && ++t[pos] == order) t[pos++] = 0;
    if (pos == factors) break;
  }
  Wide group_size = 1;
  for (int i = 0; i < factors; ++i) group_size *= static_cast<Wide>(order);
  return static_cast<std::uint64_t>(total / group_size);
}

}  // namespace latgauge
