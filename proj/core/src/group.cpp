#include "latgauge/group.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "latgauge/error.hpp"

namespace latgauge {

namespace {

[[noreturn]] void fail_validation(const std::string& message) {
  throw Error(ErrorKind::kValidation, "group validation: " + message);
}

}  // namespace

FiniteGroup::FiniteGroup(int order, std::vector<int> table, int identity,
                         std::vector<int> generators, int max_order)
    : order_(order),
      identity_(identity),
      table_(std::move(table)),
      generators_(std::move(generators)) {
  if (order_ < 1) fail_validation("order must be positive");
  if (order_ > max_order) {
    throw Error(ErrorKind::kResource,
                "group order " + std::to_string(order_) + " exceeds cap " +
                    std::to_string(max_order));
  }
  const auto n = static_cast<std::size_t>(order_);
  if (table_.size() != n * n) {
    fail_validation("table has " + std::to_string(table_.size()) +
                    " entries, expected " + std::to_string(n * n));
  }
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] < 0 || table_[i] >= order_) {
      fail_validation("table entry (" + std::to_string(i / n) + "," +
                      std::to_string(i % n) + ") = " + std::to_string(table_[i]) +
                      " out of range");
    }
  }
  if (identity_ < 0 || identity_ >= order_) fail_validation("identity out of range");
  for (int x = 0; x < order_; ++x) {
    if (multiply(identity_, x) != x || multiply(x, identity_) != x) {
      fail_validation("identity " + std::to_string(identity_) +
                      " is not two-sided for element " + std::to_string(x));
    }
  }

  inverse_.assign(n, -1);
  for (int x = 0; x < order_; ++x) {
    for (int y = 0; y < order_; ++y) {
      if (multiply(x, y) == identity_ && multiply(y, x) == identity_) {
        inverse_[x] = y;
        break;
      }
    }
    if (inverse_[x] < 0) fail_validation("no inverse for element " + std::to_string(x));
  }

  for (int a = 0; a < order_; ++a) {
    for (int b = 0; b < order_; ++b) {
      const int ab = multiply(a, b);
      for (int c = 0; c < order_; ++c) {
        if (multiply(ab, c) != multiply(a, multiply(b, c))) {
          fail_validation("associativity fails for (" + std::to_string(a) + "," +
                          std::to_string(b) + "," + std::to_string(c) + ")");
        }
      }
    }
  }

  std::set<int> gens;
  for (int h : generators_) {
    if (h < 0 || h >= order_) fail_validation("generator " + std::to_string(h) + " out of range");
    if (h == identity_) fail_validation("generating set contains the identity");
    if (!gens.insert(h).second) fail_validation("duplicate generator " + std::to_string(h));
  }
  for (int h : generators_) {
    if (!gens.contains(inverse_[h])) {
      fail_validation("generating set not closed under inverse: element " +
                      std::to_string(h) + " has inverse " + std::to_string(inverse_[h]));
    }
  }
  std::vector<bool> reached(n, false);
  std::vector<int> frontier{identity_};
  reached[identity_] = true;
  while (!frontier.empty()) {
    const int x = frontier.back();
    frontier.pop_back();
    for (int h : generators_) {
      const int y = multiply(x, h);
      if (!reached[y]) {
        reached[y] = true;
        frontier.push_back(y);
      }
    }
  }
  for (int x = 0; x < order_; ++x) {
    if (!reached[x]) {
      fail_validation("generating set does not reach element " + std::to_string(x));
    }
  }

  abelian_ = true;
  for (int a = 0; a < order_ && abelian_; ++a) {
    for (int b = 0; b < order_; ++b) {
      if (multiply(a, b) != multiply(b, a)) {
        abelian_ = false;
        break;
      }
    }
  }
  conjugation_closed_ = true;
  for (int g = 0; g < order_ && conjugation_closed_; ++g) {
    for (int h : generators_) {
      if (!gens.contains(multiply(multiply(g, h), inverse_[g]))) {
        conjugation_closed_ = false;
        break;
      }
    }
  }
}

std::optional<int> FiniteGroup::cyclic_order() const noexcept {
  if (identity_ != 0) return std::nullopt;
  for (int i = 0; i < order_; ++i) {
    for (int j = 0; j < order_; ++j) {
      if (multiply(i, j) != (i + j) % order_) return std::nullopt;
    }
  }
  return order_;
}

std::string FiniteGroup::label() const {
  if (cyclic_order()) return "Z" + std::to_string(order_);
  return "G" + std::to_string(order_);
}

FiniteGroup make_cyclic_group(int n, int max_order) {
  if (n < 2) {
    throw Error(ErrorKind::kInvalidParameter,
                "cyclic group order must be >= 2, got " + std::to_string(n));
  }
  std::vector<int> table(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) table[static_cast<std::size_t>(i) * n + j] = (i + j) % n;
  }
  std::vector<int> gens = n == 2 ? std::vector<int>{1} : std::vector<int>{1, n - 1};
  return FiniteGroup(n, std::move(table), 0, std::move(gens), max_order);
}

FiniteGroup load_group(std::string_view text, int max_order) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("group table: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "group table: expected an object");
  static const std::set<std::string> kKeys{"order", "identity", "table", "generators"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorKind::kParse, "group table: unknown key '" + key + "'");
  }
  for (const auto& key : kKeys) {
    if (!doc.contains(key)) throw Error(ErrorKind::kParse, "group table: missing key '" + key + "'");
  }
  try {
    const int order = doc.at("order").get<int>();
    const int identity = doc.at("identity").get<int>();
    auto table = doc.at("table").get<std::vector<int>>();
    auto gens = doc.at("generators").get<std::vector<int>>();
    return FiniteGroup(order, std::move(table), identity, std::move(gens), max_order);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("group table: ") + e.what());
  }
}

FiniteGroup load_group_file(const std::filesystem::path& path, int max_order) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParse, "cannot open group file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_group(buffer.str(), max_order);
}

std::string dump_group(const FiniteGroup& group) {
  nlohmann::json doc;
  doc["order"] = group.order();
  doc["identity"] = group.identity();
  doc["table"] = std::vector<int>(group.table().begin(), group.table().end());
  doc["generators"] = std::vector<int>(group.generators().begin(), group.generators().end());
  return doc.dump();
}

TruncatedU1::TruncatedU1(int n_max, int cap) : n_max_(n_max) {
  if (n_max < 0) {
    throw Error(ErrorKind::kInvalidParameter, "n_max must be non-negative");
  }
  if (n_max > cap) {
    throw Error(ErrorKind::kResource, "n_max " + std::to_string(n_max) +
                                          " exceeds cap " + std::to_string(cap));
  }
}

GaugeStructure::GaugeStructure(FiniteGroup group, int character_charge)
    : impl_(std::move(group)), charge_(character_charge) {
  const auto& g = std::get<FiniteGroup>(impl_);
  character_.assign(static_cast<std::size_t>(g.order()), 0.0);
  if (auto n = g.cyclic_order()) {
    for (int x = 0; x < *n; ++x) {
      const int phase = static_cast<int>((static_cast<long long>(charge_) * x) % *n);
      character_[x] = std::cos(2.0 * std::numbers::pi * phase / *n);
    }
  } else {
    character_[g.identity()] = 1.0;
  }
}

GaugeStructure::GaugeStructure(TruncatedU1 u1, int character_charge)
    : impl_(u1), charge_(character_charge) {
  if (character_charge == 0) {
    throw Error(ErrorKind::kInvalidParameter, "U(1) character charge must be nonzero");
  }
}

const FiniteGroup& GaugeStructure::group() const {
  if (!is_finite_group()) throw Error(ErrorKind::kUnsupportedStructure, "structure is not a finite group");
  return std::get<FiniteGroup>(impl_);
}

const TruncatedU1& GaugeStructure::u1() const {
  if (is_finite_group()) throw Error(ErrorKind::kUnsupportedStructure, "structure is not truncated U(1)");
  return std::get<TruncatedU1>(impl_);
}

int GaugeStructure::link_dimension() const noexcept {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, FiniteGroup>) {
          return s.order();
        } else {
          return s.dimension();
        }
      },
      impl_);
}

bool GaugeStructure::is_abelian() const noexcept {
  if (const auto* g = std::get_if<FiniteGroup>(&impl_)) return g->is_abelian();
  return true;
}

std::string GaugeStructure::id() const {
  if (const auto* g = std::get_if<FiniteGroup>(&impl_)) return g->label();
  return "U1(n_max=" + std::to_string(std::get<TruncatedU1>(impl_).n_max()) + ")";
}

std::string GaugeStructure::character_label() const {
  if (const auto* g = std::get_if<FiniteGroup>(&impl_)) {
    if (g->cyclic_order()) return "defining(k=" + std::to_string(charge_) + ")";
    return "regular/normalized";
  }
  return "charge(k=" + std::to_string(charge_) + ")";
}

Eigen::MatrixXd index_map_matrix(std::span<const int> perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (perm[x] >= 0) m(perm[x], x) = 1.0;
  }
  return m;
}

LinkOperatorSet link_operators(const GaugeStructure& structure) {
  LinkOperatorSet ops;
  ops.dimension = structure.link_dimension();
  const int d = ops.dimension;
  if (structure.is_finite_group()) {
    const auto& g = structure.group();
    if (g.generators().empty()) {
      throw Error(ErrorKind::kInvalidParameter, "link Laplacian needs a nonempty generating set");
    }
    ops.kind = LinkKind::kFiniteGroup;
    ops.identity = g.identity();
    ops.inverse.assign(g.inverses().begin(), g.inverses().end());
    ops.left_translations.assign(d, std::vector<int>(d));
    ops.right_translations.assign(d, std::vector<int>(d));
    for (int h = 0; h < d; ++h) {
      for (int x = 0; x < d; ++x) {
        ops.left_translations[h][x] = g.multiply(h, x);
        ops.right_translations[h][x] = g.multiply(x, h);
      }
    }
    ops.laplacian = Eigen::MatrixXd::Zero(d, d);
    for (int h : g.generators()) {
      ops.laplacian += Eigen::MatrixXd::Identity(d, d) - index_map_matrix(ops.right_translations[h]);
    }
    ops.character_weights.resize(d);
    for (int x = 0; x < d; ++x) ops.character_weights[x] = structure.character(x);
    ops.character_identity = structure.character(g.identity());
    ops.bi_invariant = g.is_abelian() || g.generators_conjugation_closed();
  } else {
    const auto& u = structure.u1();
    ops.kind = LinkKind::kTruncatedU1;
    ops.identity = u.index(0);
    ops.laplacian = Eigen::MatrixXd::Zero(d, d);
    ops.raising.assign(d, -1);
    ops.lowering.assign(d, -1);
    const int k = structure.character_charge();
    for (int i = 0; i < d; ++i) {
      const int n = u.charge(i);
      ops.laplacian(i, i) = static_cast<double>(n) * n;
      ops.raising[i] = u.index(n + k);
      ops.lowering[i] = u.index(n - k);
    }
    ops.character_identity = 1.0;
    ops.bi_invariant = true;
  }
  return ops;
}

}  // namespace latgauge
