#include "latgauge/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "latgauge/error.hpp"

namespace latgauge {

Eigen::MatrixXd curl_matrix(const LatticeGeometry& geom) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(geom.num_plaquettes(), geom.num_links());
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    for (const auto& sl : geom.plaquette(p)) c(p, sl.link) += sl.sign;
  }
  return c;
}

NormalModeSet normal_modes(const LatticeGeometry& geom, const CouplingParams& coupling) {
  coupling.validate();
  const Eigen::MatrixXd c = curl_matrix(geom);
  const Eigen::MatrixXd k = c.transpose() * c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const auto& lambda = es.eigenvalues();
  const double cutoff = 1e-9 * std::max(1.0, lambda.cwiseAbs().maxCoeff());

  NormalModeSet out;
  out.dims.assign(geom.dims().begin(), geom.dims().end());
  out.gauge_directions = geom.num_sites() - 1;
  out.reduced_dimension = geom.num_links() - geom.num_sites() + 1;
  int nullity = 0;
  std::vector<Eigen::Index> nonzero;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= cutoff) {
      ++nullity;
    } else {
      nonzero.push_back(i);
    }
  }
  out.zero_mode_count = nullity - out.gauge_directions;
  const double scale = 2.0 * coupling.electric_prefactor * coupling.magnetic_prefactor;
  out.shapes.resize(geom.num_links(), static_cast<Eigen::Index>(nonzero.size()));
  for (std::size_t j = 0; j < nonzero.size(); ++j) {
    out.frequencies.push_back(std::sqrt(scale * lambda(nonzero[j])));
    out.shapes.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(nonzero[j]);
  }
  return out;
}

NormalModeSet normal_modes(const LatticeGeometry& geom, const GaugeStructure& structure,
                           const CouplingParams& coupling) {
  if (structure.is_finite_group()) {
    throw Error(ErrorKind::kUnsupportedStructure,
                "normal modes need a continuous abelian structure (truncated U(1)), got " + structure.id());
  }
  return normal_modes(geom, coupling);
}

std::vector<FockLevel> fock_spectrum(const std::vector<double>& frequencies, double energy_cutoff) {
  if (!(energy_cutoff > 0.0)) throw Error(ErrorKind::kInvalidParameter, "energy cutoff must be positive");
  for (double w : frequencies) {
    if (!(w > 0.0)) throw Error(ErrorKind::kInvalidParameter, "mode frequencies must be positive");
  }
  const double limit = energy_cutoff * (1.0 + 1e-12);
  std::vector<FockLevel> levels;
  std::vector<int> occ(frequencies.size(), 0);
  std::function<void(std::size_t, double)> fill = [&](std::size_t mode, double energy) {
    if (mode == frequencies.size()) {
      levels.push_back({occ, energy});
      return;
    }
    for (int n = 0; energy + n * frequencies[mode] <= limit; ++n) {
      occ[mode] = n;
      fill(mode + 1, energy + n * frequencies[mode]);
    }
    occ[mode] = 0;
  };
  fill(0, 0.0);
  std::sort(levels.begin(), levels.end(), [](const FockLevel& a, const FockLevel& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.occupation < b.occupation;
  });
  return levels;
}

std::vector<FockLevel> fock_spectrum(const NormalModeSet& modes, double energy_cutoff) {
  return fock_spectrum(modes.frequencies, energy_cutoff);
}

SeriesCoefficients rs_series(const SparseOperator& h0, const SparseOperator& v, int level, int order,
                             double degeneracy_threshold) {
  if (order != 1 && order != 2) throw Error(ErrorKind::kInvalidParameter, "order must be 1 or 2");
  if (h0.dimension() != v.dimension()) throw Error(ErrorKind::kInvalidParameter, "H0 and V differ in size");
  if (level < 0 || static_cast<std::uint64_t>(level) >= h0.dimension()) {
    throw Error(ErrorKind::kIndex, "level " + std::to_string(level) + " out of range");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0.to_dense());
  const auto& e = es.eigenvalues();
  const auto& u = es.eigenvectors();
  SeriesCoefficients out;
  out.level_spacing = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < e.size(); ++m) {
    if (m != level) out.level_spacing = std::min(out.level_spacing, std::abs(e(level) - e(m)));
  }
  if (out.level_spacing <= degeneracy_threshold) {
    throw Error(ErrorKind::kDegeneracy, "level " + std::to_string(level) + " is degenerate (spacing " +
                                            std::to_string(out.level_spacing) + ")");
  }
  const Eigen::VectorXd un = u.col(level);
  const Eigen::VectorXd vn = v.to_dense() * un;
  out.coefficients.push_back(e(level));
  out.coefficients.push_back(un.dot(vn));
  if (order == 2) {
    double second = 0.0;
    for (Eigen::Index m = 0; m < e.size(); ++m) {
      if (m == level) continue;
      const double vmn = u.col(m).dot(vn);
      second += vmn * vmn / (e(level) - e(m));
    }
    out.coefficients.push_back(second);
  }
  return out;
}

WeakCouplingTable weak_coupling_check(const LatticeGeometry& geom, int n_max, double g, int k,
                                      const WeakCouplingOptions& options) {
  if (k < 2) throw Error(ErrorKind::kInvalidParameter, "weak-coupling check needs k >= 2 levels");
  const auto coupling = CouplingParams::from_g(g);
  const GaugeStructure structure(TruncatedU1(n_max, options.max_charge));
  const auto modes = normal_modes(geom, structure, coupling);

  // Enough Fock levels to cover k excitations.
  std::vector<FockLevel> fock;
  double cutoff = modes.frequencies.front();
  while (true) {
    fock = fock_spectrum(modes, cutoff);
    if (static_cast<int>(fock.size()) > k) break;
    cutoff *= 1.5;
  }

  ScanConfig config{.structure = structure, .solver = options.solver};
  config.sector.zero_winding = options.zero_winding;
  config.solver.k = k + 1;
  std::uint64_t sector_dim = 0;
  const auto report = solve_point(geom, config, g, &sector_dim);
  if (static_cast<int>(report.eigenvalues.size()) <= k) {
    throw Error(ErrorKind::kInvalidParameter,
                "sector of dimension " + std::to_string(sector_dim) + " has fewer than k + 1 levels");
  }

  WeakCouplingTable table;
  table.g = g;
  table.n_max = n_max;
  table.sector_dim = sector_dim;
  const double exact_first = report.eigenvalues[1] - report.eigenvalues[0];
  const double fock_first = fock[1].energy - fock[0].energy;
  for (int i = 1; i <= k; ++i) {
    WeakCouplingRow row;
    row.level = i;
    row.exact_energy = report.eigenvalues[i] - report.eigenvalues[0];
    row.fock_energy = fock[i].energy - fock[0].energy;
    row.exact_ratio = row.exact_energy / exact_first;
    row.fock_ratio = row.fock_energy / fock_first;
    row.deviation = std::abs(row.exact_ratio - row.fock_ratio) / row.fock_ratio;
    table.max_deviation = std::max(table.max_deviation, row.deviation);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace latgauge
