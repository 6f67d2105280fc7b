#include "latgauge/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <new>
#include <random>
#include <thread>

#include "latgauge/error.hpp"

namespace latgauge {

LinearOperator as_linear_operator(const SparseOperator& op) {
  LinearOperator out;
  out.dimension = op.dimension();
  out.effective_dimension = op.dimension();
  out.apply = [&op](std::span<const double> in, std::span<double> y) { op.apply(in, y); };
  return out;
}

LinearOperator projected_operator(const LatticeHamiltonian& h, const GaussSector& sector) {
  if (h.basis().dimension() != sector.full_dimension()) {
    throw Error(ErrorKind::kInvalidParameter, "Hamiltonian and sector live on different spaces");
  }
  LinearOperator out;
  out.dimension = sector.full_dimension();
  out.effective_dimension = sector.dimension();
  out.apply = [&h](std::span<const double> in, std::span<double> y) { h.apply(in, y); };
  out.project = [&sector](std::span<double> v) { sector.project_in_place(v); };
  return out;
}

LinearOperator projected_operator(const SparseOperator& full, const GaussSector& sector) {
  if (full.dimension() != sector.full_dimension()) {
    throw Error(ErrorKind::kInvalidParameter, "operator and sector live on different spaces");
  }
  LinearOperator out;
  out.dimension = sector.full_dimension();
  out.effective_dimension = sector.dimension();
  out.apply = [&full](std::span<const double> in, std::span<double> y) { full.apply(in, y); };
  out.project = [&sector](std::span<double> v) { sector.project_in_place(v); };
  return out;
}

namespace {

// Full spaces up to this size are assembled once instead of applied matrix-free.
constexpr std::uint64_t kAssembleLimit = std::uint64_t{1} << 20;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

void apply_op(const LinearOperator& op, const Vector& in, Vector& out) {
  out.resize(in.size());
  op.apply(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  if (op.project) op.project(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
}

// Classical Gram-Schmidt against the first `count` columns, repeated once
// when the first pass cancels most of the vector. Returns the accumulated
// coefficients.
Vector orthogonalize(const Matrix& basis, Eigen::Index count, Vector& w) {
  Vector coef = Vector::Zero(count);
  if (count == 0) return coef;
  for (int pass = 0; pass < 2; ++pass) {
    const double before = w.norm();
    const Vector c = basis.leftCols(count).transpose() * w;
    w.noalias() -= basis.leftCols(count) * c;
    coef += c;
    if (w.norm() > 0.7071 * before) break;
  }
  return coef;
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace

SpectrumReport lowest_k(const LinearOperator& op, const SolverOptions& options) {
  const auto n_full = op.dimension;
  const auto n_eff = op.effective_dimension == 0 ? n_full : op.effective_dimension;
  const int k = options.k;
  if (k < 1) throw Error(ErrorKind::kInvalidParameter, "k must be at least 1");
  if (static_cast<std::uint64_t>(k) > n_eff) {
    throw Error(ErrorKind::kInvalidParameter, "k = " + std::to_string(k) + " exceeds the dimension " +
                                                  std::to_string(n_eff));
  }
  if (!(options.tol > 0.0)) throw Error(ErrorKind::kInvalidParameter, "tolerance must be positive");
  if (options.max_iter < 1) throw Error(ErrorKind::kInvalidParameter, "max_iter must be at least 1");

  const auto n = static_cast<Eigen::Index>(n_full);
  const auto cap = static_cast<Eigen::Index>(std::min<std::uint64_t>(n_eff, 1u << 30));
  const Eigen::Index block = std::min<Eigen::Index>(options.block_size > 0 ? options.block_size : k + 2, cap);
  Eigen::Index m = options.krylov_dim > 0 ? options.krylov_dim
                                          : std::max<Eigen::Index>(40, 8 * block);
  m = std::min(std::max(m, block + k), cap);

  std::mt19937_64 rng(options.seed);
  Matrix start(n, block);
  for (Eigen::Index c = 0; c < block; ++c) {
    Vector v = random_vector(n, rng);
    if (op.project) op.project(std::span<double>(v.data(), static_cast<std::size_t>(n)));
    start.col(c) = v;
  }

  Matrix V(n, m);
  Matrix H(m, m);
  Vector w;
  SpectrumReport report;
  report.seed = options.seed;
  report.method = "block-lanczos";
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  Eigen::Index restart_ritz = 0;
  std::vector<double> restart_theta;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    report.iterations = iter;
    H.setZero();
    Eigen::Index count = 0;
    for (Eigen::Index c = 0; c < start.cols() && count < m; ++c) {
      Vector v = start.col(c);
      const double before = v.norm();
      orthogonalize(V, count, v);
      const double after = v.norm();
      if (before > 0.0 && after > 1e-10 * before) V.col(count++) = v / after;
    }
    if (count == 0) {
      throw Error(ErrorKind::kInvalidParameter, "start block vanished under the projector");
    }

    // Remainders that no longer fit span the next Krylov block.
    std::vector<Vector> overflow;
    // The leading Ritz vectors already satisfy A·x = θ·x + (overflow part);
    // their columns are filled from symmetry after the sweep.
    const Eigen::Index ritz_cols = std::min(restart_ritz, count);
    for (Eigen::Index j = 0; j < ritz_cols; ++j) H(j, j) = restart_theta[j];
    for (Eigen::Index j = ritz_cols; j < count; ++j) {
      apply_op(op, V.col(j), w);
      ++report.matvecs;
      const double scale = w.norm();
      H.col(j).head(count) += orthogonalize(V, count, w);
      const double residual = w.norm();
      if (!(residual > 1e-10 * scale && residual > 0.0)) continue;
      if (count < m) {
        V.col(count) = w / residual;
        H(count, j) = residual;
        ++count;
      } else {
        overflow.push_back(w);
      }
    }

    for (Eigen::Index j = 0; j < ritz_cols; ++j) {
      for (Eigen::Index i = ritz_cols; i < count; ++i) H(i, j) = H(j, i);
    }
    const Matrix T = 0.5 * (H.topLeftCorner(count, count) + H.topLeftCorner(count, count).transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(T);
    const Eigen::Index found = std::min<Eigen::Index>(k, count);
    // Thick restart: keep about half the space as Ritz vectors.
    const auto extra = static_cast<Eigen::Index>(overflow.size());
    const Eigen::Index keep = std::min(count, std::max(block, (m - extra) / 2));
    const Matrix X = V.leftCols(count) * ritz.eigenvectors().leftCols(keep);

    std::vector<double> residuals(found);
    bool converged = found == k;
    for (Eigen::Index i = 0; i < found; ++i) {
      apply_op(op, X.col(i), w);
      ++report.matvecs;
      const double theta = ritz.eigenvalues()(i);
      residuals[i] = (w - theta * X.col(i)).norm();
      best[i] = std::min(best[i], residuals[i]);
      if (residuals[i] > options.tol * std::max(1.0, std::abs(theta))) converged = false;
    }

    if (converged) {
      report.eigenvalues.assign(ritz.eigenvalues().data(), ritz.eigenvalues().data() + k);
      report.residuals = residuals;
      report.ground_energy = report.eigenvalues.front();
      if (options.keep_vectors) {
        for (Eigen::Index i = 0; i < k; ++i) {
          report.eigenvectors.emplace_back(X.col(i).data(), X.col(i).data() + n);
        }
      }
      return report;
    }

    // Restart from the Ritz vectors and the overflow block; top up with
    // fresh random directions when the Krylov space closed early.
    const Eigen::Index fresh = extra == 0 ? block : 0;
    restart_ritz = keep;
    restart_theta.assign(ritz.eigenvalues().data(), ritz.eigenvalues().data() + keep);
    start.resize(n, keep + extra + fresh);
    start.leftCols(keep) = X;
    for (Eigen::Index c = 0; c < extra; ++c) start.col(keep + c) = overflow[c];
    for (Eigen::Index c = 0; c < fresh; ++c) {
      Vector v = random_vector(n, rng);
      if (op.project) op.project(std::span<double>(v.data(), static_cast<std::size_t>(n)));
      start.col(keep + extra + c) = v;
    }
  }
  throw ConvergenceError("block Lanczos did not reach tol " + std::to_string(options.tol) + " in " +
                             std::to_string(options.max_iter) + " restarts",
                         best);
}

SpectrumReport lowest_k(const SparseOperator& op, int k, double tol, std::uint64_t seed) {
  SolverOptions o;
  o.k = k;
  o.tol = tol;
  o.seed = seed;
  return lowest_k(as_linear_operator(op), o);
}

std::vector<double> dense_oracle(const SparseOperator& op, std::uint64_t cap) {
  const Matrix m = op.to_dense(cap);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

GapResult mass_gap(std::span<const double> eigenvalues, std::optional<double> degeneracy_tol) {
  if (eigenvalues.size() < 2) {
    throw Error(ErrorKind::kInvalidParameter, "gap needs at least two eigenvalues");
  }
  if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end())) {
    throw Error(ErrorKind::kInvalidParameter, "eigenvalues must be ascending");
  }
  GapResult out;
  const double width = eigenvalues.back() - eigenvalues.front();
  out.tolerance = degeneracy_tol.value_or(1e-6 * width);
  std::size_t size = 1;
  while (size < eigenvalues.size() && eigenvalues[size] - eigenvalues[size - 1] <= out.tolerance) ++size;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) sum += eigenvalues[i];
  out.vacuum_multiplicity = static_cast<int>(size);
  out.ground_mean = sum / static_cast<double>(size);
  out.splitting = eigenvalues[size - 1] - eigenvalues[0];
  if (size < eigenvalues.size()) out.gap = eigenvalues[size] - out.ground_mean;
  return out;
}

double coupling_schedule(double a, double f) {
  if (!(a > 0.0) || !(a < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "lattice spacing a must lie in (0, 1), got " + std::to_string(a));
  }
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorKind::kInvalidParameter, "schedule constant f must be positive");
  }
  return f / std::abs(std::log(a));
}

double resolve_coupling(const GridPoint& point) {
  const bool schedule = point.a.has_value() || point.f.has_value();
  if (point.g.has_value() == schedule) {
    throw Error(ErrorKind::kInvalidParameter, "grid point needs exactly one of g or (a, f)");
  }
  if (point.g) return *point.g;
  if (!point.a || !point.f) throw Error(ErrorKind::kInvalidParameter, "schedule needs both a and f");
  return coupling_schedule(*point.a, *point.f);
}

SpectrumReport solve_point(const LatticeGeometry& geom, const ScanConfig& config, double g,
                           std::uint64_t* sector_dim, std::string* sector_mode) {
  CouplingParams c = CouplingParams::from_g(g);
  if (config.electric_prefactor) c.electric_prefactor = *config.electric_prefactor;
  if (config.magnetic_prefactor) c.magnetic_prefactor = *config.magnetic_prefactor;
  c.validate();
  const GaussSector sector(geom, config.structure, config.sector);
  if (sector_dim) *sector_dim = sector.dimension();
  if (sector_mode) *sector_mode = to_string(sector.mode());
  const LatticeHamiltonian h(geom, link_operators(config.structure), c);
  SolverOptions solver = config.solver;
  solver.k = static_cast<int>(std::min<std::uint64_t>(solver.k, sector.dimension()));
  if (sector.mode() == ProjectorMode::kExplicit) {
    const auto op = h.sector_operator(sector);
    return lowest_k(as_linear_operator(op), solver);
  }
  if (sector.full_dimension() <= kAssembleLimit) {
    const auto full = h.full_operator();
    return lowest_k(projected_operator(full, sector), solver);
  }
  return lowest_k(projected_operator(h, sector), solver);
}

std::vector<ScanRecord> gap_scan(const std::vector<GridPoint>& grid, const ScanConfig& config,
                                 const std::function<void(const ScanRecord&)>& emit) {
  std::vector<ScanRecord> records(grid.size());
  std::vector<bool> done(grid.size(), false);
  std::size_t next_emit = 0;
  std::mutex mutex;

  auto run = [&](std::size_t i) {
    ScanRecord& r = records[i];
    const auto& point = grid[i];
    r.index = i;
    r.dims = point.dims;
    r.structure_id = config.structure.id();
    r.a = point.a;
    r.f = point.f;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.g = resolve_coupling(point);
      const auto geom = build_lattice(point.dims);
      const auto report = solve_point(geom, config, r.g, &r.sector_dim, &r.sector_mode);
      r.eigenvalues = report.eigenvalues;
      r.ground_energy = report.ground_energy;
      r.iterations = report.iterations;
      r.residual = *std::max_element(report.residuals.begin(), report.residuals.end());
      if (report.eigenvalues.size() >= 2) {
        const auto gap = mass_gap(report.eigenvalues, config.degeneracy_tol);
        r.gap = gap.gap;
        r.vacuum_mult = gap.vacuum_multiplicity;
        r.splitting = gap.splitting;
      } else {
        r.vacuum_mult = 1;
      }
      r.ok = true;
    } catch (const ConvergenceError& e) {
      r.error_kind = std::string(to_string(e.kind()));
      r.error_message = e.what();
      if (!e.best_residuals().empty()) {
        r.residual = *std::max_element(e.best_residuals().begin(), e.best_residuals().end());
      }
    } catch (const Error& e) {
      r.error_kind = std::string(to_string(e.kind()));
      r.error_message = e.what();
    } catch (const std::bad_alloc&) {
      r.error_kind = std::string(to_string(ErrorKind::kResource));
      r.error_message = "out of memory";
    }
    if (config.timing) {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::lock_guard lock(mutex);
    done[i] = true;
    while (next_emit < grid.size() && done[next_emit]) {
      if (emit) emit(records[next_emit]);
      ++next_emit;
    }
  };

  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(grid.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) run(i);
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

}  // namespace latgauge
