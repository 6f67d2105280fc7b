#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "latgauge/error.hpp"
#include "latgauge/spectra.hpp"
#include "oracles.hpp"

using namespace latgauge;

namespace {

SparseOperator random_sparse(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i), 4.0 * u(rng)});
    for (int j = i + 1; j < n; ++j) {
      if (!keep(rng)) continue;
      const double v = u(rng);
      t.push_back({static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), v});
      t.push_back({static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i), v});
    }
  }
  return SparseOperator::from_triplets(static_cast<std::uint64_t>(n), t, false);
}

double residual(const SparseOperator& op, const std::vector<double>& v, double lambda) {
  const auto av = op.apply(v);
  double r = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    r += (av[i] - lambda * v[i]) * (av[i] - lambda * v[i]);
    nv += v[i] * v[i];
  }
  return std::sqrt(r / nv);
}

SparseOperator z2_sector_operator(const std::vector<int>& dims, double g) {
  const auto geom = build_lattice(dims);
  const GaugeStructure z2(make_cyclic_group(2));
  const GaussSector sector(geom, z2, {.mode = ProjectorMode::kExplicit});
  const LatticeHamiltonian h(geom, link_operators(z2), CouplingParams::from_g(g));
  return h.sector_operator(sector);
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("diagonal input") {
    const auto op = SparseOperator::diagonal(std::vector<double>{3.0, 1.0, 0.0, 2.0});
    const auto r = lowest_k(op, 2, 1e-10, 7);
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(r.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ground_energy == r.eigenvalues[0]);
    CHECK(r.seed == 7);
    CHECK(r.method == "block-lanczos");
  }

  TEST_CASE("k outside [1, dimension] is an invalid parameter") {
    const auto op = SparseOperator::diagonal(std::vector<double>{0.0, 1.0, 2.0});
    try {
      lowest_k(op, 4, 1e-10, 0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidParameter);
    }
    CHECK_THROWS_AS(lowest_k(op, 0, 1e-10, 0), Error);
  }

  TEST_CASE("dense oracle") {
    const auto swap = SparseOperator::from_dense(Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}});
    const auto e = dense_oracle(swap);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(-1.0));
    CHECK(e[1] == doctest::Approx(1.0));
    try {
      dense_oracle(SparseOperator::diagonal(std::vector<double>(5000, 1.0)));
      FAIL("expected an error");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::kResource);
    }
  }

  TEST_CASE("Z2 [2,2] sector: Lanczos matches dense diagonalization of the oracle Hamiltonian") {
    const auto table = oracle::cyclic(2);
    const oracle::Torus torus({2, 2});
    const Eigen::MatrixXd p = oracle::projector(table, torus);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(p);
    Eigen::MatrixXd range(p.rows(), 0);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      if (ps.eigenvalues()(i) > 0.5) {
        range.conservativeResize(Eigen::NoChange, range.cols() + 1);
        range.col(range.cols() - 1) = ps.eigenvectors().col(i);
      }
    }
    REQUIRE(range.cols() == 32);
    for (double g : {0.5, 1.0, 2.0}) {
      CAPTURE(g);
      const Eigen::MatrixXd h = oracle::group_hamiltonian(table, {1.0, -1.0}, torus, g * g / 2, 1 / (g * g));
      const Eigen::VectorXd expect = oracle::eigenvalues(range.transpose() * h * range);
      const auto op = z2_sector_operator({2, 2}, g);
      const auto r = lowest_k(op, 6, 1e-12, 1);
      for (int i = 0; i < 6; ++i) CHECK(std::abs(r.eigenvalues[i] - expect(i)) <= 1e-8);
    }
  }

  TEST_CASE("property: Lanczos agrees with the dense oracle on random sparse symmetric matrices") {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 20; ++trial) {
      CAPTURE(trial);
      const int n = 30 + trial * 7;
      const auto op = random_sparse(n, 0.1, rng);
      const auto dense = dense_oracle(op);
      SolverOptions opts;
      opts.k = 1 + trial % 6;
      opts.tol = 1e-11;
      opts.seed = static_cast<std::uint64_t>(trial);
      opts.keep_vectors = true;
      const auto r = lowest_k(as_linear_operator(op), opts);
      REQUIRE(r.eigenvalues.size() == static_cast<std::size_t>(opts.k));
      for (int i = 0; i < opts.k; ++i) {
        CHECK(std::abs(r.eigenvalues[i] - dense[i]) <= 1e-9);
        // Independent recomputation of the reported residual bound.
        CHECK(residual(op, r.eigenvectors[i], r.eigenvalues[i]) <= 1e-11 * std::max(1.0, std::abs(r.eigenvalues[i])));
      }
      for (int i = 1; i < opts.k; ++i) CHECK(r.eigenvalues[i - 1] <= r.eigenvalues[i]);
    }
  }

  TEST_CASE("determinism: same seed gives identical output") {
    std::mt19937_64 rng(5);
    const auto op = random_sparse(120, 0.05, rng);
    const auto a = lowest_k(op, 4, 1e-10, 99);
    const auto b = lowest_k(op, 4, 1e-10, 99);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.residuals == b.residuals);
    CHECK(a.matvecs == b.matvecs);
  }

  TEST_CASE("convergence failure carries the best residuals") {
    std::mt19937_64 rng(8);
    const auto op = random_sparse(400, 0.05, rng);
    SolverOptions opts;
    opts.k = 6;
    opts.tol = 1e-15;
    opts.max_iter = 1;
    opts.krylov_dim = 16;
    opts.block_size = 2;
    try {
      lowest_k(as_linear_operator(op), opts);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
      CHECK(e.kind() == ErrorKind::kConvergence);
      CHECK(e.best_residuals().size() == 6);
    }
  }

  TEST_CASE("projector path equals constraint path, Z2 [2,2]") {
    const auto geom = build_lattice({2, 2});
    const GaugeStructure z2(make_cyclic_group(2));
    const LatticeHamiltonian h(geom, link_operators(z2), CouplingParams::from_g(1.0));
    const GaussSector explicit_sector(geom, z2, {.mode = ProjectorMode::kExplicit});
    const GaussSector implicit_sector(geom, z2, {.mode = ProjectorMode::kImplicit});
    SolverOptions opts;
    opts.k = 6;
    opts.tol = 1e-11;
    const auto constraint = lowest_k(as_linear_operator(h.sector_operator(explicit_sector)), opts);
    const auto full = h.full_operator();
    const auto projected = lowest_k(projected_operator(full, implicit_sector), opts);
    const auto matrix_free = lowest_k(projected_operator(h, implicit_sector), opts);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(constraint.eigenvalues[i] - projected.eigenvalues[i]) <= 1e-8);
      CHECK(std::abs(constraint.eigenvalues[i] - matrix_free.eigenvalues[i]) <= 1e-8);
    }
    const auto g1 = mass_gap(constraint.eigenvalues);
    const auto g2 = mass_gap(projected.eigenvalues);
    REQUIRE(g1.gap);
    REQUIRE(g2.gap);
    CHECK(std::abs(*g1.gap - *g2.gap) <= 1e-8);

    // Constraint path: diagonalize the full space, then count the invariant
    // states inside every eigenspace as the rank of P restricted to it.
    const Eigen::MatrixXd dense = full.to_dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    const auto& lam = es.eigenvalues();
    std::vector<double> invariant;
    for (Eigen::Index i = 0; i < lam.size();) {
      Eigen::Index j = i + 1;
      while (j < lam.size() && lam(j) - lam(j - 1) < 1e-9) ++j;
      Eigen::MatrixXd pu(dense.rows(), j - i);
      for (Eigen::Index c = i; c < j; ++c) {
        std::vector<double> v(es.eigenvectors().col(c).data(), es.eigenvectors().col(c).data() + dense.rows());
        std::vector<double> pv(v.size());
        implicit_sector.apply_projector(v, pv);
        pu.col(c - i) = Eigen::Map<Eigen::VectorXd>(pv.data(), dense.rows());
      }
      const Eigen::MatrixXd m = es.eigenvectors().middleCols(i, j - i).transpose() * pu;
      const Eigen::VectorXd occ = oracle::eigenvalues(m);
      for (Eigen::Index c = 0; c < occ.size(); ++c) {
        if (occ(c) > 0.5) invariant.push_back(lam.segment(i, j - i).mean());
      }
      i = j;
    }
    CHECK(invariant.size() == 32);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(invariant[i] - constraint.eigenvalues[i]) <= 1e-8);
    const auto g3 = mass_gap(std::span<const double>(invariant).first(6));
    REQUIRE(g3.gap);
    CHECK(std::abs(*g1.gap - *g3.gap) <= 1e-8);
  }

  TEST_CASE("mass gap clustering") {
    SUBCASE("simple vacuum") {
      const std::vector<double> e{0.0, 1.0, 1.0, 2.5};
      const auto r = mass_gap(e, 1e-6);
      REQUIRE(r.gap);
      CHECK(*r.gap == doctest::Approx(1.0));
      CHECK(r.vacuum_multiplicity == 1);
      CHECK_FALSE(r.indeterminate());
    }
    SUBCASE("near-degenerate vacuum") {
      const std::vector<double> e{0.0, 1e-9, 0.8, 1.3};
      const auto r = mass_gap(e, 1e-6);
      REQUIRE(r.gap);
      CHECK(r.vacuum_multiplicity == 2);
      CHECK(*r.gap == doctest::Approx(0.8 - 0.5e-9).epsilon(1e-12));
      CHECK(r.splitting == doctest::Approx(1e-9));
    }
    SUBCASE("single cluster is indeterminate") {
      const std::vector<double> e{1.0, 1.0, 1.0};
      const auto r = mass_gap(e);
      CHECK(r.indeterminate());
      CHECK(r.vacuum_multiplicity == 3);
    }
    SUBCASE("default tolerance scales with the spread") {
      const std::vector<double> e{0.0, 5e-7, 1.0};
      CHECK(mass_gap(e).vacuum_multiplicity == 2);
      const std::vector<double> f{0.0, 5e-6, 1.0};
      CHECK(mass_gap(f).vacuum_multiplicity == 1);
    }
    SUBCASE("preconditions") {
      const std::vector<double> one{0.0};
      CHECK_THROWS_AS(mass_gap(one), Error);
      const std::vector<double> unsorted{1.0, 0.0};
      CHECK_THROWS_AS(mass_gap(unsorted), Error);
    }
  }

  TEST_CASE("coupling schedule") {
    CHECK(coupling_schedule(std::exp(-2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(coupling_schedule(std::exp(-4.0), 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    double prev = coupling_schedule(0.9, 1.0);
    for (double a = 0.8; a > 1e-6; a *= 0.5) {
      const double g = coupling_schedule(a, 1.0);
      CHECK(g < prev);
      prev = g;
    }
    for (double bad : {1.0, 1.5, 0.0, -0.3}) {
      try {
        coupling_schedule(bad, 1.0);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kInvalidParameter);
      }
    }
    CHECK_THROWS_AS(coupling_schedule(0.5, 0.0), Error);
  }

  TEST_CASE("gap scan") {
    ScanConfig config{.structure = GaugeStructure(make_cyclic_group(2))};
    config.solver.k = 6;
    config.solver.tol = 1e-11;

    SUBCASE("three couplings, gaps positive and equal to the dense oracle") {
      std::vector<GridPoint> grid;
      for (double g : {0.5, 1.0, 2.0}) grid.push_back({{2, 2}, g, {}, {}});
      std::vector<std::size_t> order;
      const auto records = gap_scan(grid, config, [&](const ScanRecord& r) { order.push_back(r.index); });
      REQUIRE(records.size() == 3);
      CHECK(order == std::vector<std::size_t>{0, 1, 2});
      for (const auto& r : records) {
        CAPTURE(r.g);
        REQUIRE(r.ok);
        CHECK(r.sector_dim == 32);
        REQUIRE(r.gap);
        CHECK(*r.gap > 0.0);
        CHECK(r.disclaimer == kGapDisclaimer);
        const auto dense = dense_oracle(z2_sector_operator({2, 2}, r.g));
        const auto expect = mass_gap(std::span<const double>(dense).first(6));
        CHECK(std::abs(*r.gap - *expect.gap) <= 1e-8);
      }
    }
    SUBCASE("schedule mode") {
      std::vector<GridPoint> grid;
      for (int k = 1; k <= 3; ++k) grid.push_back({{2, 2}, {}, std::exp(-k), 1.0});
      const auto records = gap_scan(grid, config);
      REQUIRE(records.size() == 3);
      CHECK(records[0].g == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(records[1].g == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(records[2].g == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("empty grid") { CHECK(gap_scan({}, config).empty()); }
    SUBCASE("failures stay with their point") {
      config.sector.implicit_budget = 1 << 10;
      config.sector.explicit_budget = 1 << 10;
      config.threads = 3;
      std::vector<GridPoint> grid{{{2, 2}, 1.0, {}, {}}, {{3, 3}, 1.0, {}, {}}, {{2, 2}, {}, 2.0, 1.0}, {{2, 2}, 2.0, {}, {}}};
      const auto records = gap_scan(grid, config);
      REQUIRE(records.size() == 4);
      CHECK(records[0].ok);
      CHECK_FALSE(records[1].ok);
      CHECK(records[1].error_kind == "resource");
      CHECK_FALSE(records[2].ok);
      CHECK(records[2].error_kind == "invalid_parameter");
      CHECK(records[3].ok);
    }
    SUBCASE("threads do not change results") {
      std::vector<GridPoint> grid;
      for (double g : {0.7, 1.1, 1.9, 3.0}) grid.push_back({{2, 2}, g, {}, {}});
      config.timing = false;
      const auto serial = gap_scan(grid, config);
      config.threads = 4;
      const auto parallel = gap_scan(grid, config);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(serial[i].eigenvalues == parallel[i].eigenvalues);
        CHECK(serial[i].seconds == 0.0);
      }
    }
  }
}
