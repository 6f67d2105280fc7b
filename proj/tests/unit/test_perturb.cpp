#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "latgauge/error.hpp"
#include "latgauge/perturb.hpp"
#include "oracles.hpp"

using namespace latgauge;

namespace {

// Small-oscillation frequencies straight from the coordinate-built torus:
// ω² = 2·ep·mp·eig(CᵀC), with sites optionally translated by `shift` along
// axis 0 before numbering, which relabels every site and link.
std::vector<double> oracle_frequencies(const std::vector<int>& dims, int shift, int* nullity) {
  const oracle::Torus t(dims);
  std::vector<int> relabel(t.n1);
  for (int l = 0; l < t.n1; ++l) {
    const int dir = l / t.n0;
    relabel[l] = t.link(t.step(l % t.n0, 0, shift), dir);
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.plaquettes.size()), t.n1);
  for (std::size_t p = 0; p < t.plaquettes.size(); ++p) {
    for (const auto& [link, sign] : t.plaquettes[p]) c(static_cast<Eigen::Index>(p), relabel[link]) += sign;
  }
  const Eigen::VectorXd lam = oracle::eigenvalues(c.transpose() * c);
  std::vector<double> w;
  *nullity = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 1e-9) {
      w.push_back(std::sqrt(lam(i)));
    } else {
      ++*nullity;
    }
  }
  return w;
}

// Exhaustive enumeration of occupations with n_k ≤ bound.
std::vector<double> brute_fock(const std::vector<double>& w, double cutoff, int bound) {
  std::vector<double> out;
  std::vector<int> occ(w.size(), 0);
  while (true) {
    double e = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) e += occ[k] * w[k];
    if (e <= cutoff) out.push_back(e);
    std::size_t k = 0;
    while (k < w.size() && ++occ[k] > bound) occ[k++] = 0;
    if (k == w.size()) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

SparseOperator dense_op(const Eigen::MatrixXd& m) { return SparseOperator::from_dense(m); }

}  // namespace

TEST_SUITE("perturb") {
  TEST_CASE("normal modes on [2,2] match the small-oscillation oracle") {
    const auto geom = build_lattice({2, 2});
    const auto modes = normal_modes(geom);
    int nullity = 0;
    const auto expect = oracle_frequencies({2, 2}, 0, &nullity);
    REQUIRE(modes.frequencies.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(modes.frequencies[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    CHECK(modes.frequencies[0] == doctest::Approx(2.0));
    CHECK(modes.frequencies[1] == doctest::Approx(2.0));
    CHECK(modes.frequencies[2] == doctest::Approx(2.0 * std::numbers::sqrt2));
    CHECK(modes.zero_mode_count == 2);
    CHECK(modes.gauge_directions == 3);
    CHECK(nullity == modes.gauge_directions + modes.zero_mode_count);
    CHECK(modes.reduced_dimension == 5);
    CHECK(static_cast<int>(modes.frequencies.size()) + modes.zero_mode_count == modes.reduced_dimension);
    CHECK(modes.shapes.rows() == 8);
    CHECK(modes.shapes.cols() == 3);
  }

  TEST_CASE("normal modes: g-independence at default prefactors, zero modes = d") {
    for (const auto& dims : {std::vector<int>{3, 3}, std::vector<int>{2, 3}, std::vector<int>{2, 2, 2}}) {
      const auto geom = build_lattice(dims);
      const auto a = normal_modes(geom, CouplingParams::from_g(0.3));
      const auto b = normal_modes(geom, CouplingParams::from_g(2.7));
      REQUIRE(a.frequencies.size() == b.frequencies.size());
      for (std::size_t i = 0; i < a.frequencies.size(); ++i) CHECK(a.frequencies[i] == doctest::Approx(b.frequencies[i]).epsilon(1e-12));
      CHECK(a.zero_mode_count == geom.dimension());
      for (double w : a.frequencies) CHECK(w > 0.0);
      CHECK(std::is_sorted(a.frequencies.begin(), a.frequencies.end()));
    }
  }

  TEST_CASE("property: frequencies are invariant under lattice translations") {
    for (const auto& dims : {std::vector<int>{3, 3}, std::vector<int>{4, 3}, std::vector<int>{3, 2, 2}}) {
      const auto modes = normal_modes(build_lattice(dims));
      for (int shift = 1; shift < dims[0]; ++shift) {
        int nullity = 0;
        const auto w = oracle_frequencies(dims, shift, &nullity);
        REQUIRE(w.size() == modes.frequencies.size());
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - modes.frequencies[i]) <= 1e-12);
      }
    }
  }

  TEST_CASE("normal modes reject finite groups") {
    const auto geom = build_lattice({2, 2});
    try {
      normal_modes(geom, GaugeStructure(make_cyclic_group(2)));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUnsupportedStructure);
    }
    CHECK_NOTHROW(normal_modes(geom, GaugeStructure(TruncatedU1(1))));
  }

  TEST_CASE("Fock spectrum") {
    SUBCASE("two modes") {
      const auto levels = fock_spectrum(std::vector<double>{1.0, 2.0}, 2.5);
      REQUIRE(levels.size() == 4);
      CHECK(levels[0].energy == 0.0);
      CHECK(levels[1].energy == 1.0);
      CHECK(levels[2].energy == 2.0);
      CHECK(levels[3].energy == 2.0);
      CHECK(levels[0].occupation == std::vector<int>{0, 0});
      CHECK(levels[1].occupation == std::vector<int>{1, 0});
      CHECK(levels[2].occupation == std::vector<int>{0, 1});
      CHECK(levels[3].occupation == std::vector<int>{2, 0});
    }
    SUBCASE("cutoff below the lowest mode") {
      const auto levels = fock_spectrum(std::vector<double>{1.0, 3.0}, 0.5);
      REQUIRE(levels.size() == 1);
      CHECK(levels[0].energy == 0.0);
    }
    SUBCASE("bad cutoff") { CHECK_THROWS_AS(fock_spectrum(std::vector<double>{1.0}, 0.0), Error); }
  }

  TEST_CASE("property: Fock spectrum is ascending and complete") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.4, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> w(1 + trial % 6);
      for (auto& x : w) x = u(rng);
      const double cutoff = 3.3;
      const auto levels = fock_spectrum(w, cutoff);
      const auto expect = brute_fock(w, cutoff, static_cast<int>(cutoff / 0.4) + 1);
      REQUIRE(levels.size() == expect.size());
      for (std::size_t i = 0; i < levels.size(); ++i) {
        CHECK(levels[i].energy == doctest::Approx(expect[i]).epsilon(1e-12));
        if (i > 0) CHECK(levels[i - 1].energy <= levels[i].energy);
        if (i > 0) CHECK(levels[i].energy > 0.0);
      }
    }
  }

  TEST_CASE("Rayleigh-Schrodinger coefficients") {
    SUBCASE("two-level closed form") {
      const auto r = rs_series(dense_op(Eigen::MatrixXd{{0.0, 0.0}, {0.0, 1.0}}),
                               dense_op(Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}}), 0, 2);
      REQUIRE(r.coefficients.size() == 3);
      CHECK(r.coefficients[0] == doctest::Approx(0.0));
      CHECK(r.coefficients[1] == doctest::Approx(0.0));
      CHECK(r.coefficients[2] == doctest::Approx(-1.0));
      const double lam = 1e-3;
      const double exact = (1.0 - std::sqrt(1.0 + 4.0 * lam * lam)) / 2.0;
      CHECK(std::abs(exact - lam * lam * r.coefficients[2]) <= 10 * std::pow(lam, 4));
    }
    SUBCASE("zero perturbation") {
      const auto h0 = dense_op(Eigen::Vector3d(0.5, 1.5, 4.0).asDiagonal().toDenseMatrix());
      const auto v = dense_op(Eigen::MatrixXd::Zero(3, 3));
      const auto r = rs_series(h0, v, 1, 2);
      CHECK(r.coefficients[0] == doctest::Approx(1.5));
      CHECK(r.coefficients[1] == 0.0);
      CHECK(r.coefficients[2] == 0.0);
      CHECK(rs_series(h0, v, 1, 1).coefficients.size() == 2);
    }
    SUBCASE("degenerate level") {
      const auto h0 = dense_op(Eigen::Vector3d(0.0, 1.0, 1.0).asDiagonal().toDenseMatrix());
      const auto v = dense_op(Eigen::MatrixXd::Ones(3, 3));
      CHECK_NOTHROW(rs_series(h0, v, 0, 2));
      try {
        rs_series(h0, v, 1, 2);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kDegeneracy);
      }
      CHECK_THROWS_AS(rs_series(h0, v, 0, 3), Error);
      CHECK_THROWS_AS(rs_series(h0, v, 3, 2), Error);
    }
  }

  TEST_CASE("property: RS remainder is third order and the ground second-order term is non-positive") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      CAPTURE(trial);
      const Eigen::MatrixXd h0 = oracle::random_symmetric(12, rng);
      const Eigen::MatrixXd v = oracle::random_symmetric(12, rng);
      const auto r = rs_series(dense_op(h0), dense_op(v), 0, 2);
      CHECK(r.coefficients[2] <= 0.0);
      std::vector<double> x, y;
      for (double lam : {1e-2, 5e-3, 2.5e-3}) {
        const double exact = oracle::eigenvalues(h0 + lam * v)(0);
        const double series = r.coefficients[0] + lam * r.coefficients[1] + lam * lam * r.coefficients[2];
        x.push_back(std::log(lam));
        y.push_back(std::log(std::abs(exact - series)));
      }
      const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
      double num = 0.0, den = 0.0;
      for (int i = 0; i < 3; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
      }
      CHECK(std::abs(num / den - 3.0) <= 0.2);
    }
  }

  TEST_CASE("weak-coupling table") {
    const auto geom = build_lattice({2, 2});
    const auto table = weak_coupling_check(geom, 1, 0.5, 4);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.sector_dim == oracle::u1_sector_count(1, oracle::Torus({2, 2}), true));
    CHECK(table.rows[0].exact_ratio == doctest::Approx(1.0));
    CHECK(table.rows[0].fock_ratio == doctest::Approx(1.0));
    CHECK(table.rows[1].fock_ratio == doctest::Approx(1.0));
    CHECK(table.rows[2].fock_ratio == doctest::Approx(std::numbers::sqrt2));
    CHECK(table.rows[3].fock_ratio == doctest::Approx(2.0));
    double worst = 0.0;
    for (const auto& row : table.rows) worst = std::max(worst, row.deviation);
    CHECK(table.max_deviation == worst);

    // The exact energies are gaps of the oracle sector spectrum.
    const Eigen::VectorXd e = oracle::eigenvalues(
        oracle::u1_sector_hamiltonian(1, oracle::Torus({2, 2}), 0.125, 4.0, true, nullptr));
    for (int i = 0; i < 4; ++i) CHECK(table.rows[i].exact_energy == doctest::Approx(e(i + 1) - e(0)).epsilon(1e-9));

    CHECK_THROWS_AS(weak_coupling_check(geom, 1, 0.0, 4), Error);
    CHECK_THROWS_AS(weak_coupling_check(geom, 1, 0.5, 1), Error);
  }
}
