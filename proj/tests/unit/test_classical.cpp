#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "latgauge/classical.hpp"
#include "latgauge/error.hpp"
#include "oracles.hpp"

using namespace latgauge;

namespace {

constexpr double kPi = std::numbers::pi;

ClassicalState random_state(const LatticeGeometry& geom, std::mt19937_64& rng, double theta_scale, double e_scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto s = zero_state(geom);
  for (auto& t : s.theta) t = theta_scale * u(rng);
  for (auto& e : s.efield) e = e_scale * u(rng);
  return s;
}

double oracle_energy(const std::vector<int>& dims, const ClassicalState& s, double ep, double mp) {
  const oracle::Torus t(dims);
  double e = 0.0;
  for (double x : s.efield) e += ep * x * x;
  for (const auto& plaq : t.plaquettes) {
    double phi = 0.0;
    for (const auto& [link, sign] : plaq) phi += sign * s.theta[link];
    e += mp * (1.0 - std::cos(phi));
  }
  return e;
}

}  // namespace

TEST_SUITE("classical") {
  TEST_CASE("energy examples") {
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    auto s = zero_state(geom);
    CHECK(classical_energy(s, geom, c) == 0.0);

    s.theta[0] = kPi;
    CHECK(classical_energy(s, geom, c) == doctest::Approx(4.0));

    // Pure gauge theta = φ(source) − φ(target).
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::vector<double> phi(geom.num_sites());
    for (auto& x : phi) x = u(rng);
    const auto pure = gauge_shift(zero_state(geom), geom, phi);
    CHECK(std::abs(classical_energy(pure, geom, c)) <= 1e-12);

    CHECK_THROWS_AS(classical_energy(ClassicalState{}, geom, c), Error);
  }

  TEST_CASE("property: energy equals the coordinate oracle and is non-negative") {
    std::mt19937_64 rng(11);
    for (const auto& dims : {std::vector<int>{2, 2}, std::vector<int>{3, 2}, std::vector<int>{2, 2, 2}}) {
      const auto geom = build_lattice(dims);
      for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_state(geom, rng, kPi, 2.0);
        const auto c = CouplingParams::from_g(0.5 + 0.3 * trial);
        const double e = classical_energy(s, geom, c);
        CHECK(e >= 0.0);
        CHECK(e == doctest::Approx(oracle_energy(dims, s, c.electric_prefactor, c.magnetic_prefactor)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("angle wrapping") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(0.5) == 0.5);
    CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
    for (double x = -20.0; x < 20.0; x += 0.37) {
      const double w = wrap_angle(x);
      CHECK(w > -kPi);
      CHECK(w <= kPi);
      CHECK(std::abs(std::remainder(w - x, 2 * kPi)) <= 1e-12);
    }
  }

  TEST_CASE("zero state is a fixed point; bad dt is rejected") {
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    const auto s = evolve(zero_state(geom), 0.01, 100, geom, c);
    for (double t : s.theta) CHECK(t == 0.0);
    for (double e : s.efield) CHECK(e == 0.0);
    CHECK(s.time == doctest::Approx(1.0));
    CHECK_THROWS_AS(step_leapfrog(zero_state(geom), 0.0, geom, c), Error);
    CHECK_THROWS_AS(step_leapfrog(zero_state(geom), -1e-3, geom, c), Error);
  }

  TEST_CASE("uniform flux is an equilibrium on [2,2]") {
    // Fluxes (π/2, π/2, π/2, −3π/2) give sin Φ = 1 on every plaquette, so the
    // forces from the two plaquettes sharing a link cancel.
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    const Eigen::Vector4d target(kPi / 2, kPi / 2, kPi / 2, -3 * kPi / 2);
    const Eigen::MatrixXd curl = curl_matrix(geom);
    const Eigen::VectorXd theta = curl.completeOrthogonalDecomposition().solve(target);
    auto s = zero_state(geom);
    for (int l = 0; l < geom.num_links(); ++l) s.theta[l] = wrap_angle(theta(l));
    for (double f : plaquette_fluxes(geom, s.theta)) CHECK(std::sin(f) == doctest::Approx(1.0).epsilon(1e-12));
    const double e0 = classical_energy(s, geom, c);
    const auto end = evolve(s, 1e-3, 10000, geom, c);
    CHECK(std::abs(classical_energy(end, geom, c) - e0) / e0 <= 1e-8);
  }

  TEST_CASE("property: Gauss charges are conserved step by step") {
    std::mt19937_64 rng(19);
    for (const auto& dims : {std::vector<int>{2, 2}, std::vector<int>{3, 3}, std::vector<int>{2, 2, 2}}) {
      const auto geom = build_lattice(dims);
      const auto c = CouplingParams::from_g(0.9);
      const auto s = random_state(geom, rng, kPi, 1.0);
      const auto g0 = gauss_charges(s, geom);
      double worst = 0.0;
      evolve(s, 0.01, 2000, geom, c, [&](const ClassicalState& cur, long) {
        const auto g = gauss_charges(cur, geom);
        for (std::size_t p = 0; p < g.size(); ++p) worst = std::max(worst, std::abs(g[p] - g0[p]));
      });
      CHECK(worst <= 1e-12);
    }
  }

  TEST_CASE("property: time reversal retraces the trajectory") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 5; ++trial) {
      const auto geom = build_lattice({3, 2});
      const auto c = CouplingParams::from_g(1.2);
      const auto s = random_state(geom, rng, 2.0, 0.7);
      const auto forward = evolve(s, 0.005, 1000, geom, c);
      auto back = time_reversed(evolve(time_reversed(forward), 0.005, 1000, geom, c));
      CHECK(state_distance(back, s) <= 1e-10);
    }
  }

  TEST_CASE("property: gauge shifts commute with evolution") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    const auto geom = build_lattice({3, 3});
    const auto c = CouplingParams::from_g(0.8);
    for (int trial = 0; trial < 5; ++trial) {
      const auto s = random_state(geom, rng, kPi, 0.5);
      std::vector<double> phi(geom.num_sites());
      for (auto& x : phi) x = u(rng);
      const auto a = gauge_shift(evolve(s, 0.01, 500, geom, c), geom, phi);
      const auto b = evolve(gauge_shift(s, geom, phi), 0.01, 500, geom, c);
      CHECK(state_distance(a, b) <= 1e-10);
    }
  }

  TEST_CASE("leapfrog energy error is second order") {
    std::mt19937_64 rng(41);
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    const auto s = random_state(geom, rng, 1.0, 0.5);
    const auto coarse = energy_history(s, 2e-3, 5000, geom, c);
    const auto fine = energy_history(s, 1e-3, 10000, geom, c);
    const double slope = std::log2(coarse.max_relative_deviation / fine.max_relative_deviation);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fine.max_gauss_violation <= 1e-12);
    CHECK(fine.secular_drift <= fine.max_relative_deviation);
  }

  TEST_CASE("weak-wave superposition") {
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    const auto modes = normal_modes(geom, c);
    const auto w1 = mode_initial_data(modes, 0, 1.0);
    const auto w2 = mode_initial_data(modes, 2, 1.0);
    const double dt = default_time_step(modes);
    CHECK(dt == doctest::Approx(0.05 / (2 * std::numbers::sqrt2)));
    const double T = 5.0;
    const double d1 = superposition_defect(geom, c, w1, w2, 0.2, T, dt);
    const double d2 = superposition_defect(geom, c, w1, w2, 0.1, T, dt);
    const double d3 = superposition_defect(geom, c, w1, w2, 0.05, T, dt);
    CHECK(d1 / d2 >= 3.5);
    CHECK(d3 < d2);
    CHECK(superposition_defect(geom, c, w1, zero_state(geom), 0.2, T, dt) <= 1e-13);
    CHECK_THROWS_AS(superposition_defect(geom, c, w1, w2, 0.0, T, dt), Error);
    CHECK_THROWS_AS(mode_initial_data(modes, 3, 1.0), Error);
  }

  TEST_CASE("trajectory CSV") {
    const auto geom = build_lattice({2, 2});
    const auto c = CouplingParams::from_g(1.0);
    const auto modes = normal_modes(geom, c);
    std::ostringstream out;
    const auto s = mode_initial_data(modes, 1, 0.1);
    const auto end = write_trajectory_csv(out, s, 0.01, 10, 5, geom, c, &modes);
    CHECK(end.time == doctest::Approx(0.1));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,energy,max_gauss,mode_0,mode_1,mode_2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);

    std::ostringstream zero;
    write_trajectory_csv(zero, zero_state(geom), 0.01, 3, 1, geom, c);
    CHECK(zero.str() == "time,energy,max_gauss\n0,0,0\n0.01,0,0\n0.02,0,0\n0.029999999999999999,0,0\n");
  }
}
