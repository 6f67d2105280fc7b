#include "latgauge/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "latgauge/error.hpp"

namespace latgauge {

namespace {

void check_sizes(const ClassicalState& s, const LatticeGeometry& geom) {
  const auto n1 = static_cast<std::size_t>(geom.num_links());
  if (s.theta.size() != n1 || s.efield.size() != n1) {
    throw Error(ErrorKind::kInvalidParameter, "classical state does not match the lattice link count");
  }
}

// dE/dt = −mp·Σ_s sign·sin Φ_s
void kick(ClassicalState& s, double h, const LatticeGeometry& geom, const CouplingParams& c) {
  const auto phi = plaquette_fluxes(geom, s.theta);
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    const double f = h * c.magnetic_prefactor * std::sin(phi[p]);
    for (const auto& sl : geom.plaquette(p)) s.efield[sl.link] -= sl.sign * f;
  }
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ClassicalState zero_state(const LatticeGeometry& geom) {
  const auto n1 = static_cast<std::size_t>(geom.num_links());
  return {std::vector<double>(n1, 0.0), std::vector<double>(n1, 0.0), 0.0};
}

double wrap_angle(double x) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);  // [−π, π]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

std::vector<double> plaquette_fluxes(const LatticeGeometry& geom, std::span<const double> theta) {
  std::vector<double> phi(geom.num_plaquettes(), 0.0);
  for (int p = 0; p < geom.num_plaquettes(); ++p) {
    for (const auto& sl : geom.plaquette(p)) phi[p] += sl.sign * theta[sl.link];
  }
  return phi;
}

double classical_energy(const ClassicalState& s, const LatticeGeometry& geom, const CouplingParams& c) {
  check_sizes(s, geom);
  double electric = 0.0;
  for (double e : s.efield) electric += e * e;
  double magnetic = 0.0;
  for (double f : plaquette_fluxes(geom, s.theta)) magnetic += 1.0 - std::cos(f);
  return c.electric_prefactor * electric + c.magnetic_prefactor * magnetic;
}

std::vector<double> gauss_charges(const ClassicalState& s, const LatticeGeometry& geom) {
  check_sizes(s, geom);
  std::vector<double> g(geom.num_sites(), 0.0);
  for (int x = 0; x < geom.num_sites(); ++x) {
    for (const auto& sl : geom.incidence(x)) g[x] += sl.sign * s.efield[sl.link];
  }
  return g;
}

ClassicalState step_leapfrog(const ClassicalState& s, double dt, const LatticeGeometry& geom,
                             const CouplingParams& c) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::kInvalidParameter, "dt must be positive");
  check_sizes(s, geom);
  ClassicalState out = s;
  kick(out, 0.5 * dt, geom, c);
  const double drift = 2.0 * c.electric_prefactor * dt;
  for (std::size_t l = 0; l < out.theta.size(); ++l) out.theta[l] += drift * out.efield[l];
  kick(out, 0.5 * dt, geom, c);
  for (double& t : out.theta) t = wrap_angle(t);
  out.time += dt;
  return out;
}

ClassicalState evolve(ClassicalState s, double dt, long steps, const LatticeGeometry& geom, const CouplingParams& c,
                      const std::function<void(const ClassicalState&, long)>& observer) {
  if (steps < 0) throw Error(ErrorKind::kInvalidParameter, "step count must be non-negative");
  for (long i = 1; i <= steps; ++i) {
    s = step_leapfrog(s, dt, geom, c);
    if (observer) observer(s, i);
  }
  return s;
}

ClassicalState time_reversed(ClassicalState s) {
  for (double& e : s.efield) e = -e;
  return s;
}

ClassicalState gauge_shift(ClassicalState s, const LatticeGeometry& geom, std::span<const double> phi) {
  check_sizes(s, geom);
  if (phi.size() != static_cast<std::size_t>(geom.num_sites())) {
    throw Error(ErrorKind::kInvalidParameter, "gauge shift needs one angle per site");
  }
  for (int l = 0; l < geom.num_links(); ++l) {
    s.theta[l] = wrap_angle(s.theta[l] + phi[geom.link_source(l)] - phi[geom.link_target(l)]);
  }
  return s;
}

double state_distance(const ClassicalState& a, const ClassicalState& b) {
  if (a.theta.size() != b.theta.size() || a.efield.size() != b.efield.size()) {
    throw Error(ErrorKind::kInvalidParameter, "states differ in size");
  }
  double d = 0.0;
  for (std::size_t l = 0; l < a.theta.size(); ++l) {
    d = std::max(d, std::abs(wrap_angle(a.theta[l] - b.theta[l])));
    d = std::max(d, std::abs(a.efield[l] - b.efield[l]));
  }
  return d;
}

ClassicalState mode_initial_data(const NormalModeSet& modes, int mode, double amplitude) {
  if (mode < 0 || mode >= static_cast<int>(modes.frequencies.size())) {
    throw Error(ErrorKind::kIndex, "mode " + std::to_string(mode) + " out of range");
  }
  const auto n1 = static_cast<std::size_t>(modes.shapes.rows());
  ClassicalState s{std::vector<double>(n1), std::vector<double>(n1, 0.0), 0.0};
  for (std::size_t l = 0; l < n1; ++l) {
    s.theta[l] = wrap_angle(amplitude * modes.shapes(static_cast<Eigen::Index>(l), mode));
  }
  return s;
}

ClassicalState combine(const ClassicalState& a, double wa, const ClassicalState& b, double wb) {
  if (a.theta.size() != b.theta.size() || a.efield.size() != b.efield.size()) {
    throw Error(ErrorKind::kInvalidParameter, "states differ in size");
  }
  ClassicalState out = a;
  for (std::size_t l = 0; l < a.theta.size(); ++l) {
    out.theta[l] = wrap_angle(wa * a.theta[l] + wb * b.theta[l]);
    out.efield[l] = wa * a.efield[l] + wb * b.efield[l];
  }
  out.time = 0.0;
  return out;
}

double superposition_defect(const LatticeGeometry& geom, const CouplingParams& c, const ClassicalState& wave1,
                            const ClassicalState& wave2, double amplitude, double T, double dt) {
  if (!(amplitude > 0.0)) throw Error(ErrorKind::kInvalidParameter, "amplitude must be positive");
  if (!(T >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "T must be non-negative");
  check_sizes(wave1, geom);
  check_sizes(wave2, geom);
  const auto steps = static_cast<long>(std::llround(T / dt));
  const auto s1 = evolve(combine(wave1, amplitude, wave2, 0.0), dt, steps, geom, c);
  const auto s2 = evolve(combine(wave1, 0.0, wave2, amplitude), dt, steps, geom, c);
  const auto s12 = evolve(combine(wave1, amplitude, wave2, amplitude), dt, steps, geom, c);
  double sum = 0.0;
  for (std::size_t l = 0; l < s1.theta.size(); ++l) {
    const double dt_ = wrap_angle(s12.theta[l] - s1.theta[l] - s2.theta[l]);
    const double de = s12.efield[l] - s1.efield[l] - s2.efield[l];
    sum += dt_ * dt_ + de * de;
  }
  return std::sqrt(sum) / amplitude;
}

double default_time_step(const NormalModeSet& modes) {
  if (modes.frequencies.empty()) throw Error(ErrorKind::kInvalidParameter, "no oscillating modes");
  return 0.05 / modes.frequencies.back();
}

EnergyHistory energy_history(const ClassicalState& s, double dt, long steps, const LatticeGeometry& geom,
                             const CouplingParams& c) {
  EnergyHistory h;
  h.initial = classical_energy(s, geom, c);
  if (!(h.initial > 0.0)) throw Error(ErrorKind::kInvalidParameter, "relative drift needs positive energy");
  const auto g0 = gauss_charges(s, geom);
  // Running sums for the least-squares slope of deviation against step.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double last = 0.0;
  evolve(s, dt, steps, geom, c, [&](const ClassicalState& cur, long i) {
    const double dev = (classical_energy(cur, geom, c) - h.initial) / h.initial;
    h.max_relative_deviation = std::max(h.max_relative_deviation, std::abs(dev));
    last = dev;
    const auto x = static_cast<double>(i);
    sx += x;
    sy += dev;
    sxx += x * x;
    sxy += x * dev;
    const auto gi = gauss_charges(cur, geom);
    for (std::size_t p = 0; p < gi.size(); ++p) {
      h.max_gauss_violation = std::max(h.max_gauss_violation, std::abs(gi[p] - g0[p]));
    }
  });
  h.final_relative_deviation = std::abs(last);
  if (steps > 1) {
    const auto n = static_cast<double>(steps);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    h.secular_drift = std::abs(slope) * n;
  }
  return h;
}

ClassicalState write_trajectory_csv(std::ostream& out, const ClassicalState& s, double dt, long steps,
                                    long sample_every, const LatticeGeometry& geom, const CouplingParams& c,
                                    const NormalModeSet* modes) {
  if (sample_every < 1) throw Error(ErrorKind::kInvalidParameter, "sample_every must be at least 1");
  const int nmodes = modes ? static_cast<int>(modes->frequencies.size()) : 0;
  out << "time,energy,max_gauss";
  for (int k = 0; k < nmodes; ++k) out << ",mode_" << k;
  out << '\n';
  const auto g0 = gauss_charges(s, geom);
  auto row = [&](const ClassicalState& cur) {
    const auto gi = gauss_charges(cur, geom);
    double worst = 0.0;
    for (std::size_t p = 0; p < gi.size(); ++p) worst = std::max(worst, std::abs(gi[p] - g0[p]));
    out << g17(cur.time) << ',' << g17(classical_energy(cur, geom, c)) << ',' << g17(worst);
    for (int k = 0; k < nmodes; ++k) {
      double a = 0.0;
      for (std::size_t l = 0; l < cur.theta.size(); ++l) {
        a += modes->shapes(static_cast<Eigen::Index>(l), k) * cur.theta[l];
      }
      out << ',' << g17(a);
    }
    out << '\n';
  };
  row(s);
  return evolve(s, dt, steps, geom, c, [&](const ClassicalState& cur, long i) {
    if (i % sample_every == 0) row(cur);
  });
}

}  // namespace latgauge
