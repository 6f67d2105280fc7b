#pragma once

// Classical compact-abelian lattice dynamics: the Hamiltonian flow of
//   E = ep·Σ_ℓ E_ℓ² + mp·Σ_s (1 − cos Φ_s)
// integrated by kick-drift-kick leapfrog.

#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "latgauge/hamiltonian.hpp"
#include "latgauge/lattice.hpp"
#include "latgauge/perturb.hpp"

namespace latgauge {

struct ClassicalState {
  /// Per-link angle, kept in (−π, π].
  std::vector<double> theta;
  /// Per-link conjugate electric variable.
  std::vector<double> efield;
  double time = 0.0;
};

/// All-zero state on the lattice.
ClassicalState zero_state(const LatticeGeometry& geom);

/// Maps an angle into (−π, π].
double wrap_angle(double x) noexcept;

std::vector<double> plaquette_fluxes(const LatticeGeometry& geom, std::span<const double> theta);
double classical_energy(const ClassicalState& s, const LatticeGeometry& geom, const CouplingParams& c);
/// G_p = Σ_{ℓ ∋ p} sign·E_ℓ for every site.
std::vector<double> gauss_charges(const ClassicalState& s, const LatticeGeometry& geom);

/// One kick-drift-kick step. kInvalidParameter unless dt > 0.
ClassicalState step_leapfrog(const ClassicalState& s, double dt, const LatticeGeometry& geom,
                             const CouplingParams& c);

/// `observer` (optional) sees the state after every step with its step count.
ClassicalState evolve(ClassicalState s, double dt, long steps, const LatticeGeometry& geom, const CouplingParams& c,
                      const std::function<void(const ClassicalState&, long)>& observer = {});

/// Flips the electric field; evolving the result retraces the trajectory.
ClassicalState time_reversed(ClassicalState s);

/// θ_ℓ → θ_ℓ + φ(source) − φ(target).
ClassicalState gauge_shift(ClassicalState s, const LatticeGeometry& geom, std::span<const double> phi);

/// Largest per-component difference, angles compared modulo 2π.
double state_distance(const ClassicalState& a, const ClassicalState& b);

/// theta = amplitude·(mode shape), efield = 0.
ClassicalState mode_initial_data(const NormalModeSet& modes, int mode, double amplitude);

/// Linear combination of two states (angles wrapped).
ClassicalState combine(const ClassicalState& a, double wa, const ClassicalState& b, double wb);

/// Evolves amplitude·w1, amplitude·w2 and amplitude·(w1 + w2) to time T and
/// returns ‖evolved(sum) − evolved(1) − evolved(2)‖₂ / amplitude over the
/// stacked (theta, efield) vector, angle differences taken modulo 2π.
double superposition_defect(const LatticeGeometry& geom, const CouplingParams& c, const ClassicalState& wave1,
                            const ClassicalState& wave2, double amplitude, double T, double dt);

/// 0.05/ω_max.
double default_time_step(const NormalModeSet& modes);

struct EnergyHistory {
  double initial = 0.0;
  /// max_t |E(t) − E(0)| / E(0).
  double max_relative_deviation = 0.0;
  double final_relative_deviation = 0.0;
  /// Least-squares slope of the relative deviation times the run length.
  double secular_drift = 0.0;
  /// max_t max_p |G_p(t) − G_p(0)|.
  double max_gauss_violation = 0.0;
};

EnergyHistory energy_history(const ClassicalState& s, double dt, long steps, const LatticeGeometry& geom,
                             const CouplingParams& c);

/// Time series with columns time,energy,max_gauss,mode_0,…; one row every
/// `sample_every` steps plus the initial row. Mode amplitudes are the
/// projections of theta on the mode shapes.
ClassicalState write_trajectory_csv(std::ostream& out, const ClassicalState& s, double dt, long steps,
                                    long sample_every, const LatticeGeometry& geom, const CouplingParams& c,
                                    const NormalModeSet* modes = nullptr);

}  // namespace latgauge
