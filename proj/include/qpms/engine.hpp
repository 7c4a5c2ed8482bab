#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpms/comb.hpp"
#include "qpms/medium.hpp"
#include "qpms/modes.hpp"

namespace qpms {

struct StepRecord {
  double z_cm;
  double sf_energy;
  double signal_energy;  ///< tracked only for the depleted variant, else 0
};

struct PropagationOptions {
  /// Relative L2 change allowed between a run and its halved-step re-run.
  double tolerance = 1e-4;
  int max_steps = 4096;
  /// Skip the separable fast path even when both inputs allow it.
  bool force_full = false;
};

struct PropagationResult {
  SpatioTemporalField sf_field;
  double sf_energy = 0.0;
  /// One record per step of the returned (finest) run.
  std::vector<StepRecord> step_diagnostics;
  bool converged = false;
  int steps = 0;
  double refinement_error = 0.0;
  bool fast_path = false;
  /// Output signal, populated by the depleted variant only.
  std::optional<SpatioTemporalField> signal_out;
};

/// One-dimensional temporal solve used by the separable fast path:
/// d a/dz = i kappa p(t) s(t) exp(i dk z) - walkoff d a/dt.
struct TemporalPropagation {
  CVector sf;
  std::vector<StepRecord> diagnostics;
  bool converged = false;
  int steps = 0;
  double refinement_error = 0.0;
};

TemporalPropagation propagate_temporal(std::span<const cplx> pump, std::span<const cplx> signal,
                                       const CrystalSpec& crystal, const TemporalGrid& grid,
                                       const PropagationOptions& options = {});

/// Strang split-step SFG with step-doubling control. Runs the separable fast
/// path when both fields carry factor caches and neither diffraction nor
/// depletion is enabled, otherwise the full (x, y, t) path.
PropagationResult propagate_sfg(const SpatioTemporalField& pump, const SpatioTemporalField& signal,
                                const CrystalSpec& crystal, const PropagationOptions& options = {});

struct DetectorModel {
  /// Waist of the fibre mode projected back to the crystal plane (um).
  double fiber_waist_um = 212.13203435596427;
  double scale = 1.0;
  std::optional<std::uint64_t> poisson_seed;

  void validate() const;
};

struct CoupledOutput {
  CVector envelope;  ///< projection onto the fibre mode at each time sample
  double coupled_energy = 0.0;
  double field_energy = 0.0;
};

CoupledOutput smf_couple(const SpatioTemporalField& field, const DetectorModel& detector);

/// scale * energy, or a Poisson draw with that mean when the detector has a
/// seed. `stream` separates independent draws under one seed.
double detect_counts(double coupled_energy, const DetectorModel& detector, std::uint64_t stream = 0);

/// splitmix64 finalizer, used for counter-based seeding.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Everything needed to turn a (pump, signal) label pair into counts.
struct SimulationSetup {
  SpatialGrid spatial;
  TemporalGrid temporal;
  CrystalSpec crystal;
  DetectorModel detector;
  BeamSettings pump{300.0, 2.0, 1551.0, false, false};
  BeamSettings signal{300.0, 2.0, 1559.0, false, false};
  CombSpec comb_layout = CombSpec::flat();
  PropagationOptions propagation;
  /// Uniform delay offset amplitude per trial; resolved by the scan maximum.
  double jitter_ps = 0.0;
  std::uint64_t seed = 0;
  int jobs = 1;

  FieldRequest request(Role role, double delay_ps = 0.0) const;
};

struct PairResult {
  double coupled_energy = 0.0;
  double sf_energy = 0.0;
  bool converged = true;
};

PairResult simulate_pair(const SpatioTemporalField& pump, const SpatioTemporalField& signal,
                         const SimulationSetup& setup);
PairResult simulate_pair(const ModeLabel& pump, const ModeLabel& signal, const SimulationSetup& setup,
                         double delay_ps = 0.0);

struct DelayTrace {
  std::vector<double> delays_ps;
  std::vector<double> coupled_energy;
  std::vector<double> counts;
  /// Per point; empty string when the point succeeded.
  std::vector<std::string> errors;
  double zero_delay_counts = 0.0;
  double zero_delay_energy = 0.0;
  double peak_energy = 0.0;
  double jitter_offset_ps = 0.0;
};

/// Full propagate -> couple -> detect per delay (pump delayed). `delays_ps`
/// must be sorted and contain 0.0 exactly.
DelayTrace delay_scan(const ModeLabel& pump, const ModeLabel& signal, std::span<const double> delays_ps,
                      const SimulationSetup& setup, std::uint64_t stream = 0);

/// k * step for every integer k with start <= k * step <= stop.
std::vector<double> delay_grid(double start_ps, double stop_ps, double step_ps);

}  // namespace qpms
