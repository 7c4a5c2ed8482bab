#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qpms/comb.hpp"
#include "qpms/engine.hpp"
#include "qpms/modes.hpp"

namespace qpms {

/// Phase vector -> value to maximize. Must be safe to call concurrently.
using Objective = std::function<double(std::span<const double>)>;

enum class PsoVariant {
  /// x <- wrap(w x + w_p R1 pbest + w_g R2 gbest); no velocity state.
  kVerbatim,
  /// v <- w v + w_p R1 (pbest - x) + w_g R2 (gbest - x), x <- wrap(x + v),
  /// with differences taken the short way round the circle.
  kStandardDelta,
};

std::string to_string(PsoVariant v);
PsoVariant parse_pso_variant(const std::string& s);

struct WeightSchedule {
  enum class Shape { kConstant, kLinear, kExponential };
  double initial = 1.0;
  double final = 1.0;
  Shape shape = Shape::kConstant;

  /// Weight at progress fraction `frac` in [0, 1].
  double at(double frac) const;
};

struct PsoConfig {
  std::size_t ensemble_size = 16;
  std::size_t dims = 37;
  WeightSchedule w{0.9, 0.4, WeightSchedule::Shape::kLinear};
  WeightSchedule w_p{1.5, 1.5, WeightSchedule::Shape::kConstant};
  WeightSchedule w_g{1.5, 1.5, WeightSchedule::Shape::kConstant};
  int max_iters = 100;
  std::uint64_t seed = 0;
  PsoVariant variant = PsoVariant::kStandardDelta;
  /// One R draw per coordinate (true) or one per candidate (false).
  bool per_dimension = true;
  /// Velocity clamp of the standard-delta variant (rad per iteration).
  double max_velocity = kPi;
  int jobs = 1;
  /// Optional starting points for the first candidates; the rest are uniform.
  std::vector<std::vector<double>> initial_positions;

  void validate() const;
};

/// Uniform draws in [0, 1). Replaceable so tests can feed recorded streams.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual double uniform() = 0;
};

class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : rng_(seed) {}
  double uniform() override { return dist_(rng_); }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

struct PsoIteration {
  int iteration = 0;
  double best_objective = 0.0;
  /// max - min over the candidates that evaluated finite this iteration.
  double spread = 0.0;
  double inertia = 0.0;
};

struct PsoTrace {
  std::vector<PsoIteration> iterations;
  std::vector<double> best_phases;
  double best_objective = 0.0;
  std::vector<std::string> events;
  std::size_t evaluations = 0;
};

/// Wraps into [0, 2 pi).
double wrap_phase(double phi);
/// Signed shortest difference a - b, in (-pi, pi].
double wrap_difference(double a, double b);

/// Maximizes `objective` over the phase torus. Iteration 0 is the initial
/// ensemble; each later iteration draws all of its random numbers first, then
/// moves the ensemble and evaluates it (optionally in parallel).
PsoTrace pso_optimize(const Objective& objective, const PsoConfig& config);
PsoTrace pso_optimize(const Objective& objective, const PsoConfig& config, RandomSource& random);

/// Selectivity of a comb-shaped pump against a fixed set of signals. The pump
/// envelope is refit onto the comb once; the phases are the free variables.
struct SelectivityObjective {
  Objective objective;
  std::vector<double> fitted_amplitudes;
  std::vector<double> fitted_phases;
  CombSpec layout;

  /// The comb that a given phase vector describes.
  CombSpec comb(std::span<const double> phases) const;
};

/// Builds S(phases) for `pump` with desired signal first, then the
/// distractors, all at zero delay on the separable fast path. Throws
/// ContractError when the setup cannot use the fast path, the pump has no
/// common spatial mode, or the distractor set is empty.
SelectivityObjective make_selectivity_objective(const SimulationSetup& setup, const ModeLabel& pump,
                                                const ModeLabel& desired_signal,
                                                const std::vector<ModeLabel>& distractors);

}  // namespace qpms
