#include "qpms/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "parallel.hpp"
#include "qpms/error.hpp"
#include "qpms/metrics.hpp"

namespace qpms {

std::string to_string(PsoVariant v) { return v == PsoVariant::kVerbatim ? "verbatim-eq2" : "standard-delta"; }

PsoVariant parse_pso_variant(const std::string& s) {
  if (s == "verbatim-eq2") return PsoVariant::kVerbatim;
  if (s == "standard-delta") return PsoVariant::kStandardDelta;
  throw ConfigError(fmt::format("unknown PSO variant '{}'", s));
}

double WeightSchedule::at(double frac) const {
  frac = std::clamp(frac, 0.0, 1.0);
  switch (shape) {
    case Shape::kConstant: return initial;
    case Shape::kLinear: return initial + (final - initial) * frac;
    case Shape::kExponential:
      if (initial <= 0.0 || final <= 0.0) return initial + (final - initial) * frac;
      return initial * std::pow(final / initial, frac);
  }
  return initial;
}

void PsoConfig::validate() const {
  if (ensemble_size < 2) throw ConfigError("PSO ensemble needs at least two candidates");
  if (dims < 1) throw ConfigError("PSO needs at least one dimension");
  if (max_iters < 0) throw ConfigError("PSO max_iters must be non-negative");
  for (const auto* s : {&w, &w_p, &w_g}) {
    if (!(s->initial >= 0.0) || !(s->final >= 0.0)) throw ConfigError("PSO weights must be non-negative");
  }
  if (!(max_velocity > 0.0)) throw ConfigError("PSO max_velocity must be positive");
  if (initial_positions.size() > ensemble_size) throw ConfigError("more initial positions than candidates");
  for (const auto& p : initial_positions) {
    if (p.size() != dims) throw ConfigError("initial position has the wrong dimension");
  }
}

double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2 pi.
  return r >= kTwoPi ? 0.0 : r;
}

double wrap_difference(double a, double b) {
  double d = wrap_phase(a - b);
  return d > kPi ? d - kTwoPi : d;
}

PsoTrace pso_optimize(const Objective& objective, const PsoConfig& config) {
  SeededRandom random(config.seed);
  return pso_optimize(objective, config, random);
}

PsoTrace pso_optimize(const Objective& objective, const PsoConfig& config, RandomSource& random) {
  config.validate();
  const std::size_t n = config.ensemble_size;
  const std::size_t dims = config.dims;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> x(n, std::vector<double>(dims));
  std::vector<std::vector<double>> v(n, std::vector<double>(dims, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t d = 0; d < dims; ++d) {
      x[c][d] = c < config.initial_positions.size() ? wrap_phase(config.initial_positions[c][d])
                                                    : kTwoPi * random.uniform();
    }
  }

  PsoTrace trace;
  std::vector<double> value(n, neg_inf);
  std::vector<char> ok(n, 0);
  auto evaluate = [&] {
    detail::parallel_for(n, config.jobs, [&](std::size_t c) {
      double f = neg_inf;
      try {
        f = objective(x[c]);
      } catch (...) {
        f = std::numeric_limits<double>::quiet_NaN();
      }
      ok[c] = std::isfinite(f) ? 1 : 0;
      value[c] = f;
    });
    trace.evaluations += n;
  };

  auto pbest = x;
  std::vector<double> pbest_value(n, neg_inf);
  std::vector<double> gbest = x[0];
  double gbest_value = neg_inf;

  auto record = [&](int iter, double inertia) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = neg_inf;
    for (std::size_t c = 0; c < n; ++c) {
      if (!ok[c]) continue;
      lo = std::min(lo, value[c]);
      hi = std::max(hi, value[c]);
    }
    trace.iterations.push_back({iter, gbest_value, hi >= lo ? hi - lo : 0.0, inertia});
  };

  auto absorb = [&] {
    for (std::size_t c = 0; c < n; ++c) {
      if (!ok[c]) continue;
      if (value[c] > pbest_value[c]) {
        pbest_value[c] = value[c];
        pbest[c] = x[c];
      }
      if (value[c] > gbest_value) {
        gbest_value = value[c];
        gbest = x[c];
      }
    }
  };

  evaluate();
  for (std::size_t c = 0; c < n; ++c) {
    if (!ok[c]) trace.events.push_back(fmt::format("iteration 0: candidate {} returned a non-finite objective", c));
  }
  absorb();
  record(0, config.w.at(0.0));

  const std::size_t draws = config.per_dimension ? dims : 1;
  std::vector<std::vector<double>> r1(n, std::vector<double>(draws));
  std::vector<std::vector<double>> r2(n, std::vector<double>(draws));
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const double frac = config.max_iters > 1 ? static_cast<double>(iter - 1) / (config.max_iters - 1) : 0.0;
    const double w = config.w.at(frac);
    const double wp = config.w_p.at(frac);
    const double wg = config.w_g.at(frac);
    for (std::size_t c = 0; c < n; ++c) {
      for (auto& r : r1[c]) r = random.uniform();
      for (auto& r : r2[c]) r = random.uniform();
    }

    const auto previous_x = x;
    const auto previous_v = v;
    const auto previous_value = value;
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double a = r1[c][config.per_dimension ? d : 0];
        const double b = r2[c][config.per_dimension ? d : 0];
        if (config.variant == PsoVariant::kVerbatim) {
          x[c][d] = wrap_phase(w * x[c][d] + wp * a * pbest[c][d] + wg * b * gbest[d]);
        } else {
          double vel = w * v[c][d] + wp * a * wrap_difference(pbest[c][d], x[c][d]) +
                       wg * b * wrap_difference(gbest[d], x[c][d]);
          vel = std::clamp(vel, -config.max_velocity, config.max_velocity);
          v[c][d] = vel;
          x[c][d] = wrap_phase(x[c][d] + vel);
        }
      }
    }

    evaluate();
    for (std::size_t c = 0; c < n; ++c) {
      if (ok[c]) continue;
      trace.events.push_back(
          fmt::format("iteration {}: candidate {} returned a non-finite objective and was held", iter, c));
      x[c] = previous_x[c];
      v[c] = previous_v[c];
      value[c] = previous_value[c];
    }
    absorb();
    // Held candidates still count toward the spread at their previous value.
    for (std::size_t c = 0; c < n; ++c) ok[c] = std::isfinite(value[c]) ? 1 : 0;
    record(iter, w);
  }

  trace.best_phases = gbest;
  trace.best_objective = gbest_value;
  return trace;
}

CombSpec SelectivityObjective::comb(std::span<const double> phases) const {
  return CombSpec::from_polar(fitted_amplitudes, phases, layout.spacing_ghz, layout.center_wavelength_nm);
}

SelectivityObjective make_selectivity_objective(const SimulationSetup& setup, const ModeLabel& pump,
                                                const ModeLabel& desired_signal,
                                                const std::vector<ModeLabel>& distractors) {
  if (distractors.empty()) throw ContractError("selectivity objective needs at least one distractor");
  if (setup.crystal.diffraction || setup.crystal.depleted) {
    throw ContractError("selectivity objective runs on the separable path; disable diffraction and depletion");
  }
  const auto l = pump.common_l();
  if (!l) throw ContractError("pump label must share one spatial mode to be comb-shaped");

  FieldRequest request = setup.request(Role::kPump);
  request.temporal.check_comb_period(request.comb_layout.spacing_ghz);
  request.beam.use_comb = false;
  const auto plain = assemble_field(pump, request);
  const auto& factors = *plain.separable_cache();
  const CombFit fit = fit_comb_to_mode(factors.temporal, request.comb_layout, request.temporal,
                                       setup.pump.phase_only);

  std::vector<SpatioTemporalField> signals;
  signals.push_back(assemble_field(desired_signal, setup.request(Role::kSignal)));
  for (const auto& d : distractors) signals.push_back(assemble_field(d, setup.request(Role::kSignal)));
  for (const auto& s : signals) {
    if (!s.separable_cache()) throw ContractError("signal labels must be separable for the fast path");
  }

  SelectivityObjective out;
  out.fitted_amplitudes = fit.spec.amplitudes();
  out.fitted_phases = fit.spec.phases();
  out.layout = fit.spec;

  auto basis = std::make_shared<const CombBasis>(fit.spec, request.temporal);
  auto shared_signals = std::make_shared<const std::vector<SpatioTemporalField>>(std::move(signals));
  auto spatial = std::make_shared<const CVector>(factors.spatial);
  const auto amplitudes = out.fitted_amplitudes;
  const auto sg = request.spatial;
  const auto tg = request.temporal;
  const double carrier = request.beam.carrier_nm;
  out.objective = [=](std::span<const double> phases) {
    if (phases.size() != amplitudes.size()) throw ContractError("phase vector length must equal the line count");
    CVector weights(amplitudes.size());
    for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = std::polar(amplitudes[k], phases[k]);
    const auto pump_field = SpatioTemporalField::separable(sg, tg, carrier, *spatial, basis->synthesize(weights));
    std::vector<double> counts;
    counts.reserve(shared_signals->size());
    for (const auto& s : *shared_signals) {
      const auto r = simulate_pair(pump_field, s, setup);
      counts.push_back(detect_counts(r.coupled_energy, DetectorModel{setup.detector.fiber_waist_um, 1.0, {}}));
    }
    return selectivity(counts, 0).db;
  };
  return out;
}

}  // namespace qpms
