#include "qpms/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/core.h>

#include "qpms/error.hpp"
#include "qpms/fft.hpp"

namespace qpms {
namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double relative_l2(std::span<const cplx> fine, std::span<const cplx> coarse) {
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    diff += std::norm(fine[i] - coarse[i]);
    ref += std::norm(fine[i]);
  }
  if (ref == 0.0) return diff == 0.0 ? 0.0 : 1.0;
  return std::sqrt(diff / ref);
}

bool is_identity(std::span<const cplx> m) {
  return std::all_of(m.begin(), m.end(), [](cplx v) { return v == cplx(1.0, 0.0); });
}

CVector walkoff_multiplier(const CrystalSpec& crystal, const TemporalGrid& grid, double dz) {
  CVector m(grid.nt);
  for (std::size_t k = 0; k < grid.nt; ++k) {
    m[k] = std::polar(1.0, -kTwoPi * grid.f(k) * crystal.walkoff_ps_per_cm * dz);
  }
  return m;
}

void apply_temporal(CVector& a, std::span<const cplx> multiplier) {
  if (is_identity(multiplier)) return;
  fft::forward(a);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= multiplier[k];
  fft::inverse(a);
}

/// Step-doubling driver: run(n) until run(2n) agrees with run(n).
template <class State>
struct Adaptive {
  State state;
  int steps = 0;
  double error = 0.0;
  bool converged = false;
};

template <class State, class Run, class Flatten>
Adaptive<State> adapt(Run&& run, Flatten&& flatten, int initial_steps, const PropagationOptions& options) {
  Adaptive<State> out;
  int n = initial_steps;
  State coarse = run(n);
  while (true) {
    State fine = run(2 * n);
    out.error = relative_l2(flatten(fine), flatten(coarse));
    out.steps = 2 * n;
    if (out.error < options.tolerance || 4 * n > options.max_steps) {
      out.converged = out.error < options.tolerance;
      out.state = std::move(fine);
      return out;
    }
    n *= 2;
    coarse = std::move(fine);
  }
}

struct TemporalRun {
  CVector sf;
  std::vector<StepRecord> diagnostics;
};

TemporalRun run_temporal(std::span<const cplx> product, const CrystalSpec& crystal, const TemporalGrid& grid,
                         int steps) {
  const double h = crystal.length_cm / steps;
  const CVector half = walkoff_multiplier(crystal, grid, 0.5 * h);
  const CVector full = walkoff_multiplier(crystal, grid, h);
  const cplx source = cplx(0.0, crystal.kappa * h * sinc(0.5 * crystal.delta_k_rad_per_cm * h));

  TemporalRun run;
  run.sf.assign(grid.nt, cplx{});
  run.diagnostics.reserve(static_cast<std::size_t>(steps));
  // Consecutive half steps of the Strang sequence are fused into full steps.
  for (int n = 0; n < steps; ++n) {
    if (n > 0) apply_temporal(run.sf, full);
    const double z_mid = (n + 0.5) * h;
    const cplx drive = source * std::polar(1.0, crystal.delta_k_rad_per_cm * z_mid);
    for (std::size_t i = 0; i < grid.nt; ++i) run.sf[i] += drive * product[i];
    run.diagnostics.push_back({(n + 1) * h, norm_sq(run.sf, grid.dt()), 0.0});
  }
  // The first half step acts on a zero field, so only the trailing one remains.
  apply_temporal(run.sf, half);
  return run;
}

struct FullState {
  CVector pump;
  CVector signal;
  CVector sf;
  std::vector<StepRecord> diagnostics;
};

class FullPropagator {
 public:
  FullPropagator(const SpatioTemporalField& pump, const SpatioTemporalField& signal, const CrystalSpec& crystal,
                 double sf_carrier_nm)
      : crystal_(crystal),
        sg_(pump.spatial_grid()),
        tg_(pump.temporal_grid()),
        pump_nm_(pump.carrier_nm()),
        signal_nm_(signal.carrier_nm()),
        sf_nm_(sf_carrier_nm),
        pump0_(pump.to_dense()),
        signal0_(signal.to_dense()) {
    dims_ = {static_cast<int>(sg_.nx), static_cast<int>(sg_.ny), static_cast<int>(tg_.nt)};
  }

  FullState run(int steps) const {
    const double h = crystal_.length_cm / steps;
    const auto pump_half = linear_step_operator(crystal_, FieldRole::kPump, 0.5 * h, sg_, tg_, pump_nm_);
    const auto pump_full = linear_step_operator(crystal_, FieldRole::kPump, h, sg_, tg_, pump_nm_);
    const auto sig_half = linear_step_operator(crystal_, FieldRole::kSignal, 0.5 * h, sg_, tg_, signal_nm_);
    const auto sig_full = linear_step_operator(crystal_, FieldRole::kSignal, h, sg_, tg_, signal_nm_);
    const auto sf_half = linear_step_operator(crystal_, FieldRole::kSum, 0.5 * h, sg_, tg_, sf_nm_);
    const auto sf_full = linear_step_operator(crystal_, FieldRole::kSum, h, sg_, tg_, sf_nm_);
    const double cell = sg_.cell_area() * tg_.dt();

    FullState s{pump0_, signal0_, CVector(pump0_.size()), {}};
    s.diagnostics.reserve(static_cast<std::size_t>(steps));
    apply(s.pump, pump_half);
    apply(s.signal, sig_half);
    for (int n = 0; n < steps; ++n) {
      if (n > 0) {
        apply(s.pump, pump_full);
        apply(s.signal, sig_full);
        apply(s.sf, sf_full);
      }
      nonlinear(s, (n + 0.5) * h, h);
      s.diagnostics.push_back({(n + 1) * h, norm_sq(s.sf, cell), crystal_.depleted ? norm_sq(s.signal, cell) : 0.0});
    }
    apply(s.sf, sf_half);
    if (crystal_.depleted) apply(s.signal, sig_half);
    return s;
  }

  const SpatialGrid& spatial() const { return sg_; }
  const TemporalGrid& temporal() const { return tg_; }

 private:
  void apply(CVector& field, const LinearStep& step) const {
    const bool temporal_identity = is_identity(step.temporal);
    if (!step.has_spatial()) {
      if (temporal_identity) return;
      const std::size_t nt = tg_.nt;
      for (std::size_t p = 0; p < sg_.size(); ++p) {
        std::span<cplx> line(field.data() + p * nt, nt);
        fft::forward(line);
        for (std::size_t k = 0; k < nt; ++k) line[k] *= step.temporal[k];
        fft::inverse(line);
      }
      return;
    }
    fft::forward(field, dims_);
    const std::size_t nt = tg_.nt;
    for (std::size_t p = 0; p < sg_.size(); ++p) {
      for (std::size_t k = 0; k < nt; ++k) field[p * nt + k] *= step.spatial[p] * step.temporal[k];
    }
    fft::inverse(field, dims_);
  }

  void nonlinear(FullState& s, double z_mid, double h) const {
    const double dk = crystal_.delta_k_rad_per_cm;
    const cplx phase = std::polar(1.0, dk * z_mid);
    if (!crystal_.depleted) {
      const cplx drive = cplx(0.0, crystal_.kappa * h * sinc(0.5 * dk * h)) * phase;
      for (std::size_t i = 0; i < s.sf.size(); ++i) s.sf[i] += drive * s.pump[i] * s.signal[i];
      return;
    }
    // Exact exponential of d(sf, s)/dz = i [[0, c], [c*, 0]] (sf, s) with the
    // pump frozen over the step; unitary, so |s|^2 + |sf|^2 is conserved.
    for (std::size_t i = 0; i < s.sf.size(); ++i) {
      const cplx c = crystal_.kappa * s.pump[i] * phase;
      const double g = std::abs(c);
      if (g == 0.0) continue;
      const cplx u = c / g;
      const double co = std::cos(g * h);
      const double si = std::sin(g * h);
      const cplx a = s.sf[i];
      const cplx b = s.signal[i];
      s.sf[i] = co * a + cplx(0.0, si) * u * b;
      s.signal[i] = cplx(0.0, si) * std::conj(u) * a + co * b;
    }
  }

  CrystalSpec crystal_;
  SpatialGrid sg_;
  TemporalGrid tg_;
  double pump_nm_;
  double signal_nm_;
  double sf_nm_;
  CVector pump0_;
  CVector signal0_;
  std::array<int, 3> dims_{};
};

}  // namespace

TemporalPropagation propagate_temporal(std::span<const cplx> pump, std::span<const cplx> signal,
                                       const CrystalSpec& crystal, const TemporalGrid& grid,
                                       const PropagationOptions& options) {
  crystal.validate();
  if (pump.size() != grid.nt || signal.size() != grid.nt) {
    throw ContractError("temporal envelopes do not match the grid");
  }
  CVector product(grid.nt);
  for (std::size_t i = 0; i < grid.nt; ++i) product[i] = pump[i] * signal[i];

  auto result = adapt<TemporalRun>(
      [&](int n) { return run_temporal(product, crystal, grid, n); },
      [](const TemporalRun& r) { return std::span<const cplx>(r.sf); }, crystal.nz_steps, options);
  return {std::move(result.state.sf), std::move(result.state.diagnostics), result.converged, result.steps,
          result.error};
}

PropagationResult propagate_sfg(const SpatioTemporalField& pump, const SpatioTemporalField& signal,
                                const CrystalSpec& crystal, const PropagationOptions& options) {
  crystal.validate();
  if (!(pump.spatial_grid() == signal.spatial_grid()) || !(pump.temporal_grid() == signal.temporal_grid())) {
    throw ContractError("pump and signal fields are sampled on different grids");
  }
  const auto& sg = pump.spatial_grid();
  const auto& tg = pump.temporal_grid();
  const double sf_nm = sf_wavelength_nm(pump.carrier_nm(), signal.carrier_nm());

  const bool fast = !options.force_full && !crystal.diffraction && !crystal.depleted &&
                    pump.separable_cache() && signal.separable_cache();
  if (fast) {
    const auto& ps = *pump.separable_cache();
    const auto& ss = *signal.separable_cache();
    auto temporal = propagate_temporal(ps.temporal, ss.temporal, crystal, tg, options);
    CVector spatial(sg.size());
    for (std::size_t p = 0; p < spatial.size(); ++p) spatial[p] = ps.spatial[p] * ss.spatial[p];
    PropagationResult result{
        SpatioTemporalField::separable(sg, tg, sf_nm, std::move(spatial), std::move(temporal.sf)),
        0.0, {}, temporal.converged, temporal.steps, temporal.refinement_error, true, std::nullopt};
    // Rescale the temporal-only ledger by the spatial product energy.
    const double spatial_energy = norm_sq(result.sf_field.separable_cache()->spatial, sg.cell_area());
    for (auto& rec : temporal.diagnostics) rec.sf_energy *= spatial_energy;
    result.step_diagnostics = std::move(temporal.diagnostics);
    result.sf_energy = result.sf_field.energy();
    return result;
  }

  const FullPropagator propagator(pump, signal, crystal, sf_nm);
  auto adapted = adapt<FullState>(
      [&](int n) { return propagator.run(n); },
      [](const FullState& s) { return std::span<const cplx>(s.sf); }, crystal.nz_steps, options);
  PropagationResult result{SpatioTemporalField(sg, tg, sf_nm, std::move(adapted.state.sf)),
                           0.0,
                           std::move(adapted.state.diagnostics),
                           adapted.converged,
                           adapted.steps,
                           adapted.error,
                           false,
                           std::nullopt};
  if (crystal.depleted) {
    result.signal_out = SpatioTemporalField(sg, tg, signal.carrier_nm(), std::move(adapted.state.signal));
  }
  result.sf_energy = result.sf_field.energy();
  return result;
}

void DetectorModel::validate() const {
  if (!(fiber_waist_um > 0.0)) throw ConfigError("fibre mode waist must be positive");
  if (!(scale > 0.0)) throw ConfigError("detector scale must be positive");
}

CoupledOutput smf_couple(const SpatioTemporalField& field, const DetectorModel& detector) {
  detector.validate();
  const auto& sg = field.spatial_grid();
  const auto& tg = field.temporal_grid();
  const CVector mode = gaussian_spot(detector.fiber_waist_um, sg);
  CoupledOutput out;
  out.field_energy = field.energy();
  out.envelope.assign(tg.nt, cplx{});
  if (const auto& sep = field.separable_cache(); sep && !field.has_dense()) {
    const cplx c = inner(mode, sep->spatial, sg.cell_area());
    for (std::size_t it = 0; it < tg.nt; ++it) out.envelope[it] = c * sep->temporal[it];
  } else {
    const CVector dense = field.to_dense();
    for (std::size_t p = 0; p < sg.size(); ++p) {
      const cplx f = std::conj(mode[p]) * sg.cell_area();
      if (f == cplx{}) continue;
      for (std::size_t it = 0; it < tg.nt; ++it) out.envelope[it] += f * dense[p * tg.nt + it];
    }
  }
  out.coupled_energy = norm_sq(out.envelope, tg.dt());
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double detect_counts(double coupled_energy, const DetectorModel& detector, std::uint64_t stream) {
  if (!(coupled_energy >= 0.0)) throw ContractError("coupled energy must be non-negative");
  const double mean = detector.scale * coupled_energy;
  if (!detector.poisson_seed || mean == 0.0) return mean;
  std::mt19937_64 rng(mix_seed(*detector.poisson_seed, stream));
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

FieldRequest SimulationSetup::request(Role role, double delay_ps) const {
  FieldRequest r{spatial, temporal, role == Role::kPump ? pump : signal, comb_layout, delay_ps};
  r.comb_layout.center_wavelength_nm = r.beam.carrier_nm;
  return r;
}

PairResult simulate_pair(const SpatioTemporalField& pump, const SpatioTemporalField& signal,
                         const SimulationSetup& setup) {
  const auto prop = propagate_sfg(pump, signal, setup.crystal, setup.propagation);
  const auto coupled = smf_couple(prop.sf_field, setup.detector);
  return {coupled.coupled_energy, prop.sf_energy, prop.converged};
}

PairResult simulate_pair(const ModeLabel& pump, const ModeLabel& signal, const SimulationSetup& setup,
                         double delay_ps) {
  return simulate_pair(assemble_field(pump, setup.request(Role::kPump, delay_ps)),
                       assemble_field(signal, setup.request(Role::kSignal)), setup);
}

DelayTrace delay_scan(const ModeLabel& pump, const ModeLabel& signal, std::span<const double> delays_ps,
                      const SimulationSetup& setup, std::uint64_t stream) {
  if (!std::is_sorted(delays_ps.begin(), delays_ps.end())) throw ConfigError("delay grid must be sorted");
  const auto zero = std::find(delays_ps.begin(), delays_ps.end(), 0.0);
  if (zero == delays_ps.end()) throw ConfigError("delay grid must contain 0.0 ps exactly");

  DelayTrace trace;
  trace.delays_ps.assign(delays_ps.begin(), delays_ps.end());
  if (setup.jitter_ps > 0.0) {
    std::mt19937_64 rng(mix_seed(setup.seed ^ 0x6A177E5ULL, stream));
    trace.jitter_offset_ps = std::uniform_real_distribution<double>(-setup.jitter_ps, setup.jitter_ps)(rng);
  }

  const auto signal_field = assemble_field(signal, setup.request(Role::kSignal));
  const auto n = delays_ps.size();
  trace.coupled_energy.assign(n, 0.0);
  trace.counts.assign(n, 0.0);
  trace.errors.assign(n, std::string{});
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const auto pump_field = assemble_field(pump, setup.request(Role::kPump, delays_ps[i] + trace.jitter_offset_ps));
      const auto r = simulate_pair(pump_field, signal_field, setup);
      trace.coupled_energy[i] = r.coupled_energy;
      trace.counts[i] = detect_counts(r.coupled_energy, setup.detector, mix_seed(stream, i));
    } catch (const std::exception& e) {
      trace.coupled_energy[i] = std::nan("");
      trace.counts[i] = std::nan("");
      trace.errors[i] = e.what();
    }
  }
  const auto z = static_cast<std::size_t>(zero - delays_ps.begin());
  trace.zero_delay_counts = trace.counts[z];
  trace.zero_delay_energy = trace.coupled_energy[z];
  for (double e : trace.coupled_energy) {
    if (std::isfinite(e)) trace.peak_energy = std::max(trace.peak_energy, e);
  }
  return trace;
}

std::vector<double> delay_grid(double start_ps, double stop_ps, double step_ps) {
  if (!(step_ps > 0.0) || start_ps > stop_ps) throw ConfigError("delay grid needs step > 0 and start <= stop");
  const auto first = static_cast<long long>(std::ceil(start_ps / step_ps - 1e-9));
  const auto last = static_cast<long long>(std::floor(stop_ps / step_ps + 1e-9));
  std::vector<double> out;
  for (long long k = first; k <= last; ++k) out.push_back(static_cast<double>(k) * step_ps);
  return out;
}

}  // namespace qpms
