#include <doctest.h>

#include <cmath>
#include <mutex>

#include "qpms/error.hpp"
#include "qpms/metrics.hpp"
#include "qpms/optimizer.hpp"

using namespace qpms;

namespace {

class Recorded final : public RandomSource {
 public:
  explicit Recorded(std::vector<double> values) : values_(std::move(values)) {}
  double uniform() override { return values_.at(next_++); }
  std::size_t used() const { return next_; }

 private:
  std::vector<double> values_;
  std::size_t next_ = 0;
};

struct Log {
  std::vector<std::vector<double>> points;
  Objective wrap(std::function<double(std::span<const double>)> f) {
    return [this, f](std::span<const double> x) {
      points.emplace_back(x.begin(), x.end());
      return f(x);
    };
  }
};

double bowl(std::span<const double> x) { return -std::pow(x[0] - 1.5, 2) - std::pow(x[1] - 1.0, 2); }

PsoConfig two_by_two(PsoVariant variant, int iters) {
  PsoConfig c;
  c.ensemble_size = 2;
  c.dims = 2;
  c.max_iters = iters;
  c.variant = variant;
  c.initial_positions = {{1.0, 2.0}, {3.0, 0.5}};
  return c;
}

}  // namespace

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_phase(kTwoPi) == 0.0);
  CHECK(wrap_phase(-1e-18) < kTwoPi);
  CHECK(wrap_difference(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
  CHECK(wrap_difference(kTwoPi - 0.1, 0.1) == doctest::Approx(-0.2));
}

TEST_CASE("verbatim rule reproduces hand-computed iterations") {
  Log log;
  // Per iteration: candidate 0 R1[2] R2[2], candidate 1 R1[2] R2[2].
  Recorded rnd({0.1, 0.2, 0.3, 0.4, 0.6, 0.6, 0.7, 0.8,  //
                0.9, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
  const auto trace = pso_optimize(log.wrap(bowl), two_by_two(PsoVariant::kVerbatim, 2), rnd);
  CHECK(rnd.used() == 16);
  REQUIRE(log.points.size() == 6);
  // iteration 1: w = 0.9, weights 1.5, pbest = start, gbest = candidate 0
  CHECK(log.points[2][0] == doctest::Approx(1.5));
  CHECK(log.points[2][1] == doctest::Approx(3.6));
  CHECK(log.points[3][0] == doctest::Approx(6.45 - kTwoPi));
  CHECK(log.points[3][1] == doctest::Approx(3.3));
  // iteration 2: w = 0.4; no candidate improved on its start
  CHECK(log.points[4][0] == doctest::Approx(2.25));
  CHECK(log.points[4][1] == doctest::Approx(2.64));
  CHECK(log.points[5][0] == doctest::Approx(0.4 * (6.45 - kTwoPi) + 2.7));
  CHECK(log.points[5][1] == doctest::Approx(3.795));
  CHECK(trace.iterations.size() == 3);
  CHECK(trace.iterations[2].inertia == doctest::Approx(0.4));
}

TEST_CASE("standard-delta step takes the short way round") {
  Log log;
  auto config = two_by_two(PsoVariant::kStandardDelta, 1);
  config.initial_positions[1] = {6.0, 0.5};
  Recorded rnd({0.1, 0.2, 0.3, 0.4, 0.6, 0.6, 0.7, 0.8});
  pso_optimize(log.wrap(bowl), config, rnd);
  REQUIRE(log.points.size() == 4);
  CHECK(log.points[2][0] == doctest::Approx(1.0));
  CHECK(log.points[2][1] == doctest::Approx(2.0));
  CHECK(log.points[3][0] == doctest::Approx(wrap_phase(6.0 + 1.05 * (1.0 - 6.0 + kTwoPi))));
  CHECK(log.points[3][1] == doctest::Approx(2.3));
}

TEST_CASE("constant objective keeps the first candidate and a flat trace") {
  PsoConfig c;
  c.dims = 4;
  c.max_iters = 10;
  const auto t = pso_optimize([](std::span<const double>) { return 3.0; }, c);
  CHECK(t.best_objective == 3.0);
  for (const auto& it : t.iterations) {
    CHECK(it.best_objective == 3.0);
    CHECK(it.spread == 0.0);
  }
  SeededRandom r(c.seed);
  for (std::size_t d = 0; d < c.dims; ++d) CHECK(t.best_phases[d] == kTwoPi * r.uniform());
}

TEST_CASE("global best never decreases and runs are seed-deterministic") {
  auto f = [](std::span<const double> x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::cos(3 * x[i] + i) + 0.3 * std::sin(x[i] * x[(i + 1) % x.size()]);
    return s;
  };
  PsoConfig c;
  c.dims = 6;
  c.max_iters = 60;
  c.seed = 99;
  for (auto variant : {PsoVariant::kVerbatim, PsoVariant::kStandardDelta}) {
    c.variant = variant;
    const auto a = pso_optimize(f, c);
    const auto b = pso_optimize(f, c);
    for (std::size_t i = 1; i < a.iterations.size(); ++i) {
      CHECK(a.iterations[i].best_objective >= a.iterations[i - 1].best_objective);
    }
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
      CHECK(a.iterations[i].best_objective == b.iterations[i].best_objective);
      CHECK(a.iterations[i].spread == b.iterations[i].spread);
    }
    CHECK(a.best_phases == b.best_phases);
    c.jobs = 3;  // parallel evaluation must not change the stream
    const auto p = pso_optimize(f, c);
    CHECK(p.best_phases == a.best_phases);
    c.jobs = 1;
  }
}

TEST_CASE("non-finite objectives hold the candidate and are logged") {
  int calls = 0;
  std::mutex m;
  auto f = [&](std::span<const double> x) -> double {
    std::lock_guard lock(m);
    ++calls;
    if (calls % 5 == 0) return NAN;
    if (calls % 7 == 0) throw std::runtime_error("boom");
    return -x[0];
  };
  PsoConfig c;
  c.dims = 2;
  c.max_iters = 20;
  const auto t = pso_optimize(f, c);
  CHECK_FALSE(t.events.empty());
  CHECK(std::isfinite(t.best_objective));
  for (std::size_t i = 1; i < t.iterations.size(); ++i) CHECK(t.iterations[i].best_objective >= t.iterations[i - 1].best_objective);
}

TEST_CASE("config validation") {
  PsoConfig c;
  c.ensemble_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = PsoConfig{};
  c.w.initial = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = PsoConfig{};
  c.dims = 3;
  c.initial_positions = {{1.0, 2.0}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_pso_variant("verbatim-eq2") == PsoVariant::kVerbatim);
  CHECK_THROWS_AS(parse_pso_variant("other"), ConfigError);
}

TEST_CASE("weight schedules") {
  WeightSchedule lin{0.9, 0.4, WeightSchedule::Shape::kLinear};
  CHECK(lin.at(0.0) == 0.9);
  CHECK(lin.at(1.0) == doctest::Approx(0.4));
  CHECK(lin.at(0.5) == doctest::Approx(0.65));
  WeightSchedule ex{1.0, 0.25, WeightSchedule::Shape::kExponential};
  CHECK(ex.at(0.5) == doctest::Approx(0.5));
}

TEST_CASE("standard-delta finds a hidden optimum on the torus") {
  const std::vector<double> target = {0.3, 6.1, 3.0, 1.2, 4.4, 5.5, 2.2, 0.05};
  auto f = [&](std::span<const double> x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(wrap_difference(x[i], target[i]), 2);
    return -s;
  };
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PsoConfig c;
    c.dims = 8;
    c.max_iters = 200;
    c.seed = seed;
    const auto t = pso_optimize(f, c);
    bool close = true;
    for (std::size_t i = 0; i < 8; ++i) close = close && std::abs(wrap_difference(t.best_phases[i], target[i])) < 0.1;
    ok += close;
  }
  CHECK(ok == 5);
}

TEST_CASE("selectivity objective") {
  SimulationSetup s;
  s.spatial = SpatialGrid{32, 32, 900.0, 900.0};
  s.pump.use_comb = true;
  const auto pump = parse_mode_tag("T1", Role::kPump);
  const auto t0 = parse_mode_tag("T0");
  const auto t1 = parse_mode_tag("T1");
  const auto obj = make_selectivity_objective(s, pump, t1, {t0});
  REQUIRE(obj.fitted_phases.size() == 37);

  // Same as a tomography row with the comb-shaped pump.
  const auto row = tomography({pump}, {t1, t0}, s);
  const double s0 = selectivity(row.counts[0], 0).db;
  CHECK(obj.objective(obj.fitted_phases) == doctest::Approx(s0).epsilon(1e-9));

  auto shifted = obj.fitted_phases;
  for (auto& p : shifted) p += 0.7;
  CHECK(obj.objective(shifted) == doctest::Approx(s0).epsilon(1e-9));

  // A linear ramp is a pump delay, and agrees with the delay scan at that delay.
  const double d = 1.0;
  auto ramp = obj.fitted_phases;
  for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] += kTwoPi * obj.layout.line_offset_thz(k) * d;
  const std::vector<double> delays = {0.0, d};
  const auto a = delay_scan(pump, t1, delays, s);
  const auto b = delay_scan(pump, t0, delays, s);
  const double expected = 10 * (std::log10(a.coupled_energy[1]) - std::log10(b.coupled_energy[1]));
  CHECK(obj.objective(ramp) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(a.coupled_energy[1] < a.coupled_energy[0]);
  CHECK(obj.objective(ramp) < s0);

  CHECK_THROWS_AS(make_selectivity_objective(s, pump, t1, {}), ContractError);
  const auto mixed = ModeLabel::superposition({{1, 0, 1.0}, {-1, 1, 1.0}}, Role::kPump);
  CHECK_THROWS_AS(make_selectivity_objective(s, mixed, t1, {t0}), ContractError);
  s.crystal.diffraction = true;
  CHECK_THROWS_AS(make_selectivity_objective(s, pump, t1, {t0}), ContractError);
}
