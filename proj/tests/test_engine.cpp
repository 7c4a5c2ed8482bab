#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qpms/engine.hpp"
#include "qpms/error.hpp"

using namespace qpms;

namespace {

std::vector<oracle::cplx> walkoff_reference(int mp, int ms, double width, const CrystalSpec& c, const TemporalGrid& g) {
  auto source = [&](double t) { return oracle::cplx(oracle::hg(mp, width, t) * oracle::hg(ms, width, t), 0.0); };
  std::vector<oracle::cplx> out;
  for (std::size_t i = 0; i < g.nt; ++i) {
    out.push_back(oracle::walkoff_solution(source, c.kappa, c.walkoff_ps_per_cm, c.length_cm, c.delta_k_rad_per_cm, g.t(i)));
  }
  return out;
}

double radial_overlap_ratio(int l, double w, double wf) {
  // |<G|P>|^2 / (<G|G><P|P>) with P = r^{2|l|} exp(-2 r^2 / w^2), G = exp(-r^2 / wf^2)
  // for l = 0 net OAM, integrated radially.
  const int a = std::abs(l);
  double gp = 0, gg = 0, pp = 0;
  const double dr = w / 4000.0;
  for (int i = 1; i < 40000; ++i) {
    const double r = i * dr;
    const double p = std::pow(r, 2 * a) * std::exp(-2 * r * r / (w * w));
    const double g = std::exp(-r * r / (wf * wf));
    gp += g * p * r;
    gg += g * g * r;
    pp += p * p * r;
  }
  return gp * gp / (gg * pp);
}

}  // namespace

TEST_CASE("fast path matches the walk-off characteristic solution") {
  const TemporalGrid g;
  for (double dk : {0.0, 3.0}) {
    for (auto [mp, ms] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
      CrystalSpec c;
      c.delta_k_rad_per_cm = dk;
      const auto r = propagate_temporal(hg_temporal_mode(mp, 2.0, g), hg_temporal_mode(ms, 2.0, g), c, g);
      CHECK(r.converged);
      const auto ref = walkoff_reference(mp, ms, 2.0, c, g);
      CHECK(oracle::relative_l2(std::vector<oracle::cplx>(r.sf.begin(), r.sf.end()), ref) < 1e-3);
    }
  }
}

TEST_CASE("zero walk-off gives SF energy growing as L^2") {
  const TemporalGrid g;
  CrystalSpec c;
  c.walkoff_ps_per_cm = 0.0;
  const auto p = hg_temporal_mode(0, 2.0, g);
  c.length_cm = 1.0;
  const double e1 = norm_sq(propagate_temporal(p, p, c, g).sf, g.dt());
  c.length_cm = 2.0;
  const double e2 = norm_sq(propagate_temporal(p, p, c, g).sf, g.dt());
  CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("full path agrees with the fast path on separable inputs") {
  const SpatialGrid sg{16, 16, 300.0, 300.0};
  const TemporalGrid tg{64, 16.0};
  FieldRequest req{sg, tg, BeamSettings{100.0, 2.0, 1551.0}, CombSpec::flat(), 0.0};
  const auto pump = assemble_field(ModeLabel::basis(1, 1, Role::kPump), req);
  req.beam.carrier_nm = 1559.0;
  const auto signal = assemble_field(ModeLabel::basis(-1, 0), req);
  CrystalSpec c;
  c.delta_k_rad_per_cm = 1.0;
  const auto fast = propagate_sfg(pump, signal, c);
  REQUIRE(fast.fast_path);
  PropagationOptions full_opts;
  full_opts.force_full = true;
  const auto full = propagate_sfg(pump, signal, c, full_opts);
  REQUIRE_FALSE(full.fast_path);
  const auto a = fast.sf_field.to_dense();
  const auto b = full.sf_field.to_dense();
  CHECK(oracle::relative_l2(std::vector<oracle::cplx>(b.begin(), b.end()), std::vector<oracle::cplx>(a.begin(), a.end())) < 1e-6);
  CHECK(fast.sf_energy == doctest::Approx(full.sf_energy).epsilon(1e-6));
  REQUIRE(!fast.step_diagnostics.empty());
  CHECK(fast.step_diagnostics.back().sf_energy == doctest::Approx(fast.sf_energy).epsilon(1e-12));
}

TEST_CASE("split-step with diffraction matches fine-step RK4") {
  const SpatialGrid sg{16, 16, 300.0, 300.0};
  const TemporalGrid tg{64, 16.0};
  FieldRequest req{sg, tg, BeamSettings{100.0, 2.0, 1551.0}, CombSpec::flat(), 0.0};
  const auto pump = assemble_field(ModeLabel::basis(1, 0, Role::kPump), req);
  req.beam.carrier_nm = 1559.0;
  const auto signal = assemble_field(ModeLabel::basis(0, 1), req);
  CrystalSpec c;
  c.diffraction = true;
  c.delta_k_rad_per_cm = 0.5;
  const auto split = propagate_sfg(pump, signal, c);
  CHECK(split.converged);

  oracle::Rk4Sfg rk{16, 16, 64, 600.0, 600.0, 16.0, c.kappa, c.walkoff_ps_per_cm, c.delta_k_rad_per_cm,
                    2 * oracle::pi / 1.551, 2 * oracle::pi / 1.559, 2 * oracle::pi / (sf_wavelength_nm(1551, 1559) * 1e-3)};
  rk.init();
  const auto p = pump.to_dense();
  const auto s = signal.to_dense();
  oracle::Rk4Sfg::State u{Eigen::Map<const Eigen::VectorXcd>(p.data(), p.size()),
                          Eigen::Map<const Eigen::VectorXcd>(s.data(), s.size()), Eigen::VectorXcd::Zero(p.size())};
  const auto out = rk.run(u, c.length_cm, 400);
  const auto a = split.sf_field.to_dense();
  std::vector<oracle::cplx> ref(out.sf.data(), out.sf.data() + out.sf.size());
  CHECK(oracle::relative_l2(std::vector<oracle::cplx>(a.begin(), a.end()), ref) < 1e-3);
}

TEST_CASE("halving the step barely moves the SF energy") {
  const SpatialGrid sg{16, 16, 300.0, 300.0};
  const TemporalGrid tg{64, 16.0};
  FieldRequest req{sg, tg, BeamSettings{100.0, 2.0, 1551.0}, CombSpec::flat(), 0.0};
  const auto pump = assemble_field(ModeLabel::basis(0, 0, Role::kPump), req);
  const auto signal = assemble_field(ModeLabel::basis(0, 1), req);
  CrystalSpec c;
  c.diffraction = true;
  const auto coarse = propagate_sfg(pump, signal, c);
  c.nz_steps = coarse.steps * 2;
  const auto fine = propagate_sfg(pump, signal, c);
  CHECK(std::abs(fine.sf_energy - coarse.sf_energy) / fine.sf_energy < 1e-3);
}

TEST_CASE("depleted variant conserves signal plus SF photon flux") {
  const SpatialGrid sg{16, 16, 300.0, 300.0};
  const TemporalGrid tg{64, 16.0};
  FieldRequest req{sg, tg, BeamSettings{100.0, 2.0, 1551.0}, CombSpec::flat(), 0.0};
  const auto pump = assemble_field(ModeLabel::basis(0, 0, Role::kPump), req).scaled(3000.0);
  const auto signal = assemble_field(ModeLabel::basis(0, 0), req);
  CrystalSpec c;
  c.depleted = true;
  const auto r = propagate_sfg(pump, signal, c);
  REQUIRE(r.signal_out);
  const double total = r.signal_out->energy() + r.sf_energy;
  CHECK(total == doctest::Approx(signal.energy()).epsilon(1e-10));
  CHECK(r.sf_energy > 0.05);  // depletion is visible at this drive
  for (const auto& rec : r.step_diagnostics) CHECK(rec.sf_energy + rec.signal_energy == doctest::Approx(1.0).epsilon(1e-10));

  // In the weak-drive limit it reduces to the undepleted solution.
  c.kappa = 1e-6;
  const auto weak = propagate_sfg(pump, signal, c);
  c.depleted = false;
  const auto und = propagate_sfg(pump, signal, c);
  CHECK(weak.sf_energy == doctest::Approx(und.sf_energy).epsilon(1e-6));
}

TEST_CASE("fibre coupling follows the radial overlap and rejects net OAM") {
  const SpatialGrid sg;
  const TemporalGrid tg;
  DetectorModel det;
  for (int l = 0; l <= 2; ++l) {
    const auto p = lg_mode(l, 300.0, sg);
    const auto s = lg_mode(-l, 300.0, sg);
    CVector prod(sg.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = p[i] * s[i];
    const auto field = SpatioTemporalField::separable(sg, tg, 777.5, prod, hg_temporal_mode(0, 2.0, tg));
    const auto c = smf_couple(field, det);
    CHECK(c.coupled_energy / c.field_energy ==
          doctest::Approx(radial_overlap_ratio(l, 300.0, det.fiber_waist_um)).epsilon(1e-6));
  }
  const auto p = lg_mode(1, 300.0, sg);
  const auto s = lg_mode(1, 300.0, sg);
  CVector prod(sg.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = p[i] * s[i];
  const auto c = smf_couple(SpatioTemporalField::separable(sg, tg, 777.5, prod, hg_temporal_mode(0, 2.0, tg)), det);
  CHECK(c.coupled_energy / c.field_energy < 1e-20);
}

TEST_CASE("dense and separable coupling agree") {
  const SpatialGrid sg{32, 32, 900.0, 900.0};
  const TemporalGrid tg{64, 20.0};
  const auto sep = SpatioTemporalField::separable(sg, tg, 777.5, lg_mode(0, 300.0, sg), hg_temporal_mode(1, 2.0, tg));
  const SpatioTemporalField dense(sg, tg, 777.5, sep.to_dense());
  CHECK(smf_couple(sep, {}).coupled_energy == doctest::Approx(smf_couple(dense, {}).coupled_energy).epsilon(1e-12));
}

TEST_CASE("detection") {
  DetectorModel d;
  d.scale = 2.0;
  CHECK(detect_counts(3.0, d) == 6.0);
  d.poisson_seed = 42;
  const double a = detect_counts(50.0, d, 7);
  CHECK(a == detect_counts(50.0, d, 7));
  CHECK(a == std::floor(a));
  double sum = 0;
  for (std::uint64_t s = 0; s < 400; ++s) sum += detect_counts(50.0, d, s);
  CHECK(sum / 400 == doctest::Approx(100.0).epsilon(0.05));
  CHECK_THROWS_AS(detect_counts(-1.0, d), ContractError);
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
}

TEST_CASE("delay grid and delay scan") {
  const auto g = delay_grid(-1.0, 1.0, 0.25);
  REQUIRE(g.size() == 9);
  CHECK(g[4] == 0.0);
  CHECK_THROWS_AS(delay_grid(1.0, -1.0, 0.1), ConfigError);

  SimulationSetup setup;
  setup.spatial = SpatialGrid{32, 32, 900.0, 900.0};
  const auto t0p = parse_mode_tag("T0", Role::kPump);
  const auto t0s = parse_mode_tag("T0");
  const std::vector<double> bad = {0.5, 1.0};
  CHECK_THROWS_AS(delay_scan(t0p, t0s, bad, setup), ConfigError);
  const auto trace = delay_scan(t0p, t0s, g, setup);
  CHECK(trace.zero_delay_energy == doctest::Approx(simulate_pair(t0p, t0s, setup).coupled_energy).epsilon(1e-12));
  CHECK(trace.peak_energy == trace.zero_delay_energy);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(trace.errors[i].empty());
    CHECK(trace.coupled_energy[i] == doctest::Approx(trace.coupled_energy[g.size() - 1 - i]).epsilon(1e-9));
  }
}

TEST_CASE("mismatched grids are a contract error") {
  const TemporalGrid tg{64, 16.0};
  const auto a = SpatioTemporalField::separable(SpatialGrid{16, 16, 300, 300}, tg, 1551, lg_mode(0, 100, {16, 16, 300, 300}),
                                                hg_temporal_mode(0, 2.0, tg));
  const auto b = SpatioTemporalField::separable(SpatialGrid{32, 32, 300, 300}, tg, 1559, lg_mode(0, 100, {32, 32, 300, 300}),
                                                hg_temporal_mode(0, 2.0, tg));
  CHECK_THROWS_AS(propagate_sfg(a, b, CrystalSpec{}), ContractError);
}
