#include <cmath>

#include <doctest.h>

#include "iphase/sequences.hpp"
#include "iphase/termcat.hpp"

using namespace iphase;
using DM = DynamicsMode;

namespace {

double k_cs() { return wavevector_from_wavelength(426e-9); }
const Real kHbarOverM = static_cast<Real>(PhysicalConstants{}.hbar) / static_cast<Real>(2.21e-25);

Real wide(double x) { return static_cast<Real>(x); }

double row(const ConfigurationPreset& p, termcat::Table t, std::string_view id) {
  const auto b = termcat::bindings_for(p);
  for (const auto& term : termcat::terms_for(t)) {
    if (term.id == id) return termcat::evaluate_term(term, b);
  }
  FAIL("no row " << id);
  return 0.0;
}

}  // namespace

TEST_SUITE("sequences") {
  TEST_CASE("wavevector") {
    CHECK(k_cs() == doctest::Approx(1.4749e7).epsilon(1e-4));
    CHECK_THROWS_AS(wavevector_from_wavelength(0.0), std::invalid_argument);
  }

  TEST_CASE("gravimeter layout") {
    const auto d = build_gravimeter(0.4, 3.92, k_cs());
    REQUIRE(d.pulses.size() == 3);
    CHECK(d.pulses[1].epoch == 0.4);
    CHECK(d.pulses[2].epoch == 0.8);
    CHECK(d.pulses[1].area == PulseArea::Pi);
    CHECK(d.pulses[0].k_vector == Vec3(0, 0, k_cs()));
    CHECK(d.initial_state.velocity == Vec3r(0, 0, wide(3.92)));
  }

  TEST_CASE("fountain apex") {
    const auto p = make_preset("gravimeter");
    CHECK(p.parameters.at("v_launch") == doctest::Approx(3.92));
    const auto env = degrade_environment(p.environment, DM::FreeFall);
    auto d = p.definitions[0];
    for (auto& pulse : d.pulses) pulse.k_vector = Vec3::Zero();
    const auto t = run_arm(d, Arm::Upper, env, p.species, DM::FreeFall);
    CHECK(static_cast<double>(t.arrivals[1].position.z()) == doctest::Approx(0.784).epsilon(1e-14));
  }

  TEST_CASE("zero interrogation time") {
    const auto p = make_preset("gravimeter", {{"T", 0.0}});
    const auto b = evaluate_preset(p, DM::Full, DM::Full);
    CHECK(b.total == 0.0);
    CHECK(b.prop == 0.0);
    CHECK(b.laser == 0.0);
    CHECK(b.sep == 0.0);
    CHECK_THROWS_AS(build_gravimeter(-0.1, 0.0, k_cs()), std::invalid_argument);
  }

  TEST_CASE("gravimeter leading behaviour") {
    const auto b = evaluate_preset(make_preset("gravimeter"), DM::Full, DM::Full);
    CHECK(b.total == doctest::Approx(-2.313e7).epsilon(0.01));
  }

  TEST_CASE("clock") {
    const auto d = build_clock(0.4, 3.92, k_cs());
    REQUIRE(d.pulses.size() == 4);
    CHECK(d.pulses[1].epoch == d.pulses[2].epoch);
    CHECK(d.pulses[2].k_vector == -d.pulses[1].k_vector);
    CHECK(d.pulses[3].k_vector == -d.pulses[0].k_vector);

    // Gravity only: k g T^2 plus the recoil term.
    const auto p = make_preset("clock");
    const auto b = evaluate_preset(p, DM::FreeFall, DM::FreeFall);
    const Real k = wide(k_cs());
    const Real expect = k * wide(-9.8) * wide(0.4) * wide(0.4) - k * k * wide(0.4) * kHbarOverM;
    CHECK(std::abs(b.total - expect) <= 1e-8L);

    // k -> -k flips only the odd part.
    const auto fwd = parity_decompose(p.definitions[0], p.environment, p.species, DM::Full, DM::Full);
    const auto rev = parity_decompose(reverse_wavevectors(p.definitions[0]), p.environment, p.species,
                                      DM::Full, DM::Full);
    CHECK(rev.odd == doctest::Approx(-fwd.odd).epsilon(1e-14));
    CHECK(rev.even == doctest::Approx(fwd.even).epsilon(1e-10));
  }

  TEST_CASE("recoil layout") {
    const auto pair = build_recoil(0.13, 1.0 / 3000.0, 31, k_cs());
    REQUIRE(pair.first.pulses.size() == 34);
    for (int j = 1; j < 31; ++j) {
      CHECK(pair.first.pulses[1 + j].area == PulseArea::Pi);
      CHECK(pair.first.pulses[1 + j].epoch == doctest::Approx(0.13 + j / 3000.0));
    }
    CHECK(pair.first.pulses[32].epoch - pair.first.pulses[31].epoch > 0);
    CHECK(pair.first.pulses[33].epoch - pair.first.pulses[32].epoch == doctest::Approx(0.13));
    CHECK_THROWS_AS(build_recoil(0.13, 1e-3, 0, k_cs()), std::invalid_argument);
    CHECK_THROWS_AS(build_recoil(0.13, 0.0, 3, k_cs()), std::invalid_argument);
  }

  TEST_CASE("recoil observable") {
    const auto p = make_preset("recoil");
    const auto b = evaluate_preset(p, DM::Full, DM::Full);
    CHECK(b.total == doctest::Approx(8.37e5).epsilon(1e-3));

    // Exchanging the conjugate interferometers flips the observable.
    auto swapped = p;
    std::swap(swapped.definitions[0], swapped.definitions[1]);
    CHECK(evaluate_preset(swapped, DM::Full, DM::Full).total == -b.total);

    // N = 1, gravity only: 2 hbar k^2 T / m.
    const auto one = make_preset("recoil", {{"N", 1.0}});
    const Real k = wide(k_cs());
    const Real expect = 2 * kHbarOverM * k * k * wide(0.13);
    CHECK(std::abs(evaluate_preset(one, DM::FreeFall, DM::FreeFall).total - expect) <= 1e-9L);
  }

  TEST_CASE("recoil gradient sensitivity") {
    const auto p = make_preset("recoil");
    const auto flat = with_environment(p, p.environment.with_gradient(Mat3::Zero()));
    const double change =
        evaluate_preset(p, DM::Full, DM::Full).total - evaluate_preset(flat, DM::Full, DM::Full).total;
    const double leading = row(p, termcat::Table::Recoil, "recoil.2");
    CHECK(leading == doctest::Approx(6.9e-3).epsilon(0.01));
    const double gradient_rows =
        leading + row(p, termcat::Table::Recoil, "recoil.3") + row(p, termcat::Table::Recoil, "recoil.4");
    CHECK(change == doctest::Approx(gradient_rows).epsilon(1e-4));
  }

  TEST_CASE("gyroscope") {
    const auto d = build_gyroscope(1.0 / 290.0, 290.0, k_cs());
    CHECK(d.pulses[0].k_vector == Vec3(k_cs(), 0, 0));
    CHECK(d.initial_state.velocity == Vec3r(0, 290, 0));

    const auto p = make_preset("gyroscope");
    // Without rotation nothing acts along k except the T_xx recoil row.
    const auto still = with_environment(p, p.environment.with_omega(Vec3::Zero()));
    CHECK(std::abs(evaluate_preset(still, DM::Full, DM::Full).total -
                   row(p, termcat::Table::Gyroscope, "gyro.5")) <= 1e-12);
    const auto flat = with_environment(still, still.environment.with_gradient(Mat3::Zero()));
    CHECK(std::abs(evaluate_preset(flat, DM::Full, DM::Full).total) <= 1e-12);

    // v_y -> -v_y: Sagnac row flips, the g_z row stays.
    const double forward = evaluate_preset(p, DM::Full, DM::Full).total;
    const double reversed = evaluate_preset(make_preset("gyroscope", {{"v_y", -290.0}}), DM::Full, DM::Full).total;
    const double sagnac = row(p, termcat::Table::Gyroscope, "gyro.1");
    double rest = 0.0;
    for (const char* id : {"gyro.2", "gyro.3", "gyro.4", "gyro.5"}) rest += row(p, termcat::Table::Gyroscope, id);
    CHECK(std::abs((forward - reversed) / 2 - sagnac) <= 1e-6);
    CHECK(std::abs((forward + reversed) / 2 - rest) <= 1e-6);
  }

  TEST_CASE("arms close in free fall") {
    for (const char* name : {"gravimeter", "gyroscope"}) {
      const auto p = make_preset(name);
      const auto env = degrade_environment(p.environment, DM::FreeFall);
      const auto& d = p.definitions[0];
      const auto up = run_arm(d, Arm::Upper, env, p.species, DM::FreeFall);
      const auto lo = run_arm(d, Arm::Lower, env, p.species, DM::FreeFall);
      CAPTURE(name);
      CHECK(arm_difference(up, lo).final.head<3>().norm() <= 1e-15L);
    }
  }

  TEST_CASE("presets are pure") {
    for (const auto& name : preset_names()) {
      const auto a = make_preset(name);
      const auto b = make_preset(name);
      CHECK(a.parameters == b.parameters);
      CHECK(a.environment == b.environment);
      REQUIRE(a.definitions.size() == b.definitions.size());
      for (std::size_t i = 0; i < a.definitions.size(); ++i) {
        CHECK(a.definitions[i].pulses.size() == b.definitions[i].pulses.size());
        for (std::size_t j = 0; j < a.definitions[i].pulses.size(); ++j) {
          CHECK(a.definitions[i].pulses[j].epoch == b.definitions[i].pulses[j].epoch);
          CHECK(a.definitions[i].pulses[j].k_vector == b.definitions[i].pulses[j].k_vector);
        }
      }
      CHECK(evaluate_preset(a, DM::Full, DM::Full).total == evaluate_preset(b, DM::Full, DM::Full).total);
    }
  }

  TEST_CASE("preset overrides") {
    CHECK_THROWS_AS(make_preset("nope"), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("gravimeter", {{"v_y", 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("recoil", {{"N", 2.5}}), std::invalid_argument);
    const auto p = make_preset("gravimeter", {{"T", 0.2}});
    CHECK(p.parameters.at("v_launch") == doctest::Approx(9.8 * 0.2));
    CHECK(make_preset("gravimeter").environment.omega().norm() == doctest::Approx(kTableRotationRate));
  }
}
