#include <cmath>
#include <map>
#include <random>
#include <set>

#include <doctest.h>
#include <json.hpp>

#include "iphase/termcat.hpp"

using namespace iphase;
using namespace iphase::termcat;

namespace {

const PhaseTerm& term(std::string_view id) {
  for (const auto& t : catalog()) {
    if (t.id == id) return t;
  }
  throw std::out_of_range(std::string(id));
}

bool same_monomial(const PhaseTerm& a, const PhaseTerm& b) {
  if (a.coefficient.value() != b.coefficient.value() || a.n_polynomial != b.n_polynomial) return false;
  for (int s = 0; s <= static_cast<int>(Symbol::hbar_over_m); ++s) {
    if (a.exponent_of(Symbol(s)) != b.exponent_of(Symbol(s))) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("termcat") {
  TEST_CASE("row counts") {
    CHECK(terms_for(Table::Gravimeter).size() == 11);
    CHECK(terms_for(Table::Clock).size() == 9);
    CHECK(terms_for(Table::Recoil).size() == 4);
    CHECK(terms_for(Table::Gyroscope).size() == 5);
    CHECK(terms_for(Table::Perturbative).size() == 7);
    CHECK(catalog().size() == 36);
    std::set<std::string> ids;
    for (const auto& t : catalog()) ids.insert(t.id);
    CHECK(ids.size() == catalog().size());
  }

  TEST_CASE("printed values") {
    CHECK(term("grav.1").paper_value == -2.32e7);
    CHECK(term("grav.3").paper_value == 1.08e1);
    CHECK(term("grav.2").paper_value == 4.44e4);
    CHECK(term("clock.3").paper_value == -4.16e4);
    CHECK(term("clock.9").paper_value == 6.48e-3);
    CHECK(term("recoil.1").paper_value == 8.39e5);
    CHECK(term("recoil.2").paper_value == 6.89e-3);
    CHECK(term("gyro.1").paper_value == 4.69);
    CHECK(term("pert.5").paper_value == 1.04e-2);
    CHECK(term("grav.5").paper_value == -3.11e-2);
    CHECK(term("grav.4").coefficient.num == 7);
    CHECK(term("grav.4").coefficient.den == 12);
    CHECK(term("grav.9").coefficient.num == -7);
    CHECK(term("grav.9").coefficient.den == 4);
    CHECK(term("grav.5").coefficient.num == -3);
    CHECK(term("pert.5").coefficient.num == 1);
  }

  TEST_CASE("every term is dimensionless") {
    for (const auto& t : catalog()) {
      CAPTURE(t.id);
      CHECK(dimension_of(t) == Dimension{});
    }
    CHECK(dimension_of(Symbol::hbar_over_m) == Dimension{2, -1});
    CHECK(dimension_of(Symbol::k_z) == Dimension{-1, 0});
  }

  TEST_CASE("evaluation at the published parameters") {
    const auto g = make_preset("gravimeter");
    const auto b = bindings_for(g);
    const double v = evaluate_term(term("grav.1"), b);
    CHECK(v == doctest::Approx(-2.313e7).epsilon(1e-3));
    CHECK(std::abs(v / -2.32e7 - 1) <= 0.004);

    const auto r = make_preset("recoil");
    CHECK(evaluate_term(term("recoil.1"), bindings_for(r)) == doctest::Approx(8.37e5).epsilon(1e-3));

    auto zero_t = b;
    zero_t[Symbol::T] = 0.0;
    CHECK(evaluate_term(term("grav.1"), zero_t) == 0.0);

    Bindings missing = b;
    missing.erase(Symbol::g_z);
    CHECK_THROWS_AS(evaluate_term(term("grav.1"), missing), UnboundSymbol);
  }

  TEST_CASE("recoil polynomial in N") {
    auto b = bindings_for(make_preset("recoil"));
    const auto& t = term("recoil.4");
    const double n = b.at(Symbol::N);
    auto unit = b;
    unit[Symbol::N] = 1.0;
    CHECK(evaluate_term(t, b) == doctest::Approx(evaluate_term(t, unit) * (2 * n * n * n + n) / 3).epsilon(1e-14));
  }

  TEST_CASE("scaling in T") {
    std::mt19937_64 rng(20261015);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (const auto& name : preset_names()) {
      const auto b = bindings_for(make_preset(name));
      for (const auto& t : catalog()) {
        if (preset_for(t.table) != make_preset(name).kind) continue;
        const double base = evaluate_term(t, b);
        for (int i = 0; i < 5; ++i) {
          const double s = scale(rng);
          auto scaled = b;
          scaled[Symbol::T] *= s;
          CAPTURE(t.id);
          CHECK(evaluate_term(t, scaled) ==
                doctest::Approx(base * std::pow(s, t.exponent_of(Symbol::T))).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("table sums") {
    const auto b = bindings_for(make_preset("gravimeter"));
    const double s = table_sum(Table::Gravimeter, b);
    CHECK(s == doctest::Approx(-2.3126e7 + 4.44e4).epsilon(1e-3));
    CHECK(table_sum("", b) == 0.0);
    CHECK(table_sum("nothing", b) == 0.0);
    CHECK(table_sum("gravimeter", b) == s);

    // Rows with the same monomial cancel; what remains of the clock table
    // carries hbar/m.
    const auto clock = terms_for(Table::Clock);
    const auto grav = terms_for(Table::Gravimeter);
    auto shared = [](const PhaseTerm& t, const std::vector<PhaseTerm>& others) {
      for (const auto& o : others) {
        if (same_monomial(t, o)) return true;
      }
      return false;
    };
    double clock_only = 0.0;
    double grav_only = 0.0;
    for (const auto& c : clock) {
      if (shared(c, grav)) continue;
      CHECK(c.exponent_of(Symbol::hbar_over_m) == 1);
      clock_only += evaluate_term(c, b);
    }
    for (const auto& g : grav) {
      if (!shared(g, clock)) grav_only += evaluate_term(g, b);
    }
    CHECK(table_sum(Table::Clock, b) - s == doctest::Approx(clock_only - grav_only).epsilon(1e-9));
  }

  TEST_CASE("reconcile") {
    const auto b = bindings_for(make_preset("gravimeter"));
    const double s = table_sum(Table::Gravimeter, b);
    const auto r = reconcile(Table::Gravimeter, b, s + 1e-6);
    CHECK(r.rows.size() == 11);
    CHECK(r.residual == doctest::Approx(1e-6).epsilon(1e-2));
    CHECK(r.smallest_row == doctest::Approx(2.6e-5).epsilon(0.05));
    CHECK_FALSE(r.flagged);
    CHECK(reconcile(Table::Gravimeter, b, s + 1.0).flagged);
  }

  TEST_CASE("table metadata") {
    CHECK(preset_for(Table::Perturbative) == PresetKind::Gravimeter);
    CHECK(modes_for(Table::Perturbative).trajectory == DynamicsMode::FreeFall);
    CHECK(modes_for(Table::Gravimeter).trajectory == DynamicsMode::Full);
    for (Table t : all_tables()) CHECK(parse_table(to_string(t)) == t);
    CHECK(term("grav.2").rotation_dependent());
    CHECK_FALSE(term("grav.3").rotation_dependent());
    CHECK(term("grav.8").k_order() == 2);
    CHECK(term("gyro.5").sign_exempt);
  }

  TEST_CASE("export") {
    const std::string csv = export_csv();
    CHECK(csv.rfind("id,table,coefficient_num,coefficient_den,factors,paper_value_rad,paper_relative\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 37);

    const auto j = nlohmann::json::parse(export_json());
    CHECK(j.at("schema_version") == 1);
    REQUIRE(j.at("terms").size() == 36);
    for (const auto& row : j.at("terms")) {
      const auto& t = term(row.at("id").get<std::string>());
      CHECK(row.at("paper_value_rad").get<double>() == t.paper_value);
      CHECK(row.at("coefficient_num").get<long>() == t.coefficient.num);
    }
  }
}
