#include "iphase/termcat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "text_util.hpp"

namespace iphase::termcat {

namespace {

using S = Symbol;

PhaseTerm term(std::string id, Table table, std::string formula, Rational c,
               std::vector<Factor> factors, double paper, double relative) {
  return PhaseTerm{std::move(id), table, std::move(formula), c, {}, std::move(factors),
                   paper, relative};
}

std::vector<PhaseTerm> build_catalog() {
  const Table G = Table::Gravimeter;
  const Table C = Table::Clock;
  const Table Rc = Table::Recoil;
  const Table Gy = Table::Gyroscope;
  const Table P = Table::Perturbative;
  std::vector<PhaseTerm> c;

  c.push_back(term("grav.1", G, "k_z T^2 g_z", {1, 1}, {{S::k_z}, {S::T, 2}, {S::g_z}}, -2.32e7, 1.0));
  c.push_back(term("grav.2", G, "k_z T^2 Omega_y^2 R", {1, 1},
                   {{S::k_z}, {S::T, 2}, {S::Omega_y, 2}, {S::R}}, 4.44e4, 1.9e-3));
  c.push_back(term("grav.3", G, "k_z T^3 v_z T_zz", {1, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::T_zz}}, 1.08e1, 4.7e-7));
  c.push_back(term("grav.4", G, "7/12 k_z T^4 g_z T_zz", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::g_z}, {S::T_zz}}, -6.32, 2.7e-7));
  c.push_back(term("grav.5", G, "-3 k_z T^3 v_z Omega_y^2", {-3, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::Omega_y, 2}}, -3.11e-2, 1.3e-9));
  c.push_back(term("grav.6", G, "-7/4 k_z T^4 g_z Omega_y^2", {-7, 4},
                   {{S::k_z}, {S::T, 4}, {S::g_z}, {S::Omega_y, 2}}, 1.81e-2, 7.8e-10));
  c.push_back(term("grav.7", G, "7/12 k_z T^4 T_zz Omega_y^2 R", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::T_zz}, {S::Omega_y, 2}, {S::R}}, 1.21e-2, 5.2e-10));
  c.push_back(term("grav.8", G, "hbar/2m k_z^2 T^3 T_zz", {1, 2},
                   {{S::hbar_over_m}, {S::k_z, 2}, {S::T, 3}, {S::T_zz}}, 9.71e-3, 4.2e-10));
  c.push_back(term("grav.9", G, "-7/4 k_z T^4 Omega_y^4 R", {-7, 4},
                   {{S::k_z}, {S::T, 4}, {S::Omega_y, 4}, {S::R}}, -3.47e-5, 1.5e-12));
  c.push_back(term("grav.10", G, "-3hbar/2m k_z^2 T^3 Omega_y^2", {-3, 2},
                   {{S::hbar_over_m}, {S::k_z, 2}, {S::T, 3}, {S::Omega_y, 2}}, -2.79e-5, 1.2e-12));
  c.push_back(term("grav.11", G, "-7/4 k_z T^4 Omega_y^2 Omega_z^2 R", {-7, 4},
                   {{S::k_z}, {S::T, 4}, {S::Omega_y, 2}, {S::Omega_z, 2}, {S::R}}, -2.62e-5,
                   1.1e-12));

  c.push_back(term("clock.1", C, "k_z T^2 g_z", {1, 1}, {{S::k_z}, {S::T, 2}, {S::g_z}}, -2.32e7, 1.0));
  c.push_back(term("clock.2", C, "k_z T^2 Omega_y^2 R", {1, 1},
                   {{S::k_z}, {S::T, 2}, {S::Omega_y, 2}, {S::R}}, 4.44e4, 1.9e-3));
  c.push_back(term("clock.3", C, "-k_z^2 T hbar/m", {-1, 1},
                   {{S::hbar_over_m}, {S::k_z, 2}, {S::T}}, -4.16e4, 1.8e-3));
  c.push_back(term("clock.4", C, "k_z T^3 v_z T_zz", {1, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::T_zz}}, 1.08e1, 4.7e-7));
  c.push_back(term("clock.5", C, "7/12 k_z T^4 g_z T_zz", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::g_z}, {S::T_zz}}, -6.32, 2.7e-7));
  c.push_back(term("clock.6", C, "-3 k_z T^3 v_z Omega_y^2", {-3, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::Omega_y, 2}}, -3.11e-2, 1.3e-9));
  c.push_back(term("clock.7", C, "-7/4 g_z k_z T^4 Omega_y^2", {-7, 4},
                   {{S::g_z}, {S::k_z}, {S::T, 4}, {S::Omega_y, 2}}, 1.81e-2, 7.8e-10));
  c.push_back(term("clock.8", C, "7/12 k_z T^4 R T_zz Omega_y^2", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::R}, {S::T_zz}, {S::Omega_y, 2}}, 1.21e-2, 5.2e-10));
  c.push_back(term("clock.9", C, "hbar/3m k_z^2 T^3 T_zz", {1, 3},
                   {{S::hbar_over_m}, {S::k_z, 2}, {S::T, 3}, {S::T_zz}}, 6.48e-3, 2.7e-10));

  c.push_back(term("recoil.1", Rc, "2N hbar/m k_z^2 T", {2, 1},
                   {{S::N}, {S::hbar_over_m}, {S::k_z, 2}, {S::T}}, 8.39e5, 1.0));
  c.push_back(term("recoil.2", Rc, "N hbar/3m k_z^2 T^3 T_zz", {1, 3},
                   {{S::N}, {S::hbar_over_m}, {S::k_z, 2}, {S::T, 3}, {S::T_zz}}, 6.89e-3, 8.2e-9));
  c.push_back(term("recoil.3", Rc, "N^2 hbar/2m k_z^2 T^2 T_rec T_zz", {1, 2},
                   {{S::N, 2}, {S::hbar_over_m}, {S::k_z, 2}, {S::T, 2}, {S::T_rec}, {S::T_zz}},
                   8.22e-4, 9.8e-10));
  {
    PhaseTerm t = term("recoil.4", Rc, "(2N^3+N) hbar/6m k_z^2 T T_rec^2 T_zz", {1, 6},
                       {{S::hbar_over_m}, {S::k_z, 2}, {S::T}, {S::T_rec, 2}, {S::T_zz}}, 4.36e-5,
                       5.2e-11);
    t.n_polynomial = {0, 1, 0, 2};
    c.push_back(std::move(t));
  }

  c.push_back(term("gyro.1", Gy, "2 k_x T^2 Omega_z v_y", {2, 1},
                   {{S::k_x}, {S::T, 2}, {S::Omega_z}, {S::v_y}}, 4.69, 1.0));
  c.push_back(term("gyro.2", Gy, "-2 k_x T^3 Omega_y g_z", {-2, 1},
                   {{S::k_x}, {S::T, 3}, {S::Omega_y}, {S::g_z}}, 6.28e-4, 1.3e-4));
  c.push_back(term("gyro.3", Gy, "-2 k_x T^3 Omega_y^3 R", {-2, 1},
                   {{S::k_x}, {S::T, 3}, {S::Omega_y, 3}, {S::R}}, -1.20e-6, 2.6e-7));
  c.push_back(term("gyro.4", Gy, "-2 k_x T^3 Omega_y Omega_z^2 R", {-2, 1},
                   {{S::k_x}, {S::T, 3}, {S::Omega_y}, {S::Omega_z, 2}, {S::R}}, -9.09e-7,
                   1.9e-7));
  {
    PhaseTerm t = term("gyro.5", Gy, "hbar/2m k_x^2 T^3 T_xx", {1, 2},
                       {{S::hbar_over_m}, {S::k_x, 2}, {S::T, 3}, {S::T_xx}}, 3.11e-9, 6.6e-10);
    t.sign_exempt = true;
    c.push_back(std::move(t));
  }

  c.push_back(term("pert.1", P, "k_z T^2 g_z", {1, 1}, {{S::k_z}, {S::T, 2}, {S::g_z}}, -2.32e7, 1.0));
  c.push_back(term("pert.2", P, "k_z T^2 Omega_y^2 R", {1, 1},
                   {{S::k_z}, {S::T, 2}, {S::Omega_y, 2}, {S::R}}, 4.44e4, 1.9e-3));
  c.push_back(term("pert.3", P, "k_z T^3 v_z T_zz", {1, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::T_zz}}, 1.08e1, 4.7e-7));
  c.push_back(term("pert.4", P, "7/12 k_z T^4 g_z T_zz", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::g_z}, {S::T_zz}}, -6.32, 2.7e-7));
  c.push_back(term("pert.5", P, "k_z T^3 v_z Omega_y^2", {1, 1},
                   {{S::k_z}, {S::T, 3}, {S::v_z}, {S::Omega_y, 2}}, 1.04e-2, 4.5e-10));
  c.push_back(term("pert.6", P, "hbar/2m k_z^2 T^3 T_zz", {1, 2},
                   {{S::hbar_over_m}, {S::k_z, 2}, {S::T, 3}, {S::T_zz}}, 9.71e-3, 4.2e-10));
  c.push_back(term("pert.7", P, "7/12 k_z T^4 g_z Omega_y^2", {7, 12},
                   {{S::k_z}, {S::T, 4}, {S::g_z}, {S::Omega_y, 2}}, -6.05e-3, 2.6e-10));
  return c;
}

}  // namespace

std::string_view symbol_name(Symbol s) {
  switch (s) {
    case S::k_x: return "k_x";
    case S::k_z: return "k_z";
    case S::T: return "T";
    case S::T_rec: return "T_rec";
    case S::N: return "N";
    case S::g_z: return "g_z";
    case S::v_z: return "v_z";
    case S::v_y: return "v_y";
    case S::Omega_y: return "Omega_y";
    case S::Omega_z: return "Omega_z";
    case S::R: return "R";
    case S::T_xx: return "T_xx";
    case S::T_zz: return "T_zz";
    case S::hbar_over_m: return "hbar/m";
  }
  return "?";
}

const std::vector<Table>& all_tables() {
  static const std::vector<Table> tables{Table::Gravimeter, Table::Clock, Table::Recoil,
                                         Table::Gyroscope, Table::Perturbative};
  return tables;
}

std::string_view to_string(Table t) {
  switch (t) {
    case Table::Gravimeter: return "gravimeter";
    case Table::Clock: return "clock";
    case Table::Recoil: return "recoil";
    case Table::Gyroscope: return "gyroscope";
    case Table::Perturbative: return "perturbative";
  }
  return "?";
}

std::optional<Table> parse_table(std::string_view name) {
  for (Table t : all_tables()) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

PresetKind preset_for(Table t) {
  switch (t) {
    case Table::Gravimeter:
    case Table::Perturbative:
      return PresetKind::Gravimeter;
    case Table::Clock:
      return PresetKind::Clock;
    case Table::Recoil:
      return PresetKind::Recoil;
    case Table::Gyroscope:
      return PresetKind::Gyroscope;
  }
  return PresetKind::Gravimeter;
}

ModePair modes_for(Table t) {
  if (t == Table::Perturbative) return {DynamicsMode::FreeFall, DynamicsMode::Full};
  return {DynamicsMode::Full, DynamicsMode::Full};
}

bool PhaseTerm::rotation_dependent() const {
  return exponent_of(S::Omega_y) != 0 || exponent_of(S::Omega_z) != 0;
}

int PhaseTerm::exponent_of(Symbol s) const {
  int e = 0;
  for (const Factor& f : factors) {
    if (f.symbol == s) e += f.exponent;
  }
  return e;
}

int PhaseTerm::k_order() const { return exponent_of(S::k_x) + exponent_of(S::k_z); }

std::string PhaseTerm::factors_text() const {
  std::string out;
  if (!n_polynomial.empty()) {
    std::string poly;
    for (std::size_t i = n_polynomial.size(); i-- > 0;) {
      const long c = n_polynomial[i];
      if (c == 0) continue;
      if (!poly.empty()) poly += "+";
      if (c != 1 || i == 0) poly += std::to_string(c);
      if (i >= 1) poly += "N";
      if (i >= 2) poly += "^" + std::to_string(i);
    }
    out = "(" + poly + ")";
  }
  for (const Factor& f : factors) {
    if (!out.empty()) out += ' ';
    out += symbol_name(f.symbol);
    if (f.exponent != 1) out += "^" + std::to_string(f.exponent);
  }
  return out;
}

const std::vector<PhaseTerm>& catalog() {
  static const std::vector<PhaseTerm> terms = build_catalog();
  return terms;
}

std::vector<PhaseTerm> terms_for(Table t) {
  std::vector<PhaseTerm> out;
  for (const PhaseTerm& term : catalog()) {
    if (term.table == t) out.push_back(term);
  }
  return out;
}

std::vector<PhaseTerm> terms_for(std::string_view tag) {
  const auto t = parse_table(tag);
  if (!t) return {};
  return terms_for(*t);
}

UnboundSymbol::UnboundSymbol(Symbol s)
    : std::out_of_range("unbound symbol '" + std::string(symbol_name(s)) + "'"), symbol_(s) {}

double evaluate_term(const PhaseTerm& term, const Bindings& bindings) {
  auto lookup = [&](Symbol s) {
    const auto it = bindings.find(s);
    if (it == bindings.end()) throw UnboundSymbol(s);
    return it->second;
  };
  double value = term.coefficient.value();
  if (!term.n_polynomial.empty()) {
    const double n = lookup(S::N);
    double poly = 0.0;
    for (std::size_t i = term.n_polynomial.size(); i-- > 0;) {
      poly = poly * n + static_cast<double>(term.n_polynomial[i]);
    }
    value *= poly;
  }
  for (const Factor& f : term.factors) value *= std::pow(lookup(f.symbol), f.exponent);
  return value;
}

double table_sum(std::span<const PhaseTerm> terms, const Bindings& bindings) {
  numerics::CompensatedSum sum;
  for (const PhaseTerm& t : terms) sum.add(evaluate_term(t, bindings));
  return sum.value();
}

double table_sum(Table t, const Bindings& bindings) {
  const auto terms = terms_for(t);
  return table_sum(terms, bindings);
}

double table_sum(std::string_view tag, const Bindings& bindings) {
  const auto terms = terms_for(tag);
  return table_sum(terms, bindings);
}

Dimension dimension_of(Symbol s) {
  switch (s) {
    case S::k_x:
    case S::k_z:
      return {-1, 0};
    case S::T:
    case S::T_rec:
      return {0, 1};
    case S::N:
      return {0, 0};
    case S::g_z:
      return {1, -2};
    case S::v_z:
    case S::v_y:
      return {1, -1};
    case S::Omega_y:
    case S::Omega_z:
      return {0, -1};
    case S::R:
      return {1, 0};
    case S::T_xx:
    case S::T_zz:
      return {0, -2};
    case S::hbar_over_m:
      return {2, -1};
  }
  return {};
}

Dimension dimension_of(const PhaseTerm& term) {
  Dimension d;
  for (const Factor& f : term.factors) {
    const Dimension s = dimension_of(f.symbol);
    d.length += s.length * f.exponent;
    d.time += s.time * f.exponent;
  }
  return d;
}

Bindings bindings_for(const ConfigurationPreset& preset, const PhysicalConstants& constants) {
  const auto& p = preset.parameters;
  const double k = wavevector_from_wavelength(p.at("lambda_eff"));
  const EnvironmentModel& env = preset.environment;
  Bindings b{
      {S::T, p.at("T")},
      {S::g_z, env.gravity().z()},
      {S::Omega_y, env.omega().y()},
      {S::Omega_z, env.omega().z()},
      {S::R, env.earth_offset().z()},
      {S::T_xx, env.gradient()(0, 0)},
      {S::T_zz, env.gradient()(2, 2)},
      {S::hbar_over_m, constants.hbar / preset.species.mass()},
  };
  switch (preset.kind) {
    case PresetKind::Gravimeter:
    case PresetKind::Clock:
      b[S::k_z] = k;
      b[S::v_z] = p.at("v_launch");
      break;
    case PresetKind::Recoil:
      b[S::k_z] = k;
      b[S::v_z] = p.at("v_launch");
      b[S::T_rec] = p.at("T_rec");
      b[S::N] = p.at("N");
      break;
    case PresetKind::Gyroscope:
      b[S::k_x] = k;
      b[S::v_y] = p.at("v_y");
      break;
  }
  return b;
}

Reconciliation reconcile(Table t, const Bindings& bindings, double engine_total) {
  Reconciliation r;
  r.engine_total = engine_total;
  r.smallest_row = std::numeric_limits<double>::infinity();
  numerics::CompensatedSum sum;
  for (const PhaseTerm& term : terms_for(t)) {
    const double v = evaluate_term(term, bindings);
    sum.add(v);
    r.smallest_row = std::min(r.smallest_row, std::abs(v));
    r.rows.push_back({term.id, v, term.paper_value});
  }
  r.table_sum = sum.value();
  if (r.rows.empty()) r.smallest_row = 0.0;
  numerics::CompensatedSum residual(engine_total);
  residual.add(-r.table_sum);
  r.residual = residual.value();
  r.flagged = std::abs(r.residual) > r.smallest_row;
  return r;
}

std::string export_csv() {
  std::ostringstream out;
  out << "id,table,coefficient_num,coefficient_den,factors,paper_value_rad,paper_relative\n";
  for (const PhaseTerm& t : catalog()) {
    out << t.id << ',' << to_string(t.table) << ',' << t.coefficient.num << ','
        << t.coefficient.den << ',' << detail::csv_escape(t.factors_text()) << ','
        << detail::format_significant(t.paper_value, 17) << ','
        << detail::format_significant(t.paper_relative, 17) << '\n';
  }
  return out.str();
}

std::string export_json() {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  auto& terms = doc["terms"] = nlohmann::ordered_json::array();
  for (const PhaseTerm& t : catalog()) {
    nlohmann::ordered_json row;
    row["id"] = t.id;
    row["table"] = to_string(t.table);
    row["formula"] = t.formula;
    row["coefficient_num"] = t.coefficient.num;
    row["coefficient_den"] = t.coefficient.den;
    row["factors"] = t.factors_text();
    row["paper_value_rad"] = t.paper_value;
    row["paper_relative"] = t.paper_relative;
    terms.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

}  // namespace iphase::termcat
