#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iphase/sequences.hpp"

namespace iphase::termcat {

enum class Symbol {
  k_x,
  k_z,
  T,
  T_rec,
  N,
  g_z,
  v_z,
  v_y,
  Omega_y,
  Omega_z,
  R,
  T_xx,
  T_zz,
  hbar_over_m,
};

std::string_view symbol_name(Symbol s);

struct Rational {
  long num = 1;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Factor {
  Symbol symbol;
  int exponent = 1;
};

/// Source tables of the catalog. Perturbative holds the accelerometer terms
/// derived with rotations and gradients both treated as perturbations.
enum class Table { Gravimeter, Clock, Recoil, Gyroscope, Perturbative };

const std::vector<Table>& all_tables();
std::string_view to_string(Table t);
std::optional<Table> parse_table(std::string_view name);
PresetKind preset_for(Table t);

/// Trajectory and action modes the table's analytic terms correspond to.
struct ModePair {
  DynamicsMode trajectory;
  DynamicsMode action;
};
ModePair modes_for(Table t);

/// coefficient * P(N) * prod(symbol^exponent); P(N) = sum n_polynomial[i] N^i,
/// or 1 when n_polynomial is empty.
struct PhaseTerm {
  std::string id;
  Table table;
  std::string formula;
  Rational coefficient;
  std::vector<long> n_polynomial;
  std::vector<Factor> factors;
  double paper_value;
  double paper_relative;
  bool sign_exempt = false;  // printed sign disagrees with T_xx < 0

  bool rotation_dependent() const;
  int exponent_of(Symbol s) const;
  int k_order() const;
  std::string factors_text() const;
};

const std::vector<PhaseTerm>& catalog();
std::vector<PhaseTerm> terms_for(Table t);
std::vector<PhaseTerm> terms_for(std::string_view tag);

using Bindings = std::map<Symbol, double>;

class UnboundSymbol : public std::out_of_range {
 public:
  explicit UnboundSymbol(Symbol s);
  Symbol symbol() const { return symbol_; }

 private:
  Symbol symbol_;
};

double evaluate_term(const PhaseTerm& term, const Bindings& bindings);

/// Compensated sum over the given terms.
double table_sum(std::span<const PhaseTerm> terms, const Bindings& bindings);
double table_sum(Table t, const Bindings& bindings);
/// Unknown or empty tags have no terms and sum to zero.
double table_sum(std::string_view tag, const Bindings& bindings);

/// Exponents of metres and seconds.
struct Dimension {
  int length = 0;
  int time = 0;
  friend bool operator==(const Dimension&, const Dimension&) = default;
};
Dimension dimension_of(Symbol s);
Dimension dimension_of(const PhaseTerm& term);

Bindings bindings_for(const ConfigurationPreset& preset, const PhysicalConstants& constants = {});

struct ReconcileRow {
  std::string id;
  double value;
  double paper_value;
};

struct Reconciliation {
  std::vector<ReconcileRow> rows;
  double table_sum = 0.0;
  double engine_total = 0.0;
  double residual = 0.0;      // engine_total - table_sum
  double smallest_row = 0.0;  // smallest |evaluated| row
  bool flagged = false;       // |residual| > smallest_row
};

Reconciliation reconcile(Table t, const Bindings& bindings, double engine_total);

/// Columns: id, table, coefficient_num, coefficient_den, factors,
/// paper_value_rad, paper_relative.
std::string export_csv();
std::string export_json();

}  // namespace iphase::termcat
