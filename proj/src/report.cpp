#include "iphase/report.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "text_util.hpp"

namespace iphase::report {

using nlohmann::ordered_json;
using termcat::ModePair;
using termcat::Table;
using detail::csv_escape;
using detail::format_significant;

namespace {

constexpr int kMachineDigits = 17;
constexpr int kRowDigits = 3;
constexpr int kTotalDigits = 10;

const ModePair kModePairs[] = {
    {DynamicsMode::Full, DynamicsMode::Full},
    {DynamicsMode::NoGradient, DynamicsMode::Full},
    {DynamicsMode::FreeFall, DynamicsMode::Full},
};

std::string status(bool pass) { return pass ? "pass" : "fail"; }

std::string modes_label(const ModePair& m) {
  return "phi(" + std::string(iphase::to_string(m.trajectory)) + ", " +
         std::string(iphase::to_string(m.action)) + ")";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

ordered_json breakdown_json(const PhaseBreakdown& b) {
  ordered_json j;
  j["trajectory_mode"] = iphase::to_string(b.trajectory_mode);
  j["action_mode"] = iphase::to_string(b.action_mode);
  j["prop_rad"] = b.prop;
  j["laser_rad"] = b.laser;
  j["sep_rad"] = b.sep;
  j["total_rad"] = b.total;
  return j;
}

ordered_json table_json(const ComparisonReport& r) {
  ordered_json j;
  j["table"] = termcat::to_string(r.table);
  j["preset"] = r.preset;
  j["tolerance"] = to_string(r.tolerance);
  auto& rows = j["rows"] = ordered_json::array();
  for (const TermRow& row : r.rows) {
    ordered_json o;
    o["id"] = row.id;
    o["formula"] = row.formula;
    o["evaluated_rad"] = row.evaluated;
    o["paper_rad"] = row.paper;
    o["rel_dev"] = row.rel_dev;
    o["tolerance"] = row.tolerance;
    o["sign_checked"] = row.sign_checked;
    o["status"] = status(row.pass);
    rows.push_back(std::move(o));
  }
  auto& engine = j["engine"] = ordered_json::array();
  for (const ModeTotal& t : r.totals) engine.push_back(breakdown_json(t.breakdown));
  j["reference_trajectory_mode"] = iphase::to_string(r.reference_modes.trajectory);
  j["reference_action_mode"] = iphase::to_string(r.reference_modes.action);
  j["table_sum_rad"] = r.table_sum;
  j["engine_total_rad"] = r.engine_total;
  j["residual_rad"] = r.residual;
  j["residual_bound_rad"] = r.residual_bound;
  j["residual_flagged"] = r.residual_flagged;
  j["residual_status"] = status(r.residual_pass());
  j["pass"] = r.pass();
  return j;
}

const char* kCsvHeader = "preset,term_id,formula,evaluated_rad,paper_rad,rel_dev,status\n";

void table_csv(std::ostream& out, const ComparisonReport& r) {
  const std::string preset = csv_escape(r.preset);
  const std::string table = std::string(termcat::to_string(r.table));
  for (const TermRow& row : r.rows) {
    out << preset << ',' << row.id << ',' << csv_escape(row.formula) << ','
        << format_significant(row.evaluated, kMachineDigits) << ','
        << format_significant(row.paper, kMachineDigits) << ','
        << format_significant(row.rel_dev, kMachineDigits) << ',' << status(row.pass) << '\n';
  }
  for (const ModeTotal& t : r.totals) {
    out << preset << ',' << table << ".engine." << iphase::to_string(t.modes.trajectory) << ','
        << csv_escape(modes_label(t.modes)) << ','
        << format_significant(t.breakdown.total, kMachineDigits) << ",,,info\n";
  }
  out << preset << ',' << table << ".table_sum,sum of rows,"
      << format_significant(r.table_sum, kMachineDigits) << ",,,info\n";
  out << preset << ',' << table << ".residual," << csv_escape(modes_label(r.reference_modes))
      << " - sum of rows," << format_significant(r.residual, kMachineDigits) << ",,,"
      << status(r.residual_pass()) << '\n';
}

void table_text(std::ostream& out, const ComparisonReport& r) {
  out << termcat::to_string(r.table) << " (preset " << r.preset << ", tolerance "
      << to_string(r.tolerance) << ")\n";
  out << pad("id", 10) << pad("term", 40) << pad("phase_rad", 12) << pad("paper_rad", 12)
      << pad("rel_dev", 10) << "status\n";
  for (const TermRow& row : r.rows) {
    out << pad(row.id, 10) << pad(row.formula, 40)
        << pad(format_significant(row.evaluated, kRowDigits), 12)
        << pad(format_significant(row.paper, kRowDigits), 12)
        << pad(format_significant(row.rel_dev, 2), 10) << status(row.pass) << '\n';
  }
  for (const ModeTotal& t : r.totals) {
    out << pad("engine", 10) << pad(modes_label(t.modes), 40)
        << format_significant(t.breakdown.total, kTotalDigits) << '\n';
  }
  out << "table sum " << format_significant(r.table_sum, kTotalDigits) << "; residual vs "
      << modes_label(r.reference_modes) << ' ' << format_significant(r.residual, kRowDigits)
      << " (bound " << format_significant(r.residual_bound, kRowDigits) << ") "
      << status(r.residual_pass()) << '\n';
}

ConfigurationPreset preset_or_table_preset(std::string_view name, std::optional<Table>& table) {
  table = termcat::parse_table(name);
  if (table) return make_preset(to_string(termcat::preset_for(*table)));
  const auto kind = parse_preset(name);
  if (!kind) throw std::invalid_argument("unknown preset or table '" + std::string(name) + "'");
  table = termcat::parse_table(to_string(*kind));
  return make_preset(name);
}

}  // namespace

std::optional<Format> parse_format(std::string_view text) {
  if (text == "text") return Format::Text;
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  return std::nullopt;
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Text: return "text";
    case Format::Csv: return "csv";
    case Format::Json: return "json";
  }
  return "?";
}

std::string_view extension(Format f) {
  switch (f) {
    case Format::Text: return "txt";
    case Format::Csv: return "csv";
    case Format::Json: return "json";
  }
  return "?";
}

std::optional<ToleranceClass> parse_tolerance(std::string_view text) {
  if (text == "paper") return ToleranceClass::Paper;
  if (text == "strict") return ToleranceClass::Strict;
  return std::nullopt;
}

std::string_view to_string(ToleranceClass t) {
  return t == ToleranceClass::Paper ? "paper" : "strict";
}

double row_tolerance(const termcat::PhaseTerm& term, ToleranceClass tolerance) {
  if (tolerance == ToleranceClass::Strict) return 0.005;
  return term.rotation_dependent() ? 0.10 : 0.02;
}

double residual_bound(Table t) {
  switch (t) {
    case Table::Recoil: return 1e-2;
    case Table::Gyroscope: return 1e-6;
    case Table::Gravimeter:
    case Table::Clock:
    case Table::Perturbative:
      return 1e-4;
  }
  return 0.0;
}

bool ComparisonReport::residual_pass() const { return std::abs(residual) <= residual_bound; }

bool ComparisonReport::pass() const { return failures().empty(); }

std::vector<std::string> ComparisonReport::failures() const {
  std::vector<std::string> out;
  for (const TermRow& row : rows) {
    if (!row.pass) out.push_back(row.id);
  }
  if (!residual_pass()) out.push_back(std::string(termcat::to_string(table)) + ".residual");
  return out;
}

ComparisonReport build_table_report(Table t, const ConfigurationPreset& preset,
                                    ToleranceClass tolerance, const EvaluationOptions& options) {
  ComparisonReport r;
  r.table = t;
  r.preset = preset.name;
  r.tolerance = tolerance;
  r.reference_modes = termcat::modes_for(t);

  for (const ModePair& m : kModePairs) {
    r.totals.push_back({m, evaluate_preset(preset, m.trajectory, m.action, options)});
  }
  for (const ModeTotal& t : r.totals) {
    if (t.modes.trajectory == r.reference_modes.trajectory &&
        t.modes.action == r.reference_modes.action) {
      r.engine_total = t.breakdown.total;
    }
  }

  const termcat::Bindings bindings = termcat::bindings_for(preset, options.constants);
  const termcat::Reconciliation rec = termcat::reconcile(t, bindings, r.engine_total);
  r.table_sum = rec.table_sum;
  r.residual = rec.residual;
  r.residual_flagged = rec.flagged;
  r.residual_bound = residual_bound(t);

  for (const termcat::PhaseTerm& term : termcat::terms_for(t)) {
    TermRow row;
    row.id = term.id;
    row.formula = term.formula;
    row.evaluated = termcat::evaluate_term(term, bindings);
    row.paper = term.paper_value;
    row.rel_dev = std::abs(std::abs(row.evaluated) - std::abs(row.paper)) / std::abs(row.paper);
    row.tolerance = row_tolerance(term, tolerance);
    row.sign_checked = !term.sign_exempt;
    row.sign_ok = std::signbit(row.evaluated) == std::signbit(row.paper);
    row.pass = row.rel_dev <= row.tolerance && (row.sign_ok || !row.sign_checked);
    r.rows.push_back(std::move(row));
  }
  return r;
}

ComparisonReport build_table_report(Table t, ToleranceClass tolerance,
                                    const EvaluationOptions& options) {
  return build_table_report(t, make_preset(to_string(termcat::preset_for(t))), tolerance, options);
}

std::string render_table(const ComparisonReport& report, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Text:
      table_text(out, report);
      break;
    case Format::Csv:
      out << kCsvHeader;
      table_csv(out, report);
      break;
    case Format::Json: {
      ordered_json j;
      j["schema_version"] = 1;
      j.update(table_json(report));
      out << j.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

std::string render_tables(const std::vector<ComparisonReport>& reports, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Text:
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i > 0) out << '\n';
        table_text(out, reports[i]);
      }
      break;
    case Format::Csv:
      out << kCsvHeader;
      for (const auto& r : reports) table_csv(out, r);
      break;
    case Format::Json: {
      ordered_json j;
      j["schema_version"] = 1;
      auto& tables = j["tables"] = ordered_json::array();
      for (const auto& r : reports) tables.push_back(table_json(r));
      out << j.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

std::string render_table(std::string_view name, Format format, ToleranceClass tolerance) {
  std::optional<Table> table;
  const ConfigurationPreset preset = preset_or_table_preset(name, table);
  return render_table(build_table_report(*table, preset, tolerance), format);
}

bool ModeComparison::pass() const { return std::abs(full_minus_no_gradient()) <= target; }

std::optional<bool> ModeComparison::stretch_pass() const {
  if (!stretch_target) return std::nullopt;
  return std::abs(full_minus_no_gradient()) <= *stretch_target;
}

double default_target(PresetKind kind) { return kind == PresetKind::Gyroscope ? 1e-9 : 1e-5; }

std::optional<double> stretch_target(PresetKind kind) {
  if (kind == PresetKind::Gyroscope) return 2e-10;
  return std::nullopt;
}

ModeComparison compare_modes(const ConfigurationPreset& preset, std::optional<double> target,
                             const EvaluationOptions& options) {
  ModeComparison c;
  c.preset = preset.name;
  c.full = evaluate_preset(preset, DynamicsMode::Full, DynamicsMode::Full, options);
  c.no_gradient = evaluate_preset(preset, DynamicsMode::NoGradient, DynamicsMode::Full, options);
  c.free_fall = evaluate_preset(preset, DynamicsMode::FreeFall, DynamicsMode::Full, options);
  c.target = target.value_or(default_target(preset.kind));
  c.stretch_target = stretch_target(preset.kind);
  return c;
}

std::string render_mode_comparison(const ModeComparison& c, Format format) {
  struct Diff {
    const char* id;
    double value;
  };
  const Diff diffs[] = {{"full-no_gradient", c.full_minus_no_gradient()},
                        {"full-free_fall", c.full_minus_free_fall()},
                        {"no_gradient-free_fall", c.no_gradient_minus_free_fall()}};
  const PhaseBreakdown* totals[] = {&c.full, &c.no_gradient, &c.free_fall};
  const auto stretch = c.stretch_pass();

  std::ostringstream out;
  switch (format) {
    case Format::Text: {
      out << "mode comparison (preset " << c.preset << ")\n";
      for (const PhaseBreakdown* b : totals) {
        out << pad(modes_label({b->trajectory_mode, b->action_mode}), 28)
            << format_significant(b->total, kTotalDigits) << '\n';
      }
      for (const Diff& d : diffs) out << pad(d.id, 28) << format_significant(d.value, kRowDigits) << '\n';
      out << "target " << format_significant(c.target, kRowDigits) << " on |full-no_gradient|: "
          << status(c.pass()) << '\n';
      if (stretch) {
        out << "stretch target " << format_significant(*c.stretch_target, kRowDigits) << ": "
            << status(*stretch) << '\n';
      }
      break;
    }
    case Format::Csv: {
      out << "preset,quantity,value_rad,target_rad,status\n";
      for (const PhaseBreakdown* b : totals) {
        out << csv_escape(c.preset) << ','
            << csv_escape(modes_label({b->trajectory_mode, b->action_mode})) << ','
            << format_significant(b->total, kMachineDigits) << ",,info\n";
      }
      for (std::size_t i = 0; i < std::size(diffs); ++i) {
        const Diff& d = diffs[i];
        out << csv_escape(c.preset) << ',' << d.id << ','
            << format_significant(d.value, kMachineDigits) << ',';
        if (i == 0) {
          out << format_significant(c.target, kMachineDigits) << ',' << status(c.pass());
        } else {
          out << ",info";
        }
        out << '\n';
      }
      if (stretch) {
        out << csv_escape(c.preset) << ",stretch full-no_gradient,"
            << format_significant(c.full_minus_no_gradient(), kMachineDigits) << ','
            << format_significant(*c.stretch_target, kMachineDigits) << ',' << status(*stretch)
            << '\n';
      }
      break;
    }
    case Format::Json: {
      ordered_json j;
      j["schema_version"] = 1;
      j["preset"] = c.preset;
      auto& t = j["totals"] = ordered_json::array();
      for (const PhaseBreakdown* b : totals) t.push_back(breakdown_json(*b));
      auto& d = j["differences"] = ordered_json::object();
      for (const Diff& diff : diffs) d[diff.id] = diff.value;
      j["target_rad"] = c.target;
      j["stretch_target_rad"] = c.stretch_target ? ordered_json(*c.stretch_target) : ordered_json();
      j["stretch_pass"] = stretch ? ordered_json(*stretch) : ordered_json();
      j["pass"] = c.pass();
      out << j.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

std::string render_mode_comparison(std::string_view preset_name, Format format) {
  if (!parse_preset(preset_name)) {
    throw std::invalid_argument("unknown preset '" + std::string(preset_name) + "'");
  }
  return render_mode_comparison(compare_modes(make_preset(preset_name)), format);
}

std::string render_breakdown(std::string_view preset, const PhaseBreakdown& b, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Text:
      out << "preset      " << preset << '\n'
          << "modes       " << modes_label({b.trajectory_mode, b.action_mode}) << '\n'
          << "prop_rad    " << format_significant(b.prop, kTotalDigits) << '\n'
          << "laser_rad   " << format_significant(b.laser, kTotalDigits) << '\n'
          << "sep_rad     " << format_significant(b.sep, kTotalDigits) << '\n'
          << "total_rad   " << format_significant(b.total, kTotalDigits) << '\n';
      break;
    case Format::Csv:
      out << "preset,trajectory_mode,action_mode,prop_rad,laser_rad,sep_rad,total_rad\n"
          << csv_escape(preset) << ',' << iphase::to_string(b.trajectory_mode) << ','
          << iphase::to_string(b.action_mode) << ',' << format_significant(b.prop, kMachineDigits)
          << ',' << format_significant(b.laser, kMachineDigits) << ','
          << format_significant(b.sep, kMachineDigits) << ','
          << format_significant(b.total, kMachineDigits) << '\n';
      break;
    case Format::Json: {
      ordered_json j;
      j["schema_version"] = 1;
      j["preset"] = preset;
      j.update(breakdown_json(b));
      out << j.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

}  // namespace iphase::report
