#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iphase/termcat.hpp"

namespace iphase::report {

enum class Format { Text, Csv, Json };

std::optional<Format> parse_format(std::string_view text);
std::string_view to_string(Format f);
/// File extension without the dot: txt, csv, json.
std::string_view extension(Format f);

/// paper: 2% on rows without rotation, 10% on rotation rows.
/// strict: 0.5% on every row.
enum class ToleranceClass { Paper, Strict };

std::optional<ToleranceClass> parse_tolerance(std::string_view text);
std::string_view to_string(ToleranceClass t);

double row_tolerance(const termcat::PhaseTerm& term, ToleranceClass tolerance);

/// Bound on |engine total - table sum| for each table, rad.
double residual_bound(termcat::Table t);

struct TermRow {
  std::string id;
  std::string formula;
  double evaluated = 0.0;
  double paper = 0.0;
  double rel_dev = 0.0;  // ||evaluated| - |paper|| / |paper|
  double tolerance = 0.0;
  bool sign_checked = true;
  bool sign_ok = true;
  bool pass = false;
};

struct ModeTotal {
  termcat::ModePair modes;
  PhaseBreakdown breakdown;
};

struct ComparisonReport {
  termcat::Table table;
  std::string preset;
  ToleranceClass tolerance = ToleranceClass::Paper;
  std::vector<TermRow> rows;
  /// (full, full), (no_gradient, full), (free_fall, full).
  std::vector<ModeTotal> totals;
  termcat::ModePair reference_modes;  // modes the residual is taken against
  double table_sum = 0.0;
  double engine_total = 0.0;
  double residual = 0.0;
  double residual_bound = 0.0;
  bool residual_flagged = false;  // residual above the smallest row

  bool residual_pass() const;
  bool pass() const;
  /// Ids of failing rows, plus "residual" if the residual bound is missed.
  std::vector<std::string> failures() const;
};

ComparisonReport build_table_report(termcat::Table t, const ConfigurationPreset& preset,
                                    ToleranceClass tolerance = ToleranceClass::Paper,
                                    const EvaluationOptions& options = {});
/// Uses the table's default preset.
ComparisonReport build_table_report(termcat::Table t,
                                    ToleranceClass tolerance = ToleranceClass::Paper,
                                    const EvaluationOptions& options = {});

std::string render_table(const ComparisonReport& report, Format format);
/// Several tables in one document; the json form wraps them in "tables".
std::string render_tables(const std::vector<ComparisonReport>& reports, Format format);
/// Accepts a table name or a preset name. Throws std::invalid_argument if
/// neither is known.
std::string render_table(std::string_view name, Format format,
                         ToleranceClass tolerance = ToleranceClass::Paper);

struct ModeComparison {
  std::string preset;
  PhaseBreakdown full;         // (full, full)
  PhaseBreakdown no_gradient;  // (no_gradient, full)
  PhaseBreakdown free_fall;    // (free_fall, full)
  double target = 0.0;
  std::optional<double> stretch_target;

  double full_minus_no_gradient() const { return full.total - no_gradient.total; }
  double full_minus_free_fall() const { return full.total - free_fall.total; }
  double no_gradient_minus_free_fall() const { return no_gradient.total - free_fall.total; }
  bool pass() const;
  std::optional<bool> stretch_pass() const;
};

/// 1e-9 rad for the gyroscope, 1e-5 rad otherwise.
double default_target(PresetKind kind);
std::optional<double> stretch_target(PresetKind kind);

ModeComparison compare_modes(const ConfigurationPreset& preset,
                             std::optional<double> target = std::nullopt,
                             const EvaluationOptions& options = {});

std::string render_mode_comparison(const ModeComparison& comparison, Format format);
/// Throws std::invalid_argument for an unknown preset.
std::string render_mode_comparison(std::string_view preset_name, Format format);

std::string render_breakdown(std::string_view preset, const PhaseBreakdown& breakdown,
                             Format format);

}  // namespace iphase::report
