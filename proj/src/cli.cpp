#include "iphase/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "iphase/config.hpp"
#include "iphase/report.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace iphase {

namespace fs = std::filesystem;
using report::Format;

namespace {

struct Flags {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
  std::string modes;
  std::string format;
  std::string out;
  std::string tolerance;
  std::string target;
  std::vector<std::string> axes;
  int nodes = 0;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.preset.empty()) cfg.preset = f.preset;
  for (const std::string& s : f.sets) {
    auto [key, value] = parse_assignment(s);
    cfg.parameters[key] = value;
  }
  if (!f.modes.empty()) {
    const ModeSelection m = parse_modes(f.modes);
    cfg.trajectory_mode = m.trajectory;
    cfg.action_mode = m.action;
  }
  if (f.nodes != 0) cfg.nodes = f.nodes;
  if (!f.target.empty()) cfg.target = parse_quantity("target", f.target);
  if (!f.format.empty()) cfg.format = f.format;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.tolerance.empty()) cfg.tolerance = f.tolerance;
  if (!f.axes.empty()) {
    cfg.axes.clear();
    for (const std::string& a : f.axes) cfg.axes.push_back(parse_axis(a));
  }
  return cfg;
}

Format format_of(const RunConfig& cfg, Format fallback) {
  if (!cfg.format) return fallback;
  const auto f = report::parse_format(*cfg.format);
  if (!f) throw ConfigError("unknown format '" + *cfg.format + "' (text, csv, json)");
  return *f;
}

EvaluationOptions options_of(const RunConfig& cfg) {
  EvaluationOptions o;
  if (cfg.nodes) {
    if (*cfg.nodes < 1 || *cfg.nodes > 1000) throw ConfigError("--nodes must be in [1, 1000]");
    o.quadrature_nodes = *cfg.nodes;
  }
  return o;
}

std::string require_preset(const RunConfig& cfg) {
  if (!cfg.preset) throw ConfigError("no preset given (--preset or [sequence] preset)");
  if (!parse_preset(*cfg.preset)) throw ConfigError("unknown preset '" + *cfg.preset + "'");
  return *cfg.preset;
}

std::optional<fs::path> out_root() {
  const char* root = std::getenv("IPHASE_OUT_DIR");
  if (root == nullptr || *root == '\0') return std::nullopt;
  return fs::path(root);
}

/// --out, else IPHASE_OUT_DIR/default_name, else none (stdout).
std::optional<fs::path> output_file(const RunConfig& cfg, const std::string& default_name) {
  if (cfg.out) return fs::path(*cfg.out);
  if (auto root = out_root()) return *root / default_name;
  return std::nullopt;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void emit(const std::string& text, const std::optional<fs::path>& path, std::ostream& out) {
  if (path) {
    write_file(*path, text);
    out << "wrote " << path->string() << '\n';
  } else {
    out << text;
  }
}

ConfigurationPreset preset_from(const std::string& name, const RunConfig& cfg) {
  return make_preset(name, cfg.parameters, cfg.gradient);
}

int cmd_tables(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Format format = format_of(cfg, Format::Text);
  report::ToleranceClass tolerance = report::ToleranceClass::Paper;
  if (cfg.tolerance) {
    const auto t = report::parse_tolerance(*cfg.tolerance);
    if (!t) throw ConfigError("unknown tolerance class '" + *cfg.tolerance + "' (paper, strict)");
    tolerance = *t;
  }

  std::vector<termcat::Table> tables = termcat::all_tables();
  if (cfg.preset) {
    const auto t = termcat::parse_table(*cfg.preset);
    if (!t) throw ConfigError("unknown preset or table '" + *cfg.preset + "'");
    tables = {*t};
  }

  // Each override has to fit at least one selected preset; a preset only
  // takes the keys it has.
  for (const auto& [key, value] : cfg.parameters) {
    const bool used = std::any_of(tables.begin(), tables.end(), [&](termcat::Table t) {
      return default_parameters(termcat::preset_for(t)).contains(key);
    });
    if (!used) throw ConfigError("no selected table has a parameter '" + key + "'");
  }

  const EvaluationOptions options = options_of(cfg);
  std::vector<std::future<report::ComparisonReport>> jobs;
  for (termcat::Table t : tables) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &options, tolerance, t] {
      const PresetKind kind = termcat::preset_for(t);
      const ParameterMap defaults = default_parameters(kind);
      ParameterMap params;
      for (const auto& [key, value] : cfg.parameters) {
        if (defaults.contains(key)) params[key] = value;
      }
      const auto preset = make_preset(to_string(kind), params, cfg.gradient);
      return report::build_table_report(t, preset, tolerance, options);
    }));
  }
  std::vector<report::ComparisonReport> reports;
  for (auto& job : jobs) reports.push_back(job.get());

  std::optional<fs::path> dir = cfg.out ? std::optional(fs::path(*cfg.out)) : out_root();
  if (dir) {
    for (const auto& r : reports) {
      const fs::path path = *dir / (std::string(termcat::to_string(r.table)) + "." +
                                    std::string(report::extension(format)));
      write_file(path, report::render_table(r, format));
      out << termcat::to_string(r.table) << ": " << (r.pass() ? "pass" : "fail") << " ("
          << r.rows.size() << " rows) -> " << path.string() << '\n';
    }
  } else {
    out << report::render_tables(reports, format);
  }

  bool pass = true;
  for (const auto& r : reports) {
    for (const std::string& id : r.failures()) {
      pass = false;
      const auto row = std::find_if(r.rows.begin(), r.rows.end(),
                                    [&](const report::TermRow& x) { return x.id == id; });
      err << "tolerance failure: " << id;
      if (row != r.rows.end()) {
        err << " rel_dev " << detail::format_significant(row->rel_dev, 3) << " > "
            << detail::format_significant(row->tolerance, 3);
        if (row->sign_checked && !row->sign_ok) err << ", sign differs";
      } else {
        err << ' ' << detail::format_significant(std::abs(r.residual), 3) << " > "
            << detail::format_significant(r.residual_bound, 3);
      }
      err << '\n';
    }
  }
  return pass ? kExitPass : kExitToleranceFailure;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const std::string name = require_preset(cfg);
  const Format format = format_of(cfg, Format::Text);
  const DynamicsMode traj = cfg.trajectory_mode.value_or(DynamicsMode::Full);
  const DynamicsMode action = cfg.action_mode.value_or(traj);
  const auto preset = preset_from(name, cfg);
  const PhaseBreakdown b = evaluate_preset(preset, traj, action, options_of(cfg));
  emit(report::render_breakdown(name, b, format),
       output_file(cfg, "run-" + name + "." + std::string(report::extension(format))), out);
  return kExitPass;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string name = require_preset(cfg);
  const Format format = format_of(cfg, Format::Text);
  if (cfg.target && !(*cfg.target > 0.0)) throw ConfigError("--target must be positive");
  const auto c = report::compare_modes(preset_from(name, cfg), cfg.target, options_of(cfg));
  emit(report::render_mode_comparison(c, format),
       output_file(cfg, "compare-" + name + "." + std::string(report::extension(format))), out);
  if (!c.pass()) {
    err << "target missed: |full-no_gradient| = "
        << detail::format_significant(std::abs(c.full_minus_no_gradient()), 3) << " > "
        << detail::format_significant(c.target, 3) << '\n';
    return kExitToleranceFailure;
  }
  return kExitPass;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const std::string name = require_preset(cfg);
  const Format format = format_of(cfg, Format::Csv);
  if (cfg.axes.empty() || cfg.axes.size() > 2) throw ConfigError("sweep takes one or two --axis");
  const ParameterMap defaults = default_parameters(*parse_preset(name));
  for (const SweepAxis& a : cfg.axes) {
    if (!defaults.contains(a.name)) {
      throw ConfigError("preset '" + name + "' has no parameter '" + a.name + "'");
    }
  }
  if (cfg.axes.size() == 2 && cfg.axes[0].name == cfg.axes[1].name) {
    throw ConfigError("sweep axes must differ");
  }

  std::vector<std::vector<double>> axis_values;
  for (const SweepAxis& a : cfg.axes) {
    auto v = a.values();
    std::sort(v.begin(), v.end());
    axis_values.push_back(std::move(v));
  }
  std::vector<std::vector<double>> points;
  for (double x : axis_values[0]) {
    if (axis_values.size() == 1) {
      points.push_back({x});
    } else {
      for (double y : axis_values[1]) points.push_back({x, y});
    }
  }

  const DynamicsMode traj = cfg.trajectory_mode.value_or(DynamicsMode::Full);
  const DynamicsMode action = cfg.action_mode.value_or(traj);
  const EvaluationOptions options = options_of(cfg);
  // Validate the shared configuration once so errors surface before the
  // workers start.
  preset_from(name, cfg);

  std::vector<PhaseBreakdown> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      ParameterMap params = cfg.parameters;
      for (std::size_t a = 0; a < cfg.axes.size(); ++a) params[cfg.axes[a].name] = points[i][a];
      results[i] = evaluate_preset(make_preset(name, params, cfg.gradient), traj, action, options);
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(points.size(), 1));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < n_workers; ++w) jobs.push_back(std::async(std::launch::async, worker));
  for (auto& j : jobs) j.get();

  std::ostringstream doc;
  if (format == Format::Json) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["preset"] = name;
    j["trajectory_mode"] = to_string(traj);
    j["action_mode"] = to_string(action);
    auto& axes = j["axes"] = nlohmann::ordered_json::array();
    for (const SweepAxis& a : cfg.axes) axes.push_back(a.name);
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      nlohmann::ordered_json row;
      for (std::size_t a = 0; a < cfg.axes.size(); ++a) row[cfg.axes[a].name] = points[i][a];
      row["prop_rad"] = results[i].prop;
      row["laser_rad"] = results[i].laser;
      row["sep_rad"] = results[i].sep;
      row["total_rad"] = results[i].total;
      rows.push_back(std::move(row));
    }
    doc << j.dump(2) << '\n';
  } else {
    const char sep = format == Format::Csv ? ',' : ' ';
    const int digits = format == Format::Csv ? 17 : 10;
    for (const SweepAxis& a : cfg.axes) doc << a.name << sep;
    doc << "prop_rad" << sep << "laser_rad" << sep << "sep_rad" << sep << "total_rad\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (double x : points[i]) doc << detail::format_significant(x, digits) << sep;
      doc << detail::format_significant(results[i].prop, digits) << sep
          << detail::format_significant(results[i].laser, digits) << sep
          << detail::format_significant(results[i].sep, digits) << sep
          << detail::format_significant(results[i].total, digits) << '\n';
    }
  }
  emit(doc.str(), output_file(cfg, "sweep-" + name + "." + std::string(report::extension(format))),
       out);
  return kExitPass;
}

int cmd_export_catalog(const RunConfig& cfg, std::ostream& out) {
  const Format format = format_of(cfg, Format::Json);
  if (format == Format::Text) throw ConfigError("export-catalog writes csv or json");
  const std::string doc = format == Format::Csv ? termcat::export_csv() : termcat::export_json();
  emit(doc, output_file(cfg, "catalog." + std::string(report::extension(format))), out);
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase shifts of light-pulse atom interferometers", "iphase"};
  app.require_subcommand(1, 1);
  Flags f;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--preset", f.preset, "Preset (gravimeter, clock, recoil, gyroscope)");
    cmd->add_option("--config", f.config, "TOML run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--set", f.sets, "Parameter override KEY=VALUE, repeatable");
    cmd->add_option("--format", f.format, "text, csv or json");
    cmd->add_option("--out", f.out, "Output path");
    cmd->add_option("--nodes", f.nodes, "Gauss-Legendre nodes per segment");
  };

  CLI::App* tables = app.add_subcommand("tables", "Reproduce the term tables");
  common(tables);
  tables->add_option("--tolerance", f.tolerance, "paper or strict");

  CLI::App* run = app.add_subcommand("run", "Evaluate one preset");
  common(run);
  run->add_option("--modes", f.modes, "TRAJ or TRAJ,ACTION (free_fall, no_gradient, full)");

  CLI::App* compare = app.add_subcommand("compare", "Compare evaluation modes");
  common(compare);
  compare->add_option("--target", f.target, "Bound on |full - no_gradient|, rad");

  CLI::App* sweep = app.add_subcommand("sweep", "Total phase over a parameter grid");
  common(sweep);
  sweep->add_option("--modes", f.modes, "TRAJ or TRAJ,ACTION");
  sweep->add_option("--axis", f.axes, "NAME=START:STOP:COUNT, once or twice");

  CLI::App* export_catalog = app.add_subcommand("export-catalog", "Write the term catalog");
  export_catalog->add_option("--format", f.format, "csv or json");
  export_catalog->add_option("--out", f.out, "Output path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(f);
    if (tables->parsed()) return cmd_tables(cfg, out, err);
    if (run->parsed()) return cmd_run(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out, err);
    if (sweep->parsed()) return cmd_sweep(cfg, out);
    return cmd_export_catalog(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace iphase
