#include "iphase/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace iphase {

namespace {

enum class Kind { Dimensionless, Length, Time, Angle, Velocity, Acceleration, Rate, Mass };

struct Unit {
  Kind kind;
  double multiply;
  double divide;  // exact powers of ten keep decimal inputs correctly rounded
};

const std::map<std::string, Unit, std::less<>>& units() {
  static const std::map<std::string, Unit, std::less<>> table{
      {"nm", {Kind::Length, 1.0, 1e9}},
      {"um", {Kind::Length, 1.0, 1e6}},
      {"mm", {Kind::Length, 1.0, 1e3}},
      {"cm", {Kind::Length, 1.0, 1e2}},
      {"m", {Kind::Length, 1.0, 1.0}},
      {"km", {Kind::Length, 1e3, 1.0}},
      {"s", {Kind::Time, 1.0, 1.0}},
      {"ms", {Kind::Time, 1.0, 1e3}},
      {"us", {Kind::Time, 1.0, 1e6}},
      {"deg", {Kind::Angle, 1.0, 1.0}},
      {"rad", {Kind::Angle, 180.0, std::numbers::pi}},
      {"m/s", {Kind::Velocity, 1.0, 1.0}},
      {"mm/s", {Kind::Velocity, 1.0, 1e3}},
      {"m/s^2", {Kind::Acceleration, 1.0, 1.0}},
      {"m/s2", {Kind::Acceleration, 1.0, 1.0}},
      {"rad/s", {Kind::Rate, 1.0, 1.0}},
      {"1/s", {Kind::Rate, 1.0, 1.0}},
      {"kg", {Kind::Mass, 1.0, 1.0}},
      {"g", {Kind::Mass, 1.0, 1e3}},
  };
  return table;
}

Kind kind_of(std::string_view key) {
  static const std::map<std::string, Kind, std::less<>> kinds{
      {"lambda_eff", Kind::Length},  {"earth_radius_m", Kind::Length}, {"T", Kind::Time},
      {"T_rec", Kind::Time},         {"N", Kind::Dimensionless},       {"v_launch", Kind::Velocity},
      {"v_y", Kind::Velocity},       {"g_z", Kind::Acceleration},      {"omega_rad_s", Kind::Rate},
      {"mass_kg", Kind::Mass},       {"latitude_deg", Kind::Angle},
  };
  const auto it = kinds.find(key);
  return it == kinds.end() ? Kind::Dimensionless : it->second;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Leading number; advances `pos` past it.
std::optional<double> read_number(std::string_view s, std::size_t& pos) {
  const char* first = s.data() + pos;
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || !std::isfinite(value)) return std::nullopt;
  pos = static_cast<std::size_t>(ptr - s.data());
  return value;
}

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

}  // namespace

double parse_quantity(std::string_view key, std::string_view text) {
  const std::string_view s = trim(text);
  std::size_t pos = 0;
  auto value = read_number(s, pos);
  if (!value) throw ConfigError("value for " + in_quotes(key) + " is not a number: " + in_quotes(text));
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    const auto den = read_number(s, pos);
    if (!den || *den == 0.0) throw ConfigError("bad fraction for " + in_quotes(key) + ": " + in_quotes(text));
    *value /= *den;
  }
  const std::string_view suffix = trim(s.substr(pos));
  if (suffix.empty()) return *value;

  const auto it = units().find(suffix);
  if (it == units().end()) throw ConfigError("unknown unit " + in_quotes(suffix) + " for " + in_quotes(key));
  if (it->second.kind != kind_of(key)) {
    throw ConfigError("unit " + in_quotes(suffix) + " does not fit parameter " + in_quotes(key));
  }
  return *value * it->second.multiply / it->second.divide;
}

std::pair<std::string, double> parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected KEY=VALUE, got " + in_quotes(text));
  const std::string key(trim(text.substr(0, eq)));
  if (key.empty()) throw ConfigError("empty key in " + in_quotes(text));
  return {key, parse_quantity(key, text.substr(eq + 1))};
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> out;
  if (count < 1) return out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {start};
  const double step = (stop - start) / (count - 1);
  for (int i = 0; i < count - 1; ++i) out.push_back(start + i * step);
  out.push_back(stop);
  return out;
}

SweepAxis parse_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected NAME=START:STOP:COUNT, got " + in_quotes(text));
  SweepAxis axis;
  axis.name = std::string(trim(text.substr(0, eq)));
  std::vector<std::string_view> parts;
  std::string_view rest = text.substr(eq + 1);
  for (std::size_t c; (c = rest.find(':')) != std::string_view::npos; rest = rest.substr(c + 1)) {
    parts.push_back(rest.substr(0, c));
  }
  parts.push_back(rest);
  if (axis.name.empty() || parts.size() != 3) {
    throw ConfigError("expected NAME=START:STOP:COUNT, got " + in_quotes(text));
  }
  axis.start = parse_quantity(axis.name, parts[0]);
  axis.stop = parse_quantity(axis.name, parts[1]);
  const std::string_view count = trim(parts[2]);
  const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), axis.count);
  if (ec != std::errc() || ptr != count.data() + count.size()) {
    throw ConfigError("axis count is not an integer: " + in_quotes(count));
  }
  if (axis.count < 1) throw ConfigError("axis " + in_quotes(axis.name) + " has an empty range");
  if (axis.count > 1 && axis.start == axis.stop) {
    throw ConfigError("axis " + in_quotes(axis.name) + " has an empty range");
  }
  if (axis.count > 100000) throw ConfigError("axis " + in_quotes(axis.name) + " has too many points");
  return axis;
}

ModeSelection parse_modes(std::string_view text) {
  auto one = [](std::string_view s) {
    const auto mode = parse_dynamics_mode(trim(s));
    if (!mode) {
      throw ConfigError("unknown mode " + in_quotes(trim(s)) + " (free_fall, no_gradient, full)");
    }
    return *mode;
  };
  ModeSelection m;
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    m.trajectory = m.action = one(text);
  } else {
    m.trajectory = one(text.substr(0, comma));
    m.action = one(text.substr(comma + 1));
  }
  return m;
}

namespace {

struct Value {
  enum class Type { Number, String, Array } type = Type::Number;
  double number = 0.0;
  std::string text;  // also the literal text of a number
  std::vector<Value> items;
  int line = 0;
};

// Reader for the TOML subset the run configs use: [section] headers,
// bare keys, numbers, strings and (nested, multi-line) arrays.
class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  template <class OnSection, class OnKey>
  void run(OnSection on_section, OnKey on_key) {
    while (true) {
      skip_blank_lines();
      if (eof()) return;
      if (peek() == '[') {
        const int line = line_;
        ++pos_;
        const std::string name = bare_key();
        skip_spaces();
        expect(']');
        end_of_line();
        on_section(name, line);
      } else {
        const int line = line_;
        const std::string key = bare_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        Value v = value();
        end_of_line();
        on_key(key, std::move(v), line);
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void newline() {
    if (peek() == '\r') ++pos_;
    if (peek() != '\n') fail("expected end of line");
    ++pos_;
    ++line_;
  }

  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (eof()) return;
      if (peek() != '\n' && peek() != '\r') return;
      newline();
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (!eof()) newline();
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  Value value() {
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"' || c == '\'') {
      v.type = Value::Type::String;
      v.text = string(c);
    } else if (c == '[') {
      v.type = Value::Type::Array;
      ++pos_;
      while (true) {
        skip_blank_lines();
        if (peek() == ']') break;
        v.items.push_back(value());
        skip_blank_lines();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() != ']') fail("expected ',' or ']' in array");
      }
      ++pos_;
    } else {
      v.type = Value::Type::Number;
      const std::size_t start = pos_;
      while (!eof() && std::string_view("+-.0123456789eE_").find(peek()) != std::string_view::npos) {
        ++pos_;
      }
      std::string literal(s_.substr(start, pos_ - start));
      std::erase(literal, '_');
      std::size_t used = 0;
      const auto n = read_number(literal, used);
      if (literal.empty() || !n || used != literal.size()) fail("expected a value");
      v.number = *n;
      v.text = literal;
    }
    return v;
  }

  std::string string(char quote) {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == quote) return out;
      if (c == '\\' && quote == '"') {
        if (eof()) fail("unterminated string");
        const char e = s_[pos_++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string where(int line) { return "config line " + std::to_string(line) + ": "; }

const std::string& as_string(const std::string& key, const Value& v) {
  if (v.type != Value::Type::String) throw ConfigError(where(v.line) + in_quotes(key) + " must be a string");
  return v.text;
}

double as_quantity(const std::string& key, const Value& v) {
  if (v.type == Value::Type::Number) return v.number;
  if (v.type == Value::Type::String) {
    try {
      return parse_quantity(key, v.text);
    } catch (const ConfigError& e) {
      throw ConfigError(where(v.line) + e.what());
    }
  }
  throw ConfigError(where(v.line) + in_quotes(key) + " must be a number");
}

Mat3 as_matrix(const std::string& key, const Value& v) {
  const auto bad = [&] { return ConfigError(where(v.line) + in_quotes(key) + " must be a 3x3 array of numbers"); };
  if (v.type != Value::Type::Array || v.items.size() != 3) throw bad();
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    const Value& row = v.items[static_cast<std::size_t>(i)];
    if (row.type != Value::Type::Array || row.items.size() != 3) throw bad();
    for (int j = 0; j < 3; ++j) {
      const Value& x = row.items[static_cast<std::size_t>(j)];
      if (x.type != Value::Type::Number) throw bad();
      m(i, j) = x.number;
    }
  }
  return m;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  static const std::map<std::string, std::set<std::string>, std::less<>> schema{
      {"environment", {"latitude_deg", "earth_radius_m", "g_z", "omega_rad_s", "gradient"}},
      {"sequence", {"preset", "T", "T_rec", "N", "v_launch", "v_y", "lambda_eff", "mass_kg"}},
      {"evaluation", {"modes", "trajectory_mode", "action_mode", "nodes", "target"}},
      {"output", {"format", "out", "tolerance"}},
      {"sweep", {"axes"}},
  };

  RunConfig cfg;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::optional<std::string> modes;

  Reader reader(text);
  reader.run(
      [&](const std::string& name, int line) {
        if (!schema.contains(name)) throw ConfigError(where(line) + "unknown section [" + name + "]");
        if (!seen_sections.insert(name).second) {
          throw ConfigError(where(line) + "duplicate section [" + name + "]");
        }
        section = name;
      },
      [&](const std::string& key, Value v, int line) {
        if (section.empty()) throw ConfigError(where(line) + "key " + in_quotes(key) + " outside a section");
        if (!schema.at(section).contains(key)) {
          throw ConfigError(where(line) + "unknown key " + in_quotes(key) + " in [" + section + "]");
        }
        if (!seen_keys.insert(section + "." + key).second) {
          throw ConfigError(where(line) + "duplicate key " + in_quotes(key));
        }
        try {
          if (key == "preset") {
            cfg.preset = as_string(key, v);
          } else if (key == "gradient") {
            cfg.gradient = as_matrix(key, v);
          } else if (key == "modes") {
            modes = as_string(key, v);
          } else if (key == "trajectory_mode" || key == "action_mode") {
            const auto mode = parse_dynamics_mode(as_string(key, v));
            if (!mode) throw ConfigError("unknown mode " + in_quotes(v.text));
            (key == "trajectory_mode" ? cfg.trajectory_mode : cfg.action_mode) = *mode;
          } else if (key == "nodes") {
            if (v.type != Value::Type::Number || v.number != std::floor(v.number) || v.number < 1 ||
                v.number > 1000) {
              throw ConfigError("'nodes' must be an integer in [1, 1000]");
            }
            cfg.nodes = static_cast<int>(v.number);
          } else if (key == "target") {
            cfg.target = as_quantity(key, v);
          } else if (key == "format") {
            cfg.format = as_string(key, v);
          } else if (key == "out") {
            cfg.out = as_string(key, v);
          } else if (key == "tolerance") {
            cfg.tolerance = as_string(key, v);
          } else if (key == "axes") {
            if (v.type != Value::Type::Array) throw ConfigError("'axes' must be an array of strings");
            for (const Value& item : v.items) cfg.axes.push_back(parse_axis(as_string(key, item)));
          } else {
            cfg.parameters[key] = as_quantity(key, v);
          }
        } catch (const ConfigError& e) {
          const std::string msg = e.what();
          if (msg.rfind("config line", 0) == 0) throw;
          throw ConfigError(where(line) + msg);
        }
      });

  if (modes) {
    if (cfg.trajectory_mode || cfg.action_mode) {
      throw ConfigError("'modes' conflicts with trajectory_mode/action_mode");
    }
    const ModeSelection m = parse_modes(*modes);
    cfg.trajectory_mode = m.trajectory;
    cfg.action_mode = m.action;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace iphase
