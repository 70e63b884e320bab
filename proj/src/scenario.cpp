#include "leowb/scenario.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace leowb {

using nlohmann::json;

ParseError::ParseError(const std::string& what, int line, int column)
    : ConfigError("parse error at line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Derived quantities

int ScenarioConfig::snapshot_count() const {
  return static_cast<int>(std::llround(pass_s * update_rate_Hz));
}

double ScenarioConfig::noise_variance() const {
  return noise_variance_W > 0.0 ? noise_variance_W : kBoltzmann * noise_temperature_K * bandwidth_Hz;
}

double ScenarioConfig::rician_K_dB() const { return los_only ? 120.0 : K_R_dB; }

ArSvdConfig ScenarioConfig::arsvd_config(double eta) const {
  ArSvdConfig c;
  c.eta = eta;
  c.k_init = k_init;
  c.oversampling = p;
  c.max_iterations = i_max;
  return c;
}

UpdatePolicy ScenarioConfig::update_policy() const {
  return UpdatePolicy{rank_ratio_threshold, reset_interval};
}

OrbitParams ScenarioConfig::orbit_params() const {
  OrbitParams o;
  o.altitude_m = altitude_m;
  o.pass_s = pass_s;
  o.min_elevation_deg = min_elevation_deg;
  o.centroid = GeodeticPosition{centroid_lat_deg * kPi / 180.0, centroid_lon_deg * kPi / 180.0, 0.0};
  return o;
}

LinkParams ScenarioConfig::link_params() const {
  LinkParams l;
  l.carrier_Hz = carrier_Hz;
  l.array = ArrayGeometry::uniform_planar(array_nx, array_ny, element_spacing_wl, wavelength(carrier_Hz));
  l.N_RF = N_RF;
  l.atmospheric_loss_dB = atmospheric_loss_dB;
  l.nlos_block = nlos_block;
  l.beam_hold = beam_hold;
  return l;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw RangeError(msg);
  };
  require(carrier_Hz > 0.0, "carrier_Hz must be positive");
  require(array_nx >= 1 && array_ny >= 1, "array_nx and array_ny must be >= 1");
  require(element_spacing_wl > 0.0, "element_spacing_wl must be positive");
  require(P_t_W > 0.0, "P_t_W must be positive");
  require(altitude_m > 0.0, "altitude_m must be positive");
  require(pass_s > 0.0, "pass_s must be positive");
  require(min_elevation_deg >= -90.0 && min_elevation_deg < 90.0, "min_elevation_deg must lie in [-90, 90)");
  require(K >= 1, "K must be >= 1");
  require(N_RF >= K, "K must not exceed N_RF (K <= N_RF << N_t)");
  require(N_RF <= array_nx * array_ny, "N_RF must not exceed the element count N_t");
  require(footprint_radius_m >= 0.0, "footprint_radius_m must be >= 0");
  require(std::isfinite(ut_gain_dBi), "ut_gain_dBi must be finite");
  require(std::isfinite(K_R_dB), "K_R_dB must be finite (use los_only for a pure LOS channel)");
  require(bandwidth_Hz > 0.0, "bandwidth_Hz must be positive");
  require(noise_temperature_K > 0.0, "noise_temperature_K must be positive");
  require(noise_variance_W >= 0.0, "noise_variance_W must be >= 0");
  require(update_rate_Hz > 0.0, "update_rate_Hz must be positive");
  const double n = pass_s * update_rate_Hz;
  require(std::abs(n - std::round(n)) < 1e-9 && std::round(n) >= 1.0,
          "pass_s * update_rate_Hz must be a positive integer");
  require(!alpha || *alpha >= 0.0, "alpha must be >= 0");
  require(nlos_block >= 1, "nlos_block must be >= 1");
  require(beam_hold >= 1, "beam_hold must be >= 1");
  for (double e : eta_list) require(e > 0.0 && e <= 1.0, "every eta must lie in (0, 1]");
  require(k_init >= 1, "k_init must be >= 1");
  require(p >= 0, "p must be >= 0");
  require(i_max >= 1, "i_max must be >= 1");
  require(rank_ratio_threshold > 0.0 && rank_ratio_threshold <= 1.0,
          "rank_ratio_threshold must lie in (0, 1]");
  require(reset_interval >= 0, "reset_interval must be >= 0");
  require(mc_runs >= 1, "mc_runs must be >= 1");
}

// ---------------------------------------------------------------------------
// Key registry

namespace {

struct KeyBinding {
  std::string name;
  std::function<void(ScenarioConfig&, const json&)> set;
  std::function<json(const ScenarioConfig&)> get;
};

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) throw RangeError(key + ": expected a number");
  return v.get<double>();
}

long long as_integer(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw RangeError(key + ": expected an integer");
}

template <typename T>
KeyBinding bind_real(const char* name, T ScenarioConfig::*field) {
  return {name, [=](ScenarioConfig& c, const json& v) { c.*field = as_double(name, v); },
          [=](const ScenarioConfig& c) { return json(c.*field); }};
}

KeyBinding bind_int(const char* name, int ScenarioConfig::*field) {
  return {name,
          [=](ScenarioConfig& c, const json& v) {
            const long long x = as_integer(name, v);
            if (x < -2147483647LL || x > 2147483647LL) throw RangeError(std::string(name) + ": out of range");
            c.*field = static_cast<int>(x);
          },
          [=](const ScenarioConfig& c) { return json(c.*field); }};
}

const std::vector<KeyBinding>& registry() {
  static const std::vector<KeyBinding> keys = [] {
    std::vector<KeyBinding> k;
    k.push_back(bind_real("carrier_Hz", &ScenarioConfig::carrier_Hz));
    k.push_back(bind_int("array_nx", &ScenarioConfig::array_nx));
    k.push_back(bind_int("array_ny", &ScenarioConfig::array_ny));
    k.push_back(bind_real("element_spacing_wl", &ScenarioConfig::element_spacing_wl));
    k.push_back(bind_int("N_RF", &ScenarioConfig::N_RF));
    k.push_back(bind_real("P_t_W", &ScenarioConfig::P_t_W));
    k.push_back(bind_real("altitude_m", &ScenarioConfig::altitude_m));
    k.push_back(bind_real("pass_s", &ScenarioConfig::pass_s));
    k.push_back(bind_real("min_elevation_deg", &ScenarioConfig::min_elevation_deg));
    k.push_back(bind_real("centroid_lat_deg", &ScenarioConfig::centroid_lat_deg));
    k.push_back(bind_real("centroid_lon_deg", &ScenarioConfig::centroid_lon_deg));
    k.push_back(bind_int("K", &ScenarioConfig::K));
    k.push_back(bind_real("footprint_radius_m", &ScenarioConfig::footprint_radius_m));
    k.push_back(bind_real("ut_gain_dBi", &ScenarioConfig::ut_gain_dBi));
    k.push_back(bind_real("K_R_dB", &ScenarioConfig::K_R_dB));
    k.push_back({"los_only",
                 [](ScenarioConfig& c, const json& v) {
                   if (!v.is_boolean()) throw RangeError("los_only: expected true or false");
                   c.los_only = v.get<bool>();
                 },
                 [](const ScenarioConfig& c) { return json(c.los_only); }});
    k.push_back(bind_real("atmospheric_loss_dB", &ScenarioConfig::atmospheric_loss_dB));
    k.push_back(bind_real("bandwidth_Hz", &ScenarioConfig::bandwidth_Hz));
    k.push_back(bind_real("noise_temperature_K", &ScenarioConfig::noise_temperature_K));
    k.push_back(bind_real("noise_variance_W", &ScenarioConfig::noise_variance_W));
    k.push_back(bind_real("update_rate_Hz", &ScenarioConfig::update_rate_Hz));
    k.push_back({"alpha",
                 [](ScenarioConfig& c, const json& v) {
                   if (v.is_string() && v.get<std::string>() == "auto") {
                     c.alpha.reset();
                     return;
                   }
                   c.alpha = as_double("alpha", v);
                 },
                 [](const ScenarioConfig& c) { return c.alpha ? json(*c.alpha) : json("auto"); }});
    k.push_back(bind_int("nlos_block", &ScenarioConfig::nlos_block));
    k.push_back(bind_int("beam_hold", &ScenarioConfig::beam_hold));
    k.push_back({"eta_list",
                 [](ScenarioConfig& c, const json& v) {
                   std::vector<double> out;
                   if (v.is_number()) {
                     out.push_back(v.get<double>());
                   } else if (v.is_array()) {
                     for (const auto& e : v) out.push_back(as_double("eta_list", e));
                   } else {
                     throw RangeError("eta_list: expected a list of numbers");
                   }
                   c.eta_list = std::move(out);
                 },
                 [](const ScenarioConfig& c) { return json(c.eta_list); }});
    k.push_back(bind_int("k_init", &ScenarioConfig::k_init));
    k.push_back(bind_int("p", &ScenarioConfig::p));
    k.push_back(bind_int("i_max", &ScenarioConfig::i_max));
    k.push_back(bind_real("rank_ratio_threshold", &ScenarioConfig::rank_ratio_threshold));
    k.push_back(bind_int("reset_interval", &ScenarioConfig::reset_interval));
    k.push_back(bind_int("mc_runs", &ScenarioConfig::mc_runs));
    k.push_back({"seed",
                 [](ScenarioConfig& c, const json& v) {
                   if (v.is_number_unsigned()) c.seed = v.get<std::uint64_t>();
                   else if (v.is_number_integer() && v.get<long long>() >= 0) c.seed = static_cast<std::uint64_t>(v.get<long long>());
                   else throw RangeError("seed: expected a non-negative integer");
                 },
                 [](const ScenarioConfig& c) { return json(c.seed); }});
    return k;
  }();
  return keys;
}

void apply_key(ScenarioConfig& cfg, const std::string& key, const json& value) {
  for (const auto& b : registry()) {
    if (b.name == key) {
      b.set(cfg, value);
      return;
    }
  }
  throw UnknownKey("unknown config key '" + key + "'");
}

// ---------------------------------------------------------------------------
// TOML-subset value parser

class ValueParser {
 public:
  ValueParser(std::string_view text, int line, int col0) : s_(text), line_(line), col0_(col0) {}

  json parse_all() {
    json v = parse_value();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing characters");
    return v;
  }

  json parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, col0_ + static_cast<int>(pos_) + 1);
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  json parse_string() {
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      if (quote == '"' && s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
        const char e = s_[pos_ + 1];
        out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
        pos_ += 2;
        continue;
      }
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  json parse_array() {
    ++pos_;
    json arr = json::array();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      arr.push_back(parse_value());
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json parse_number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::string_view("+-0123456789.eE_").find(s_[pos_]) != std::string_view::npos) ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (!is_float) {
      if (tok[0] != '-') {
        std::uint64_t u = 0;
        const char* ub = tok[0] == '+' ? b + 1 : b;
        auto [p, ec] = std::from_chars(ub, e, u);
        if (ec == std::errc() && p == e) return u;
      } else {
        long long i = 0;
        auto [p, ec] = std::from_chars(b, e, i);
        if (ec == std::errc() && p == e) return i;
      }
    }
    double d = 0.0;
    const char* db = tok[0] == '+' ? b + 1 : b;
    auto [p, ec] = std::from_chars(db, e, d);
    if (ec != std::errc() || p != e) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
    return d;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_, col0_;
};

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

void parse_toml(const std::string& text, ScenarioConfig& cfg) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = strip_comment(raw);
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) continue;

    if (line[i] == '[') {
      const std::size_t close = line.find(']', i);
      if (close == std::string::npos) throw ParseError("unterminated table header", lineno, static_cast<int>(i) + 1);
      if (line.find_first_not_of(" \t", close + 1) != std::string::npos)
        throw ParseError("unexpected characters after table header", lineno, static_cast<int>(close) + 2);
      continue;
    }

    std::size_t k0 = i, k1 = i;
    std::string key;
    if (line[i] == '"') {
      k1 = line.find('"', i + 1);
      if (k1 == std::string::npos) throw ParseError("unterminated quoted key", lineno, static_cast<int>(i) + 1);
      key = line.substr(i + 1, k1 - i - 1);
      ++k1;
    } else {
      while (k1 < line.size() && is_key_char(line[k1])) ++k1;
      key = line.substr(k0, k1 - k0);
      if (key.empty()) throw ParseError("expected a key", lineno, static_cast<int>(i) + 1);
    }
    std::size_t eq = line.find_first_not_of(" \t", k1);
    if (eq == std::string::npos || line[eq] != '=')
      throw ParseError("expected '=' after key '" + key + "'", lineno, static_cast<int>(eq == std::string::npos ? line.size() : eq) + 1);
    if (!seen.insert(key).second)
      throw ParseError("duplicate key '" + key + "'", lineno, static_cast<int>(k0) + 1);

    ValueParser vp(std::string_view(line).substr(eq + 1), lineno, static_cast<int>(eq) + 1);
    const json value = vp.parse_all();
    apply_key(cfg, key, value);
  }
}

void flatten_json(const json& obj, ScenarioConfig& cfg) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it->is_object()) flatten_json(*it, cfg);
    else apply_key(cfg, it.key(), *it);
  }
}

std::pair<int, int> line_col_of(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      const auto [l, c] = line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
      throw ParseError(e.what(), l, c);
    }
    flatten_json(doc, cfg);
  } else {
    parse_toml(text, cfg);
  }
  return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ParseError("override must have the form key=value: '" + assignment + "'", 1, 1);
  std::string key = assignment.substr(0, eq);
  while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
  std::string value = assignment.substr(eq + 1);

  const std::size_t first = value.find_first_not_of(" \t");
  const bool bare_list = first != std::string::npos && value[first] != '[' && value[first] != '"' &&
                         value.find(',') != std::string::npos;
  const bool bare_word = first != std::string::npos && std::isalpha(static_cast<unsigned char>(value[first])) &&
                         value.substr(first, 4) != "true" && value.substr(first, 5) != "false";
  // ValueParser holds a view; the wrapped text must outlive it
  const std::string wrapped = bare_list ? "[" + value + "]" : bare_word ? "\"" + value.substr(first) + "\"" : value;
  ValueParser parser(wrapped, 1, static_cast<int>(eq) + 1);
  apply_key(cfg, key, parser.parse_all());
}

ScenarioConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_config_text(ss.str());
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  json j = json::object();
  for (const auto& b : registry()) j[b.name] = b.get(cfg);
  return j;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& b : registry()) out.push_back(b.name);
  return out;
}

}  // namespace leowb
