#include "rieszlab/cli.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "rieszlab/operator_lab.hpp"

namespace rieszlab {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::string num17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  require(!text.empty(), "config: empty number for key '" + key + "'");
  const char* begin = text.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  require(end == begin + text.size() && std::isfinite(x),
          "config: key '" + key + "' needs a finite number, got '" + text +
              "'");
  return x;
}

Index parse_index(const std::string& key, const std::string& text) {
  require(!text.empty(), "config: empty integer for key '" + key + "'");
  const char* begin = text.c_str();
  char* end = nullptr;
  long long x = std::strtoll(begin, &end, 10);
  require(end == begin + text.size(),
          "config: key '" + key + "' needs an integer, got '" + text + "'");
  return static_cast<Index>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  require(!text.empty() && text[0] != '-',
          "config: key '" + key + "' needs an unsigned integer, got '" + text +
              "'");
  const char* begin = text.c_str();
  char* end = nullptr;
  unsigned long long x = std::strtoull(begin, &end, 10);
  require(end == begin + text.size(),
          "config: key '" + key + "' needs an unsigned integer, got '" + text +
              "'");
  return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("config: key '" + key +
                              "' needs true/false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& key,
                                    const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    require(!item.empty(), "config: key '" + key + "' has an empty list item");
    parts.push_back(item);
  }
  require(!parts.empty(), "config: key '" + key + "' needs a list");
  return parts;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_list(key, text)) {
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<Index> parse_index_list(const std::string& key,
                                    const std::string& text) {
  std::vector<Index> out;
  for (const std::string& item : split_list(key, text)) {
    out.push_back(parse_index(key, item));
  }
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += num17(xs[i]);
  }
  return s;
}

std::string join_indices(const std::vector<Index>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i]);
  }
  return s;
}

// The full key catalog; scenario.params.* is the one open-ended prefix.
const std::set<std::string>& key_catalog() {
  static const std::set<std::string> keys = {
      "scenario",
      "spectrum.kind",
      "spectrum.params.c",
      "spectrum.params.d",
      "spectrum.params.gamma",
      "spectrum.params.q",
      "spectrum.values",
      "weights.kind",
      "weights.params.alpha",
      "weights.params.a",
      "weights.values",
      "perturbation.source",
      "perturbation.path",
      "criteria.epsilon",
      "criteria.horizon",
      "criteria.depth",
      "criteria.g_tilde_depth",
      "criteria.fast_route",
      "spectral.size",
      "spectral.buffer",
      "spectral.quad_nodes",
      "spectral.draws",
      "spectral.n0",
      "spectral.box_h1",
      "spectral.box_h2",
      "spectral.box_quadrature",
      "spectral.save_table",
      "sweep.quantity",
      "sweep.param",
      "sweep.param2",
      "sweep.values",
      "sweep.values2",
      "sweep.points",
      "sweep.n1",
      "seed",
      "out",
  };
  return keys;
}

bool is_scenario_param_key(const std::string& key) {
  const std::string prefix = "scenario.params.";
  return key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0;
}

std::optional<std::string> get(const RunConfig& cfg, const std::string& key) {
  auto it = cfg.kv.find(key);
  if (it == cfg.kv.end()) return std::nullopt;
  return it->second;
}

void forbid_prefix(const RunConfig& cfg, const std::string& prefix,
                   const std::string& why) {
  for (const auto& [key, value] : cfg.kv) {
    require(key.compare(0, prefix.size(), prefix) != 0,
            "config: key '" + key + "' " + why);
  }
}

Spectrum resolve_spectrum(const RunConfig& cfg) {
  std::string kind = get(cfg, "spectrum.kind").value_or("linear");
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      require(!get(cfg, k), "config: key '" + std::string(k) +
                                "' does not apply to spectrum.kind = " + kind);
    }
  };
  auto param = [&](const char* k, double dflt) {
    auto v = get(cfg, k);
    return v ? parse_double(k, *v) : dflt;
  };
  if (kind == "linear") {
    forbid({"spectrum.params.c", "spectrum.params.d", "spectrum.params.gamma",
            "spectrum.params.q", "spectrum.values"});
    return Spectrum::linear();
  }
  if (kind == "affine") {
    forbid({"spectrum.params.gamma", "spectrum.params.q", "spectrum.values"});
    return Spectrum::affine(param("spectrum.params.c", 1.0),
                            param("spectrum.params.d", 0.0));
  }
  if (kind == "power") {
    forbid({"spectrum.params.d", "spectrum.params.q", "spectrum.values"});
    return Spectrum::power(param("spectrum.params.c", 1.0),
                           param("spectrum.params.gamma", 1.0));
  }
  if (kind == "geometric") {
    forbid({"spectrum.params.d", "spectrum.params.gamma", "spectrum.values"});
    return Spectrum::geometric(param("spectrum.params.c", 1.0),
                               param("spectrum.params.q", 2.0));
  }
  if (kind == "explicit") {
    forbid({"spectrum.params.c", "spectrum.params.d", "spectrum.params.gamma",
            "spectrum.params.q"});
    auto values = get(cfg, "spectrum.values");
    require(values.has_value(),
            "config: spectrum.kind = explicit needs spectrum.values");
    return Spectrum::explicit_list(parse_double_list("spectrum.values", *values));
  }
  throw std::invalid_argument("config: unknown spectrum.kind '" + kind + "'");
}

WeightSequence resolve_weights(const RunConfig& cfg) {
  std::string kind = get(cfg, "weights.kind").value_or("zero");
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      require(!get(cfg, k), "config: key '" + std::string(k) +
                                "' does not apply to weights.kind = " + kind);
    }
  };
  auto param = [&](const char* k, double dflt) {
    auto v = get(cfg, k);
    return v ? parse_double(k, *v) : dflt;
  };
  if (kind == "zero") {
    forbid({"weights.params.alpha", "weights.params.a", "weights.values"});
    return WeightSequence::zero();
  }
  if (kind == "power") {
    forbid({"weights.params.a", "weights.values"});
    return WeightSequence::power(param("weights.params.alpha", 1.0));
  }
  if (kind == "sqrtlog-loglog") {
    forbid({"weights.params.alpha", "weights.values"});
    return WeightSequence::sqrtlog_loglog(param("weights.params.a", 1.0));
  }
  if (kind == "log-power") {
    forbid({"weights.params.alpha", "weights.values"});
    return WeightSequence::log_power(param("weights.params.a", 1.0));
  }
  if (kind == "gap-supported") {
    forbid({"weights.params.alpha"});
    std::vector<double> t;
    if (auto v = get(cfg, "weights.values")) {
      t = parse_double_list("weights.values", *v);
    }
    return WeightSequence::gap_supported(param("weights.params.a", 2.0),
                                         std::move(t));
  }
  if (kind == "counterexample") {
    forbid({"weights.params.alpha", "weights.params.a", "weights.values"});
    return WeightSequence::counterexample();
  }
  if (kind == "explicit") {
    forbid({"weights.params.alpha", "weights.params.a"});
    auto values = get(cfg, "weights.values");
    require(values.has_value(),
            "config: weights.kind = explicit needs weights.values");
    return WeightSequence::explicit_list(
        parse_double_list("weights.values", *values));
  }
  throw std::invalid_argument("config: unknown weights.kind '" + kind + "'");
}

std::string spectrum_kind_name(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::linear: return "linear";
    case SpectrumKind::affine: return "affine";
    case SpectrumKind::power: return "power";
    case SpectrumKind::geometric: return "geometric";
    case SpectrumKind::explicit_list: return "explicit";
  }
  return "linear";
}

std::string weight_kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::zero: return "zero";
    case WeightKind::power: return "power";
    case WeightKind::sqrtlog_loglog: return "sqrtlog-loglog";
    case WeightKind::log_power: return "log-power";
    case WeightKind::gap_supported: return "gap-supported";
    case WeightKind::counterexample: return "counterexample";
    case WeightKind::explicit_list: return "explicit";
  }
  return "zero";
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out.flush()) throw std::runtime_error("write failed for " + path);
}

// Inputs shared by the commands: spectrum, weights, resolved scenario
// parameters (empty on the custom route), and -- when asked for -- the
// perturbation table and truncation size.
struct SourceInputs {
  Spectrum spectrum;
  WeightSequence weights;
  std::map<std::string, double> params;  // resolved scenario parameters
  std::optional<PerturbationMatrix> table;
  Index size = 0;
};

SourceInputs build_source(const RunSettings& s, bool need_table) {
  SourceInputs in;
  if (!s.scenario.empty()) {
    ScenarioSpec spec;
    spec.name = s.scenario;
    spec.params = s.scenario_params;
    spec.size = s.spectral.size;
    spec.depth = s.criteria.depth;
    spec.horizon = s.criteria.horizon;
    spec.buffer = s.spectral.buffer;
    ScenarioBundle bundle = make_scenario(spec);
    in.spectrum = bundle.spectrum;
    in.weights = bundle.weights;
    in.params = bundle.params;
    in.size = bundle.size;
    in.table = std::move(bundle.table);
    return in;
  }
  in.spectrum = s.spectrum;
  in.weights = s.weights;
  if (s.table_source == TableSource::file) {
    PerturbationMatrix v = PerturbationMatrix::load(s.table_path, s.weights);
    in.size = s.spectral.size > 0 ? s.spectral.size : v.size();
    require(in.size <= v.size(),
            "config: spectral.size " + std::to_string(in.size) +
                " exceeds the loaded table size " + std::to_string(v.size()));
    in.table = std::move(v);
    return in;
  }
  in.size = s.spectral.size > 0
                ? s.spectral.size
                : std::min<Index>(400, in.spectrum.max_index());
  require(in.size <= in.spectrum.max_index(),
          "config: spectral.size exceeds the explicit spectrum length");
  if (need_table) {
    in.table = s.table_source == TableSource::zero
                   ? PerturbationMatrix::zero(in.size, s.weights)
                   : saturated_table(s.weights, in.size);
  }
  return in;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

std::string criteria_csvs_g(const CriteriaReport& rep) {
  std::string s = "n,value,tail_upper,method,conclusive\n";
  for (const auto& [n, tb] : rep.g_values) {
    s += std::to_string(n) + "," + num17(tb.value) + "," +
         num17(tb.tail_upper) + "," + to_string(tb.method) + "," +
         (tb.conclusive() ? "1" : "0") + "\n";
  }
  return s;
}

std::string criteria_csvs_sigma(const CriteriaReport& rep) {
  std::string s = "N,sup_value,sup_tail_upper,at_boundary\n";
  for (const auto& [n, sr] : rep.sigma) {
    s += std::to_string(n) + "," + num17(sr.bound.value) + "," +
         num17(sr.bound.tail_upper) + "," + (sr.at_boundary ? "1" : "0") +
         "\n";
  }
  return s;
}

std::string criteria_csvs_g_tilde(const CriteriaReport& rep) {
  std::string s = "k,depth,partial_sum,increment_on_doubling\n";
  for (const GTildeRow& row : rep.g_tilde) {
    s += std::to_string(row.k) + "," + std::to_string(row.depth) + "," +
         num17(row.partial_sum) + "," + num17(row.increment_on_doubling) +
         "\n";
  }
  return s;
}

std::string criteria_csvs_schur(const CriteriaReport& rep) {
  std::string s = "N,k,bound_M,bound_M_prime,tau,rho_N_upper,sigma_kN_upper\n";
  for (const SchurRow& row : rep.schur) {
    s += std::to_string(row.N) + "," + std::to_string(row.k) + "," +
         num17(row.boundM) + "," + num17(row.boundMprime) + "," +
         num17(row.tau) + "," + num17(row.rho_N_upper) + "," +
         num17(row.sigma_kN_upper) + "\n";
  }
  return s;
}

std::string criteria_csvs_schatten(const CriteriaReport& rep) {
  std::string s = "p,value,tail_upper,method,conclusive\n";
  for (const auto& [p, tb] : rep.schatten) {
    s += num17(p) + "," + num17(tb.value) + "," + num17(tb.tail_upper) + "," +
         to_string(tb.method) + "," + (tb.conclusive() ? "1" : "0") + "\n";
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  Index line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    require(eq != std::string::npos, "config: line " + std::to_string(line_no) +
                                         " is not 'key = value': " + t);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    require(!key.empty(),
            "config: line " + std::to_string(line_no) + " has an empty key");
    require(!value.empty(),
            "config: empty value for key '" + key + "'");
    require(cfg.kv.find(key) == cfg.kv.end(),
            "config: duplicate key '" + key + "'");
    cfg.kv.emplace(std::move(key), std::move(value));
  }
  return cfg;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  cfg.kv[key] = value;
}

RunSettings resolve_settings(const RunConfig& cfg) {
  for (const auto& [key, value] : cfg.kv) {
    require(key_catalog().count(key) > 0 || is_scenario_param_key(key),
            "config: unknown key '" + key + "'");
    require(!value.empty(), "config: empty value for key '" + key + "'");
  }

  RunSettings s;
  s.scenario = get(cfg, "scenario").value_or("");
  if (!s.scenario.empty()) {
    forbid_prefix(cfg, "spectrum.", "does not apply to a scenario run");
    forbid_prefix(cfg, "weights.", "does not apply to a scenario run");
    forbid_prefix(cfg, "perturbation.", "does not apply to a scenario run");
    for (const auto& [key, value] : cfg.kv) {
      if (is_scenario_param_key(key)) {
        s.scenario_params[key.substr(std::string("scenario.params.").size())] =
            parse_double(key, value);
      }
    }
  } else {
    forbid_prefix(cfg, "scenario.params.",
                  "needs a scenario (set the 'scenario' key)");
    s.spectrum = resolve_spectrum(cfg);
    s.weights = resolve_weights(cfg);
    std::string source = get(cfg, "perturbation.source").value_or("saturated");
    if (source == "saturated") {
      s.table_source = TableSource::saturated;
    } else if (source == "zero") {
      s.table_source = TableSource::zero;
    } else if (source == "file") {
      s.table_source = TableSource::file;
      auto path = get(cfg, "perturbation.path");
      require(path.has_value(),
              "config: perturbation.source = file needs perturbation.path");
      s.table_path = *path;
    } else {
      throw std::invalid_argument("config: unknown perturbation.source '" +
                                  source + "'");
    }
    require(s.table_source == TableSource::file ||
                !get(cfg, "perturbation.path"),
            "config: perturbation.path needs perturbation.source = file");
  }

  auto num = [&](const char* key, double dflt) {
    auto v = get(cfg, key);
    return v ? parse_double(key, *v) : dflt;
  };
  auto idx = [&](const char* key, Index dflt) {
    auto v = get(cfg, key);
    return v ? parse_index(key, *v) : dflt;
  };
  auto flag = [&](const char* key, bool dflt) {
    auto v = get(cfg, key);
    return v ? parse_bool(key, *v) : dflt;
  };

  s.criteria.epsilon = num("criteria.epsilon", 0.1);
  require(s.criteria.epsilon > 0.0, "config: criteria.epsilon must be > 0");
  s.criteria.horizon = idx("criteria.horizon", 1000000);
  require(s.criteria.horizon >= 8, "config: criteria.horizon must be >= 8");
  s.criteria.depth = idx("criteria.depth", 2000000);
  require(s.criteria.depth >= s.criteria.horizon,
          "config: criteria.depth must be >= criteria.horizon");
  s.criteria.g_tilde_depth = idx("criteria.g_tilde_depth", 32768);
  require(s.criteria.g_tilde_depth >= 16,
          "config: criteria.g_tilde_depth must be >= 16");
  s.fast_route = flag("criteria.fast_route", false);

  s.spectral.size = idx("spectral.size", 0);
  require(s.spectral.size >= 0, "config: spectral.size must be >= 0");
  s.spectral.buffer = idx("spectral.buffer", 0);
  require(s.spectral.buffer >= 0, "config: spectral.buffer must be >= 0");
  s.spectral.quad_nodes = idx("spectral.quad_nodes", 64);
  require(s.spectral.quad_nodes >= 32,
          "config: spectral.quad_nodes must be >= 32");
  s.spectral.riesz_draws = idx("spectral.draws", 20);
  require(s.spectral.riesz_draws >= 0, "config: spectral.draws must be >= 0");
  s.n0 = idx("spectral.n0", 0);
  require(s.n0 >= 0, "config: spectral.n0 must be >= 0");
  s.box_h1 = num("spectral.box_h1", 0.0);
  s.box_h2 = num("spectral.box_h2", 0.0);
  require(s.box_h1 >= 0.0 && s.box_h2 >= 0.0,
          "config: spectral box extents must be >= 0 (0 = auto)");
  {
    std::string mode = get(cfg, "spectral.box_quadrature").value_or("auto");
    if (mode == "auto") {
      s.box_quadrature = BoxQuad::automatic;
    } else if (mode == "true" || mode == "1") {
      s.box_quadrature = BoxQuad::on;
    } else if (mode == "false" || mode == "0") {
      s.box_quadrature = BoxQuad::off;
    } else {
      throw std::invalid_argument(
          "config: spectral.box_quadrature must be auto/true/false, got '" +
          mode + "'");
    }
  }
  s.save_table = flag("spectral.save_table", false);

  if (auto v = get(cfg, "seed")) s.spectral.seed = parse_u64("seed", *v);

  s.sweep.quantity = get(cfg, "sweep.quantity").value_or("g");
  require(s.sweep.quantity == "g" || s.sweep.quantity == "g_tilde" ||
              s.sweep.quantity == "rho",
          "config: sweep.quantity must be g, g_tilde, or rho");
  s.sweep.param = get(cfg, "sweep.param").value_or("");
  s.sweep.param2 = get(cfg, "sweep.param2").value_or("");
  if (auto v = get(cfg, "sweep.values")) {
    s.sweep.values = parse_double_list("sweep.values", *v);
  }
  if (auto v = get(cfg, "sweep.values2")) {
    s.sweep.values2 = parse_double_list("sweep.values2", *v);
  }
  if (auto v = get(cfg, "sweep.points")) {
    s.sweep.points = parse_index_list("sweep.points", *v);
    for (Index p : s.sweep.points) {
      require(p >= 1, "config: sweep.points entries must be >= 1");
    }
  } else if (s.sweep.quantity == "g_tilde") {
    for (Index k = 1; k <= 256; k *= 2) s.sweep.points.push_back(k);
  } else {
    for (Index e = 6; e <= 16; ++e) s.sweep.points.push_back(Index{1} << e);
  }
  s.sweep.n1 = idx("sweep.n1", 2);
  require(s.sweep.n1 >= 1, "config: sweep.n1 must be >= 1");

  s.out_dir = get(cfg, "out").value_or("");
  return s;
}

std::string echo_config(const RunSettings& s,
                        const std::map<std::string, double>& resolved_params) {
  std::vector<std::string> lines;
  auto put = [&](const std::string& key, const std::string& value) {
    lines.push_back(key + " = " + value);
  };

  if (!s.scenario.empty()) {
    put("scenario", s.scenario);
    for (const auto& [name, value] : resolved_params) {
      put("scenario.params." + name, num17(value));
    }
  } else {
    put("spectrum.kind", spectrum_kind_name(s.spectrum.kind));
    switch (s.spectrum.kind) {
      case SpectrumKind::linear:
        break;
      case SpectrumKind::affine:
        put("spectrum.params.c", num17(s.spectrum.c));
        put("spectrum.params.d", num17(s.spectrum.d));
        break;
      case SpectrumKind::power:
        put("spectrum.params.c", num17(s.spectrum.c));
        put("spectrum.params.gamma", num17(s.spectrum.gamma));
        break;
      case SpectrumKind::geometric:
        put("spectrum.params.c", num17(s.spectrum.c));
        put("spectrum.params.q", num17(s.spectrum.q));
        break;
      case SpectrumKind::explicit_list:
        put("spectrum.values", join_doubles(s.spectrum.values));
        break;
    }
    put("weights.kind", weight_kind_name(s.weights.kind));
    switch (s.weights.kind) {
      case WeightKind::zero:
      case WeightKind::counterexample:
        break;
      case WeightKind::power:
        put("weights.params.alpha", num17(s.weights.alpha));
        break;
      case WeightKind::sqrtlog_loglog:
      case WeightKind::log_power:
        put("weights.params.a", num17(s.weights.a));
        break;
      case WeightKind::gap_supported:
        put("weights.params.a", num17(s.weights.a));
        if (!s.weights.values.empty()) {
          put("weights.values", join_doubles(s.weights.values));
        }
        break;
      case WeightKind::explicit_list:
        if (!s.weights.values.empty()) {
          put("weights.values", join_doubles(s.weights.values));
        }
        break;
    }
    switch (s.table_source) {
      case TableSource::saturated:
        put("perturbation.source", "saturated");
        break;
      case TableSource::zero:
        put("perturbation.source", "zero");
        break;
      case TableSource::file:
        put("perturbation.source", "file");
        put("perturbation.path", s.table_path);
        break;
    }
  }

  put("criteria.epsilon", num17(s.criteria.epsilon));
  put("criteria.horizon", std::to_string(s.criteria.horizon));
  put("criteria.depth", std::to_string(s.criteria.depth));
  put("criteria.g_tilde_depth", std::to_string(s.criteria.g_tilde_depth));
  put("criteria.fast_route", s.fast_route ? "true" : "false");

  put("spectral.size", std::to_string(s.spectral.size));
  put("spectral.buffer", std::to_string(s.spectral.buffer));
  put("spectral.quad_nodes", std::to_string(s.spectral.quad_nodes));
  put("spectral.draws", std::to_string(s.spectral.riesz_draws));
  put("spectral.n0", std::to_string(s.n0));
  put("spectral.box_h1", num17(s.box_h1));
  put("spectral.box_h2", num17(s.box_h2));
  put("spectral.box_quadrature",
      s.box_quadrature == BoxQuad::automatic
          ? "auto"
          : (s.box_quadrature == BoxQuad::on ? "true" : "false"));
  put("spectral.save_table", s.save_table ? "true" : "false");

  if (!s.sweep.param.empty()) {
    put("sweep.quantity", s.sweep.quantity);
    put("sweep.param", s.sweep.param);
    put("sweep.values", join_doubles(s.sweep.values));
    if (!s.sweep.param2.empty()) {
      put("sweep.param2", s.sweep.param2);
      put("sweep.values2", join_doubles(s.sweep.values2));
    }
    put("sweep.points", join_indices(s.sweep.points));
    put("sweep.n1", std::to_string(s.sweep.n1));
  }

  put("seed", std::to_string(s.spectral.seed));

  std::sort(lines.begin(), lines.end());
  std::string text;
  for (const std::string& line : lines) text += line + "\n";
  return text;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

int run_check(const RunSettings& s, std::ostream& log) {
  SourceInputs in = build_source(s, /*need_table=*/false);
  CriteriaReport rep = build_criteria_report(in.spectrum, in.weights,
                                             s.criteria);

  // Required verdicts: summability, Schatten membership, and G decay; the
  // fast route adds G-tilde boundedness when requested.
  std::vector<std::pair<std::string, Verdict>> required = {
      {"summable", rep.verdicts.summable},
      {"schatten_ok", rep.verdicts.schatten_ok},
      {"g_decays", rep.verdicts.g_decays},
  };
  if (s.fast_route) {
    required.emplace_back("g_tilde_bounded", rep.verdicts.g_tilde_bounded);
  }

  auto witness_suffix = [&](const std::string& name, Verdict v) -> std::string {
    if (name == "g_decays") {
      if (v == Verdict::holds) {
        if (rep.g_decays_route == "window") {
          return " (route window, certified_N = " +
                 std::to_string(rep.certified_N) + ")";
        }
        return " (route " + rep.g_decays_route + ")";
      }
      if (v == Verdict::fails) {
        return " (witness n = " + std::to_string(rep.g_decays_witness) + ")";
      }
    }
    if (name == "g_tilde_bounded" && v == Verdict::fails) {
      return " (" + rep.g_tilde_witness + ")";
    }
    return "";
  };

  std::string text;
  auto line = [&](const std::string& name, Verdict v) {
    text += name + ": " + to_string(v) + witness_suffix(name, v) + "\n";
  };
  line("summable", rep.verdicts.summable);
  line("schatten_ok", rep.verdicts.schatten_ok);
  line("g_decays", rep.verdicts.g_decays);
  line("g_tilde_bounded", rep.verdicts.g_tilde_bounded);
  line("fast_route_available", rep.verdicts.fast_route_available);
  text += "rho = " + num17(rep.rho_1.value) + " (tail " +
          num17(rep.rho_1.tail_upper) + ", " + to_string(rep.rho_1.method) +
          ")\n";
  text += "epsilon = " + num17(rep.epsilon) + "\n";
  text += "half_bound_N = " + std::to_string(rep.half_bound_N) + "\n";

  std::string required_names;
  for (const auto& [name, v] : required) {
    if (!required_names.empty()) required_names += " ";
    required_names += name;
  }
  text += "required: " + required_names + "\n";

  int exit_code = 0;
  std::string outcome = "all required criteria hold";
  for (const auto& [name, v] : required) {
    if (v == Verdict::fails) {
      exit_code = 1;
      outcome = "required criterion " + name + " fails" +
                witness_suffix(name, v);
      break;
    }
  }
  if (exit_code == 0) {
    for (const auto& [name, v] : required) {
      if (v == Verdict::inconclusive) {
        exit_code = 2;
        outcome = "inconclusive: " + name + " undecided";
        break;
      }
    }
  }
  text += "outcome: " + outcome + "\n";

  log << text;
  if (!s.out_dir.empty()) {
    write_file(s.out_dir, "config.txt", echo_config(s, in.params));
    write_file(s.out_dir, "verdicts.txt", text);
    write_file(s.out_dir, "g_table.csv", criteria_csvs_g(rep));
    write_file(s.out_dir, "sigma_table.csv", criteria_csvs_sigma(rep));
    write_file(s.out_dir, "g_tilde.csv", criteria_csvs_g_tilde(rep));
    write_file(s.out_dir, "schur.csv", criteria_csvs_schur(rep));
    write_file(s.out_dir, "schatten.csv", criteria_csvs_schatten(rep));
    log << "wrote " << s.out_dir << "\n";
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

int run_spectral(const RunSettings& s, std::ostream& log) {
  SourceInputs in = build_source(s, /*need_table=*/true);
  const PerturbationMatrix& V = *in.table;
  const Index size = in.size;
  require(size >= 8, "spectral: truncation size must be >= 8");

  // Certification scan: a disc counts as certified when the G enclosure at
  // its index sits below epsilon.
  GScan scan = g_scan(in.spectrum, in.weights, size,
                      std::max<Index>(2 * size, 4096));

  // Gershgorin row reach of the truncated operator (rows of the transpose of
  // the form table): used to size the low-energy box so that strongly
  // coupled low modes stay inside it.
  Eigen::MatrixXd abs_table =
      V.values().topLeftCorner(size, size).cwiseAbs();
  std::vector<double> reach(static_cast<std::size_t>(size));
  for (Index n = 1; n <= size; ++n) {
    double row_sum = abs_table.col(n - 1).sum() - abs_table(n - 1, n - 1);
    reach[static_cast<std::size_t>(n - 1)] = row_sum;
  }

  SpectralOptions opts = s.spectral;
  opts.size = size;

  Index n0 = s.n0;
  const Index n0_cap = std::max<Index>(4, size / 2);
  if (n0 == 0) {
    // First cut with every later disc's G enclosure below epsilon.  When no
    // cut certifies the window, a bigger box would not certify anything
    // either, so keep it minimal.
    Index n_certified = 4;
    {
      std::vector<double> tail_sup(static_cast<std::size_t>(size) + 1, 0.0);
      for (Index n = size; n >= 1; --n) {
        tail_sup[static_cast<std::size_t>(n - 1)] =
            std::max(tail_sup[static_cast<std::size_t>(n)],
                     scan.upper[static_cast<std::size_t>(n - 1)]);
      }
      for (Index n = 4; n <= n0_cap; ++n) {
        if (tail_sup[static_cast<std::size_t>(n)] <= s.criteria.epsilon) {
          n_certified = n;
          break;
        }
      }
    }
    // Smallest cut whose box right edge dominates the Gershgorin reach of
    // everything at or below it.
    Index n_stray = n0_cap;
    double hi = 0.0;
    for (Index k = 1; k <= n0_cap; ++k) {
      hi = std::max(hi, mu(in.spectrum, k) +
                            reach[static_cast<std::size_t>(k - 1)]);
      if (k >= 4 && mu(in.spectrum, k) + gaps(in.spectrum, k).r >= hi) {
        n_stray = k;
        break;
      }
    }
    n0 = std::min(n0_cap, std::max({Index{4}, n_certified, n_stray}));
  }
  opts.N0 = n0;

  double low_reach = 0.0;
  double im_reach = 0.0;
  for (Index n = 1; n <= size; ++n) {
    low_reach = std::min(low_reach, mu(in.spectrum, n) -
                                        reach[static_cast<std::size_t>(n - 1)]);
    if (n <= n0) {
      im_reach = std::max(im_reach, reach[static_cast<std::size_t>(n - 1)]);
    }
  }
  opts.box_h1 = s.box_h1 > 0.0 ? s.box_h1 : std::max(1.0, 1.0 - low_reach);
  opts.box_h2 = s.box_h2 > 0.0 ? s.box_h2 : std::max(1.0, 1.0 + im_reach);

  // Rectangle quadrature resolves the box only while the trapezoid node
  // spacing stays well under the spectrum clearance (about half a gap);
  // beyond that the residual is quadrature noise, so auto mode skips it.
  const double box_width = opts.box_h1 + mu(in.spectrum, n0) +
                           gaps(in.spectrum, n0).r;
  const double box_spacing =
      std::max(box_width, 2.0 * opts.box_h2) /
      static_cast<double>(opts.quad_nodes);
  opts.box_quadrature =
      s.box_quadrature == BoxQuad::on ||
      (s.box_quadrature == BoxQuad::automatic && box_spacing <= 0.25);

  SpectralReport rep;
  try {
    rep = build_spectral_report(in.spectrum, V, opts);
  } catch (const std::runtime_error& e) {
    log << "spectral pipeline failure: " << e.what() << "\n";
    return 70;
  }

  // Invariant checks: localization is clean, ranks balance, every certified
  // in-window disc holds exactly one eigenvalue, and the projection
  // residuals stay at quadrature accuracy.
  std::vector<std::string> failures;
  if (rep.localization.outside != 0) {
    failures.push_back("outside=" + std::to_string(rep.localization.outside));
  }
  if (rep.rank_gap != 0) {
    failures.push_back("rank_gap=" + std::to_string(rep.rank_gap));
  }

  Index usable_discs = 0;
  Index certified_discs = 0;
  Index one_per_violations = 0;
  // Edge exclusion drops eigenvalues with Re(lambda) right of the cut
  // mu(size - buffer), which can swallow the content of the disc sitting
  // exactly at that cut; demand one-per-disc only strictly inside it.
  const Index window_end = rep.size - rep.buffer - 1;
  for (std::size_t r = 0; r < rep.regions.size(); ++r) {
    const Region& region = rep.regions[r];
    if (region.kind != Region::Kind::disc || region.index > window_end) {
      continue;
    }
    ++usable_discs;
    bool certified =
        scan.upper[static_cast<std::size_t>(region.index - 1)] <=
        s.criteria.epsilon;
    if (!certified) continue;
    ++certified_discs;
    if (rep.localization.counts[r] != 1) ++one_per_violations;
  }
  if (one_per_violations > 0) {
    failures.push_back("one_per_certified_violations=" +
                       std::to_string(one_per_violations));
  }

  double projection_idem_max = 0.0;
  double projection_norm_max = 0.0;
  for (const ProjectionRow& row : rep.projections) {
    projection_idem_max = std::max(projection_idem_max, row.idem_residual);
    projection_norm_max = std::max(projection_norm_max, row.norm);
  }
  if (projection_idem_max > 1e-9) {
    failures.push_back("projection_idem=" + num17(projection_idem_max));
  }
  if (rep.disjointness > 1e-9) {
    failures.push_back("disjointness=" + num17(rep.disjointness));
  }
  for (const ContourSample& cs : rep.contour_checks) {
    if (cs.eig_agreement > 1e-8) {
      failures.push_back("contour_agreement=" + num17(cs.eig_agreement));
    }
    if (cs.idem_residual > 1e-8) {
      failures.push_back("contour_idem=" + num17(cs.idem_residual));
    }
  }
  if (rep.box_sampled) {
    if (rep.box_idem > 1e-2) {
      failures.push_back("box_idem=" + num17(rep.box_idem));
    }
    Index box_count =
        rep.localization.counts.empty() ? 0 : rep.localization.counts[0];
    if (rep.box_rank != box_count) {
      failures.push_back("box_rank=" + std::to_string(rep.box_rank) +
                         "_vs_count=" + std::to_string(box_count));
    }
  }
  double riesz_max = 0.0;
  for (double total : rep.riesz_sums) {
    if (!std::isfinite(total)) failures.push_back("riesz_sum_not_finite");
    riesz_max = std::max(riesz_max, total);
  }
  if (!std::isfinite(rep.condition_number)) {
    failures.push_back("condition_number_not_finite");
  }

  std::string checks = "pass";
  if (!failures.empty()) {
    checks = "fail:";
    for (const std::string& f : failures) checks += " " + f;
  }

  std::string text;
  text += "size = " + std::to_string(rep.size) + "\n";
  text += "buffer = " + std::to_string(rep.buffer) + "\n";
  text += "n0 = " + std::to_string(rep.N0) + "\n";
  text += "box_h1 = " + num17(opts.box_h1) + "\n";
  text += "box_h2 = " + num17(opts.box_h2) + "\n";
  text += "box_node_spacing = " + num17(box_spacing) + "\n";
  text += "epsilon = " + num17(s.criteria.epsilon) + "\n";
  text += "outside = " + std::to_string(rep.localization.outside) + "\n";
  text += "excluded = " + std::to_string(rep.localization.excluded) + "\n";
  text += "rank_gap = " + std::to_string(rep.rank_gap) + "\n";
  text += "box_sampled = " + std::string(rep.box_sampled ? "true" : "false") +
          "\n";
  text += "box_rank = " + std::to_string(rep.box_rank) + "\n";
  text += "box_idem = " + num17(rep.box_idem) + "\n";
  text += "disjointness = " + num17(rep.disjointness) + "\n";
  text += "condition_number = " + num17(rep.condition_number) + "\n";
  text += "usable_discs = " + std::to_string(usable_discs) + "\n";
  text += "certified_discs = " + std::to_string(certified_discs) + "\n";
  text += "projection_rows = " + std::to_string(rep.projections.size()) + "\n";
  text += "projection_idem_max = " + num17(projection_idem_max) + "\n";
  text += "projection_norm_max = " + num17(projection_norm_max) + "\n";
  for (const ContourSample& cs : rep.contour_checks) {
    text += "contour_n = " + std::to_string(cs.n) + "\n";
    text += "contour_eig_agreement = " + num17(cs.eig_agreement) + "\n";
    text += "contour_node_stability = " + num17(cs.node_stability) + "\n";
    text += "contour_idem = " + num17(cs.idem_residual) + "\n";
    text += "contour_rank = " + std::to_string(cs.rank) + "\n";
  }
  text += "riesz_draws = " + std::to_string(rep.riesz_sums.size()) + "\n";
  text += "riesz_sum_max = " + num17(riesz_max) + "\n";
  text += "checks = " + checks + "\n";

  log << text;

  if (!s.out_dir.empty()) {
    write_file(s.out_dir, "config.txt", echo_config(s, in.params));
    write_file(s.out_dir, "summary.txt", text);
    std::ostringstream eig, proj, sums;
    write_eigenvalues_csv(rep, eig);
    write_projections_csv(rep, proj);
    write_riesz_sums_csv(rep, sums);
    write_file(s.out_dir, "eigenvalues.csv", eig.str());
    write_file(s.out_dir, "projections.csv", proj.str());
    write_file(s.out_dir, "riesz_sums.csv", sums.str());

    std::string loc = "kind,index,count,certified\n";
    for (std::size_t r = 0; r < rep.regions.size(); ++r) {
      const Region& region = rep.regions[r];
      if (region.kind == Region::Kind::box) {
        loc += "box,0," + std::to_string(rep.localization.counts[r]) + ",\n";
      } else {
        bool certified =
            scan.upper[static_cast<std::size_t>(region.index - 1)] <=
            s.criteria.epsilon;
        loc += "disc," + std::to_string(region.index) + "," +
               std::to_string(rep.localization.counts[r]) + "," +
               (certified ? "1" : "0") + "\n";
      }
    }
    write_file(s.out_dir, "localization.csv", loc);

    std::string contour = "n,eig_agreement,node_stability,idem_residual,rank\n";
    for (const ContourSample& cs : rep.contour_checks) {
      contour += std::to_string(cs.n) + "," + num17(cs.eig_agreement) + "," +
                 num17(cs.node_stability) + "," + num17(cs.idem_residual) +
                 "," + std::to_string(cs.rank) + "\n";
    }
    write_file(s.out_dir, "contour.csv", contour);

    if (s.save_table) {
      std::filesystem::create_directories(s.out_dir);
      V.save(s.out_dir + "/perturbation.mat");
    }
    log << "wrote " << s.out_dir << "\n";
  }
  return failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const RunSettings& s, std::ostream& log) {
  require(!s.scenario.empty(), "sweep: set the 'scenario' key to sweep over");
  require(!s.sweep.param.empty(), "sweep: sweep.param is required");
  require(!s.sweep.values.empty(), "sweep: empty grid (no sweep.values)");
  require(s.sweep.param2.empty() == s.sweep.values2.empty(),
          "sweep: sweep.param2 and sweep.values2 go together");
  require(!s.sweep.points.empty(), "sweep: sweep.points must not be empty");

  const std::size_t cells =
      s.sweep.values.size() * std::max<std::size_t>(1, s.sweep.values2.size());
  require(cells <= 10000, "sweep: grid has " + std::to_string(cells) +
                              " cells, the limit is 10000");

  Index max_point = 0;
  for (Index p : s.sweep.points) max_point = std::max(max_point, p);
  const Index depth = std::max(s.criteria.depth, 2 * max_point);

  std::map<std::string, double> echo_params;
  std::string csv = "param,n_or_k,value,tail\n";
  auto run_cell = [&](double v1, const double* v2) {
    ScenarioSpec spec;
    spec.name = s.scenario;
    spec.params = s.scenario_params;
    spec.params[s.sweep.param] = v1;
    std::string label = s.sweep.param + "=" + num17(v1);
    if (v2) {
      spec.params[s.sweep.param2] = *v2;
      label += ";" + s.sweep.param2 + "=" + num17(*v2);
    }
    spec.size = s.spectral.size;
    spec.depth = s.criteria.depth;
    spec.horizon = s.criteria.horizon;
    spec.buffer = s.spectral.buffer;
    ScenarioBundle bundle = make_scenario(spec);
    if (echo_params.empty()) echo_params = bundle.params;
    for (Index point : s.sweep.points) {
      TailBound tb;
      if (s.sweep.quantity == "g") {
        tb = g_transform(bundle.spectrum, bundle.weights, point, depth);
      } else if (s.sweep.quantity == "g_tilde") {
        tb = g_tilde_transform(bundle.spectrum, bundle.weights, point,
                               s.sweep.n1, s.criteria.g_tilde_depth);
      } else {
        tb = rho_sum(bundle.spectrum, bundle.weights, point, depth);
      }
      csv += label + "," + std::to_string(point) + "," + num17(tb.value) +
             "," + num17(tb.tail_upper) + "\n";
    }
  };

  for (double v1 : s.sweep.values) {
    if (s.sweep.values2.empty()) {
      run_cell(v1, nullptr);
    } else {
      for (double v2 : s.sweep.values2) run_cell(v1, &v2);
    }
  }

  log << "sweep: " << cells << " cells x " << s.sweep.points.size()
      << " points (" << s.sweep.quantity << ")\n";
  if (!s.out_dir.empty()) {
    write_file(s.out_dir, "config.txt", echo_config(s, echo_params));
    write_file(s.out_dir, "sweep.csv", csv);
    log << "wrote " << s.out_dir << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// scenario-list and the dispatcher.
// ---------------------------------------------------------------------------

int run_scenario_list(std::ostream& log) {
  const std::map<std::string, std::map<std::string, double>> defaults = {
      {"counterexample", {{"m_max", 30.0}}},
      {"finite-band", {{"a", 1.0}, {"diag", 0.0}, {"off", 0.5}}},
      {"gap-supported", {{"a", 2.0}, {"constant", 0.0}}},
      {"lnln-decay", {{"a", 1.0}}},
      {"log-power-fast", {{"a", 2.0}}},
      {"power-alpha", {{"alpha", 1.0}}},
  };
  for (const std::string& name : scenario_names()) {
    log << name;
    auto it = defaults.find(name);
    if (it != defaults.end()) {
      for (const auto& [param, value] : it->second) {
        log << " " << param << "=" << num17(value);
      }
    }
    log << "\n";
  }
  return 0;
}

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  const std::string usage =
      "usage: rieszlab <check|spectral|sweep|scenario-list> [--config PATH] "
      "[--out DIR] [--seed U64] [--scenario NAME] [--param K=V] "
      "[--quad-nodes N] [--size N] [--epsilon X]";
  try {
    require(argc >= 2, usage);
    const std::string command = argv[1];
    require(command == "check" || command == "spectral" || command == "sweep" ||
                command == "scenario-list",
            "unknown command '" + command + "'\n" + usage);
    if (command == "scenario-list") {
      require(argc == 2, "scenario-list takes no flags");
      return run_scenario_list(out);
    }

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 2; i < argc; ++i) {
      const std::string flag = argv[i];
      require(flag.size() > 2 && flag.compare(0, 2, "--") == 0,
              "unexpected argument '" + flag + "'\n" + usage);
      require(i + 1 < argc, "flag " + flag + " needs a value");
      const std::string value = argv[++i];
      if (flag == "--config") {
        config_path = value;
      } else if (flag == "--out") {
        overrides.emplace_back("out", value);
      } else if (flag == "--seed") {
        overrides.emplace_back("seed", value);
      } else if (flag == "--scenario") {
        overrides.emplace_back("scenario", value);
      } else if (flag == "--quad-nodes") {
        overrides.emplace_back("spectral.quad_nodes", value);
      } else if (flag == "--size") {
        overrides.emplace_back("spectral.size", value);
      } else if (flag == "--epsilon") {
        overrides.emplace_back("criteria.epsilon", value);
      } else if (flag == "--param") {
        std::size_t eq = value.find('=');
        require(eq != std::string::npos && eq > 0 && eq + 1 < value.size(),
                "malformed --param '" + value + "' (expected K=V)");
        overrides.emplace_back("scenario.params." + value.substr(0, eq),
                               value.substr(eq + 1));
      } else {
        throw std::invalid_argument("unknown flag '" + flag + "'\n" + usage);
      }
    }

    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      require(f.good(), "cannot read config file: " + config_path);
      std::ostringstream buf;
      buf << f.rdbuf();
      cfg = parse_config_text(buf.str());
    }
    for (const auto& [key, value] : overrides) set_key(cfg, key, value);

    RunSettings settings = resolve_settings(cfg);
    if (command == "check") return run_check(settings, out);
    if (command == "spectral") return run_spectral(settings, out);
    return run_sweep(settings, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 64;
  }
}

}  // namespace rieszlab
