#include "convisc/config.hpp"

#include "convisc/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace convisc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                      std::string(text) + "'");
  }
  return v;
}

template <class Int>
Int to_int(std::string_view key, std::string_view text) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const auto item = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    if (item.empty()) throw ConfigError("key '" + std::string(key) + "': empty list entry");
    out.push_back(to_double(key, item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string list_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

struct Key {
  const char* name;
  const char* doc;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define CONVISC_DOUBLE(field, doc)                                                       \
  Key {                                                                                  \
    #field, doc, [](ExperimentConfig& c, std::string_view v) { c.field = to_double(#field, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.field); }                           \
  }
#define CONVISC_INT(field, doc)                                                               \
  Key {                                                                                       \
    #field, doc, [](ExperimentConfig& c, std::string_view v) { c.field = to_int<int>(#field, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                     \
  }
#define CONVISC_LIST(field, doc)                                                        \
  Key {                                                                                 \
    #field, doc, [](ExperimentConfig& c, std::string_view v) { c.field = to_list(#field, v); }, \
        [](const ExperimentConfig& c) { return list_string(c.field); }                  \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"profile", "flat | bump | two-layer-smooth | file",
       [](ExperimentConfig& c, std::string_view v) { c.profile.name = std::string(v); },
       [](const ExperimentConfig& c) { return c.profile.name; }},
      {"profile_file", "two-column (z sigma) text table, used when profile = file",
       [](ExperimentConfig& c, std::string_view v) { c.profile.file = std::string(v); },
       [](const ExperimentConfig& c) { return c.profile.file; }},
      {"bump_amplitude", "bump height above 1",
       [](ExperimentConfig& c, std::string_view v) { c.profile.bump_amplitude = to_double("bump_amplitude", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.bump_amplitude); }},
      {"bump_center", "bump center as a fraction of z_max",
       [](ExperimentConfig& c, std::string_view v) { c.profile.bump_center = to_double("bump_center", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.bump_center); }},
      {"bump_width", "Gaussian width as a fraction of z_max",
       [](ExperimentConfig& c, std::string_view v) { c.profile.bump_width = to_double("bump_width", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.bump_width); }},
      {"layer_depth", "interface depth as a fraction of z_max",
       [](ExperimentConfig& c, std::string_view v) { c.profile.layer_depth = to_double("layer_depth", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.layer_depth); }},
      {"layer_contrast", "sigma jump across the interface",
       [](ExperimentConfig& c, std::string_view v) { c.profile.layer_contrast = to_double("layer_contrast", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.layer_contrast); }},
      {"layer_smoothness", "tanh transition width as a fraction of z_max",
       [](ExperimentConfig& c, std::string_view v) { c.profile.layer_smoothness = to_double("layer_smoothness", v); },
       [](const ExperimentConfig& c) { return fmt(c.profile.layer_smoothness); }},
      CONVISC_DOUBLE(z_max, "depth of the layer Z"),
      CONVISC_INT(n_nodes, "spatial nodes (>= 5)"),
      CONVISC_INT(n_k, "frequency samples (>= 3)"),
      CONVISC_DOUBLE(k_min, "smallest frequency (> 0)"),
      CONVISC_DOUBLE(k_max, "largest frequency (> k_min)"),
      CONVISC_LIST(epsilon, "viscosity; a list only for sweep"),
      CONVISC_LIST(lambda, "Carleman parameter (>= 1); a list only for sweep"),
      CONVISC_LIST(delta, "noise level in [0, 1); a list only for sweep"),
      CONVISC_DOUBLE(R, "correctness-ball radius"),
      CONVISC_DOUBLE(gamma, "descent step in (0, 1); 0 probes a step per frequency"),
      CONVISC_INT(max_iters, "descent iteration cap"),
      CONVISC_DOUBLE(grad_tol, "stop when the H2 gradient norm falls below this"),
      {"seed", "seed for noise and Monte-Carlo sampling",
       [](ExperimentConfig& c, std::string_view v) { c.seed = to_int<std::uint64_t>("seed", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      {"boundary_mode", "forward-consistent | paper-literal",
       [](ExperimentConfig& c, std::string_view v) {
         try {
           c.boundary_mode = parse_boundary_mode(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(std::string("key 'boundary_mode': ") + e.what());
         }
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.boundary_mode)); }},
      {"output_dir", "directory for result files",
       [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(v); },
       [](const ExperimentConfig& c) { return c.output_dir; }},
      CONVISC_INT(threads, "worker threads (0 = hardware concurrency)"),
      CONVISC_INT(snapshot_stride, "iterations between stored iterates (0 = adaptive, 256 to 512 per run)"),
      CONVISC_INT(verify_samples, "random pairs/fields per lambda in verify"),
      CONVISC_INT(verify_modes, "cosine modes per random field in verify and sweep"),
      CONVISC_LIST(verify_lambdas, "lambda values for the convexity study"),
      CONVISC_LIST(carleman_lambdas, "lambda values for the Carleman-estimate study"),
      CONVISC_INT(gradient_points, "random points in the gradient check"),
      CONVISC_INT(gradient_directions, "random directions per point"),
      CONVISC_DOUBLE(gradient_step, "central-difference step t"),
      CONVISC_DOUBLE(verify_k, "frequency used by verify (0 = middle of the k-grid)"),
  };
  return table;
}

#undef CONVISC_DOUBLE
#undef CONVISC_INT
#undef CONVISC_LIST

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& p = profile;
  check(p.name == "flat" || p.name == "bump" || p.name == "two-layer-smooth" || p.name == "file",
        "profile must be flat, bump, two-layer-smooth or file, got '" + p.name + "'");
  check(p.name != "file" || !p.file.empty(), "profile = file needs profile_file");
  check(p.bump_amplitude >= 0.0, "bump_amplitude must be >= 0");
  check(p.bump_width > 0.0, "bump_width must be > 0");
  check(p.layer_contrast >= 0.0, "layer_contrast must be >= 0");
  check(p.layer_smoothness > 0.0, "layer_smoothness must be > 0");
  check(z_max > 0.0, "z_max must be > 0");
  check(n_nodes >= 5, "n_nodes must be >= 5");
  check(n_k >= 3, "n_k must be >= 3");
  check(k_min > 0.0 && k_min < k_max, "need 0 < k_min < k_max");
  check(!epsilon.empty() && !lambda.empty() && !delta.empty(), "epsilon, lambda and delta need a value");
  for (double e : epsilon) check(e > 0.0, "epsilon must be > 0");
  for (double l : lambda) check(l >= 1.0, "lambda must be >= 1");
  for (double d : delta) check(d >= 0.0 && d < 1.0, "delta must lie in [0, 1)");
  check(R > 0.0, "R must be > 0");
  check(gamma == 0.0 || (gamma > 0.0 && gamma < 1.0), "gamma must be 0 (probe) or lie in (0, 1)");
  check(max_iters >= 1, "max_iters must be >= 1");
  check(grad_tol > 0.0, "grad_tol must be > 0");
  check(threads >= 0, "threads must be >= 0");
  check(snapshot_stride >= 0, "snapshot_stride must be >= 0");
  check(verify_samples >= 1, "verify_samples must be >= 1");
  check(verify_modes >= 1, "verify_modes must be >= 1");
  for (double l : verify_lambdas) check(l >= 1.0, "verify_lambdas entries must be >= 1");
  for (double l : carleman_lambdas) check(l >= 1.0, "carleman_lambdas entries must be >= 1");
  check(gradient_points >= 1 && gradient_directions >= 1, "gradient_points and gradient_directions must be >= 1");
  check(gradient_step > 0.0, "gradient_step must be > 0");
  check(verify_k == 0.0 || (verify_k >= k_min && verify_k <= k_max),
        "verify_k must be 0 or lie in [k_min, k_max]");
}

void ExperimentConfig::require_single_values(std::string_view verb) const {
  auto one = [&](const std::vector<double>& v, const char* name) {
    check(v.size() == 1, std::string(verb) + " takes a single " + name + " value (got " +
                             std::to_string(v.size()) + "); use sweep for lists");
  };
  one(epsilon, "epsilon");
  one(lambda, "lambda");
  one(delta, "delta");
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'key = value', got '" + std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const Key* match = nullptr;
    for (const auto& k : keys()) {
      if (key == k.name) match = &k;
    }
    if (match == nullptr) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "key '" + std::string(key) + "' given twice");
    }
    if (value.empty()) throw ConfigError(where + "key '" + std::string(key) + "' has no value");
    try {
      match->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string config_reference() {
  const ExperimentConfig defaults;
  std::string out;
  for (const auto& k : keys()) {
    out += "# ";
    out += k.doc;
    out += "\n";
    out += k.name;
    out += " = " + k.get(defaults) + "\n";
  }
  return out;
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) {
    const std::string v = k.get(cfg);
    if (v.empty()) continue;
    out += k.name;
    out += " = " + v + "\n";
  }
  return out;
}

}  // namespace convisc
