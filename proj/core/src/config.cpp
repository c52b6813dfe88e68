#include "finer/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "finer/errors.hpp"
#include "finer/sdf.hpp"

namespace finer {
namespace {

using nlohmann::json;

constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::kFitImage, "fit-image"}, {Task::kFitSdf, "fit-sdf"},       {Task::kNtk, "ntk"},
    {Task::kFreqMap, "freq-map"},   {Task::kRenderRay, "render-ray"}, {Task::kEval, "eval"},
};

json defaults_for(Task task) {
  json j = {
      {"task", std::string(to_string(task))},
      {"seed", 0},
      {"activation", {{"family", "finer"}, {"omega0", 30.0}, {"sigma", 0.05}}},
      {"init", {{"k", 1.0 / std::sqrt(2.0)}, {"bias_scope", "all-hidden"}}},
      {"network", {{"hidden_layers", 3}, {"hidden_width", 256}, {"pe_bands", 10}}},
      {"optim",
       {{"iterations", 2000},
        {"lr", 1e-4},
        {"beta1", 0.9},
        {"beta2", 0.999},
        {"eps", 1e-8},
        {"loss", "l2"},
        {"cosine_decay", false},
        {"batch_size", 16384},
        {"full_batch_limit", 256 * 256},
        {"psnr_every", 100}}},
      {"sdf",
       {{"shape", "sphere"},
        {"sampling", "mixed"},
        {"surface_sigma", 0.05},
        {"eval_resolution", 128},
        {"chamfer_points", 30000}}},
      {"ntk",
       {{"width", 64},
        {"coords", 64},
        {"ensemble", 256},
        {"k_sweep", {1.0, 5.0, 20.0}},
        {"thresholds", {1e-2, 1e-1, 1e0, 1e1}}}},
      {"freq_map", {{"width", 64}, {"points", 1024}, {"dims", 1}}},
      {"render", {{"width", 64}, {"height", 64}, {"samples", 128}, {"density_scale", 100.0}}},
      {"io", {{"input", ""}, {"checkpoint", ""}, {"out", "runs"}, {"force", false}, {"timing", false}}},
  };
  switch (task) {
    case Task::kFitSdf:
      j["init"]["k"] = 1.0;
      j["optim"]["iterations"] = 20000;
      j["optim"]["batch_size"] = 10000;
      j["optim"]["psnr_every"] = 0;
      break;
    case Task::kNtk:
      j["activation"]["omega0"] = 1.0;
      j["init"]["k"] = 1.0;
      break;
    case Task::kFreqMap:
      j["init"]["k"] = 1.0;
      break;
    default:
      break;
  }
  return j;
}

const char* type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number()) return b.is_number();
  return std::string_view(type_name(a)) == type_name(b);
}

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

void merge(json& dst, const json& src, const std::string& prefix) {
  if (!src.is_object()) throw ConfigError(prefix, "expected an object");
  for (const auto& [key, value] : src.items()) {
    const std::string path = join(prefix, key);
    if (!dst.contains(key)) throw ConfigError(path, "unknown key");
    json& slot = dst[key];
    if (slot.is_object()) {
      merge(slot, value, path);
    } else {
      if (!same_kind(slot, value))
        throw ConfigError(path, std::string("expected ") + type_name(slot) + ", got " + type_name(value));
      slot = value;
    }
  }
}

const json& at_path(const json& root, const std::string& path) {
  const json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    node = &node->at(path.substr(start, dot - start));
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

double real(const json& root, const std::string& path) {
  const json& v = at_path(root, path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

double positive(const json& root, const std::string& path) {
  const double d = real(root, path);
  if (!(d > 0.0)) throw ConfigError(path, "must be > 0");
  return d;
}

double non_negative(const json& root, const std::string& path) {
  const double d = real(root, path);
  if (d < 0.0) throw ConfigError(path, "must be >= 0");
  return d;
}

std::uint64_t count(const json& root, const std::string& path, std::uint64_t min = 0) {
  const json& v = at_path(root, path);
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  if (v.is_number_unsigned()) {
    const auto n = v.get<std::uint64_t>();
    if (n < min) throw ConfigError(path, "must be >= " + std::to_string(min));
    return n;
  }
  const auto n = v.get<std::int64_t>();
  if (n < 0 || static_cast<std::uint64_t>(n) < min) throw ConfigError(path, "must be >= " + std::to_string(min));
  return static_cast<std::uint64_t>(n);
}

std::string text(const json& root, const std::string& path) { return at_path(root, path).get<std::string>(); }

bool flag(const json& root, const std::string& path) { return at_path(root, path).get<bool>(); }

std::vector<double> reals(const json& root, const std::string& path, bool require_non_negative) {
  const json& v = at_path(root, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string item = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_number()) throw ConfigError(item, "expected a number");
    const double d = v[i].get<double>();
    if (!std::isfinite(d)) throw ConfigError(item, "must be finite");
    if (require_non_negative && d < 0.0) throw ConfigError(item, "must be >= 0");
    out.push_back(d);
  }
  if (out.empty()) throw ConfigError(path, "must not be empty");
  return out;
}

Activation activation_for(const std::string& family, double omega0, double sigma) {
  if (family == "finer") return Activation::finer(omega0);
  if (family == "sine") return Activation::sine(omega0);
  if (family == "gauss") return Activation{ActivationKind::kGaussian, omega0, sigma};
  if (family == "pemlp" || family == "relu") return Activation{ActivationKind::kRelu, omega0, sigma};
  if (family == "identity") return Activation{ActivationKind::kIdentity, omega0, sigma};
  throw ConfigError("activation.family", "unknown family '" + family + "' (finer, sine, gauss, pemlp, relu, identity)");
}

ExperimentConfig build(const json& j) {
  ExperimentConfig c;
  c.task = parse_task(text(j, "task"));
  c.seed = count(j, "seed");

  c.family = text(j, "activation.family");
  c.activation = activation_for(c.family, positive(j, "activation.omega0"), positive(j, "activation.sigma"));

  c.init.bias_halfwidth = non_negative(j, "init.k");
  c.init.seed = c.seed;
  const std::string scope = text(j, "init.bias_scope");
  if (scope == "first-layer") {
    c.init.bias_scope = BiasScope::kFirstLayer;
  } else if (scope == "all-hidden") {
    c.init.bias_scope = BiasScope::kAllHidden;
  } else {
    throw ConfigError("init.bias_scope", "expected 'first-layer' or 'all-hidden'");
  }

  auto& t = c.train;
  t.net.hidden_layers = count(j, "network.hidden_layers", 1);
  t.net.hidden_width = count(j, "network.hidden_width", 1);
  const std::size_t bands = count(j, "network.pe_bands", 1);
  if (c.family == "pemlp") t.net.encoder = PositionalEncoder{bands, true};

  t.iterations = count(j, "optim.iterations", 1);
  t.lr = positive(j, "optim.lr");
  t.beta1 = real(j, "optim.beta1");
  t.beta2 = real(j, "optim.beta2");
  if (!(t.beta1 > 0.0 && t.beta1 < 1.0)) throw ConfigError("optim.beta1", "must lie in (0, 1)");
  if (!(t.beta2 > 0.0 && t.beta2 < 1.0)) throw ConfigError("optim.beta2", "must lie in (0, 1)");
  t.eps = non_negative(j, "optim.eps");
  const std::string loss = text(j, "optim.loss");
  if (loss == "l2") {
    t.loss = Loss::kL2;
  } else if (loss == "l1") {
    t.loss = Loss::kL1;
  } else {
    throw ConfigError("optim.loss", "expected 'l2' or 'l1'");
  }
  t.cosine_decay = flag(j, "optim.cosine_decay");
  t.batch_size = count(j, "optim.batch_size", 1);
  t.full_batch_limit = count(j, "optim.full_batch_limit");
  t.psnr_every = count(j, "optim.psnr_every");

  c.sdf.shape = text(j, "sdf.shape");
  if (c.sdf.shape != "sphere" && c.sdf.shape != "torus" && c.sdf.shape != "box" && c.sdf.shape != "plane")
    throw ConfigError("sdf.shape", "expected sphere, torus, box or plane");
  const std::string sampling = text(j, "sdf.sampling");
  if (sampling == "mixed") {
    c.sdf.fit.sampling.strategy = SdfSampling::kMixed;
  } else if (sampling == "uniform") {
    c.sdf.fit.sampling.strategy = SdfSampling::kUniform;
  } else {
    throw ConfigError("sdf.sampling", "expected 'mixed' or 'uniform'");
  }
  c.sdf.fit.sampling.surface_sigma = positive(j, "sdf.surface_sigma");
  c.sdf.fit.eval_resolution = count(j, "sdf.eval_resolution", 2);
  c.sdf.chamfer_points = count(j, "sdf.chamfer_points", 1);

  c.ntk.width = count(j, "ntk.width", 1);
  c.ntk.coords = count(j, "ntk.coords", 1);
  if (c.ntk.coords > 2048) throw ConfigError("ntk.coords", "must be <= 2048");
  c.ntk.ensemble = count(j, "ntk.ensemble", 1);
  c.ntk.k_sweep = reals(j, "ntk.k_sweep", true);
  c.ntk.thresholds = reals(j, "ntk.thresholds", false);

  c.freq_map.width = count(j, "freq_map.width", 1);
  c.freq_map.points = count(j, "freq_map.points", 4);
  c.freq_map.dims = count(j, "freq_map.dims", 1);
  if (c.freq_map.dims > 2) throw ConfigError("freq_map.dims", "must be 1 or 2");

  c.render.width = count(j, "render.width", 1);
  c.render.height = count(j, "render.height", 1);
  c.render.samples = count(j, "render.samples", 1);
  c.render.density_scale = non_negative(j, "render.density_scale");

  c.io.input = text(j, "io.input");
  c.io.checkpoint = text(j, "io.checkpoint");
  c.io.out = text(j, "io.out");
  if (c.io.out.empty()) throw ConfigError("io.out", "must not be empty");
  c.io.force = flag(j, "io.force");
  c.io.timing = flag(j, "io.timing");

  c.resolved_json = j.dump(2);
  return c;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, name] : kTaskNames)
    if (t == task) return name;
  return "unknown";
}

Task parse_task(std::string_view name) {
  for (const auto& [t, n] : kTaskNames)
    if (n == name) return t;
  throw ConfigError("task", "unknown task '" + std::string(name) +
                                "' (fit-image, fit-sdf, ntk, freq-map, render-ray, eval)");
}

std::string ExperimentConfig::run_directory() const {
  return io.out + "/" + std::string(to_string(task)) + "-" + std::to_string(seed);
}

std::string default_config_json(Task task) { return defaults_for(task).dump(2); }

ExperimentConfig parse_config_text(const std::string& json_text, const ConfigOverrides& overrides) {
  json file = json::object();
  if (!json_text.empty()) {
    try {
      file = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("", "top level must be a JSON object");
  }

  std::string task_name = "fit-image";
  if (file.contains("task")) {
    if (!file["task"].is_string()) throw ConfigError("task", "expected string");
    task_name = file["task"].get<std::string>();
  }
  if (overrides.task) task_name = *overrides.task;
  const Task task = parse_task(task_name);

  json resolved = defaults_for(task);
  merge(resolved, file, "");
  resolved["task"] = task_name;

  if (overrides.seed) resolved["seed"] = *overrides.seed;
  if (overrides.out) resolved["io"]["out"] = *overrides.out;
  if (overrides.activation) resolved["activation"]["family"] = *overrides.activation;
  if (overrides.omega0) resolved["activation"]["omega0"] = *overrides.omega0;
  if (overrides.k) resolved["init"]["k"] = *overrides.k;
  if (overrides.iterations) resolved["optim"]["iterations"] = *overrides.iterations;
  if (overrides.input) resolved["io"]["input"] = *overrides.input;
  if (overrides.checkpoint) resolved["io"]["checkpoint"] = *overrides.checkpoint;
  if (overrides.force) resolved["io"]["force"] = true;

  try {
    return build(resolved);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("invalid configuration: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
  if (path.empty()) return parse_config_text("", overrides);
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

}  // namespace finer
