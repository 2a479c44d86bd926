#include "condiv/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace condiv {
namespace config {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"seed", "42"},
      {"epochs", "30"},
      {"batch_size", "128"},
      {"drop_last", "true"},
      {"tau", "0.1"},
      {"kappa", "100"},
      {"kernel.kind", "gaussian"},
      {"kernel.sigma", "0.9"},
      {"kernel.alpha", "1.0"},
      {"divergence_temperature", ""},
      {"use_contrastive_loss", "true"},
      {"use_divergence_loss", "true"},
      {"optim.lr", "0.005"},
      {"optim.beta1", "0.5"},
      {"optim.beta2", "0.999"},
      {"optim.weight_decay", "0.0001"},
      {"optim.eps", "1e-08"},
      {"lr.milestones", ""},
      {"lr.gamma", "0.1"},
      {"checkpoint_every", "0"},
      {"model.encoder_widths", "256,256"},
      {"model.projection_hidden", "256"},
      {"model.embed_dim", "32"},
      {"model.subnet_widths", "128,64"},
      {"model.subnet_batch_norm", "false"},
      {"augment.preset", "small"},
      {"augment.crop.enabled", ""},
      {"augment.crop.area_lo", ""},
      {"augment.crop.area_hi", ""},
      {"augment.crop.aspect_lo", ""},
      {"augment.crop.aspect_hi", ""},
      {"augment.hflip.enabled", ""},
      {"augment.hflip.prob", ""},
      {"augment.jitter.enabled", ""},
      {"augment.jitter.prob", ""},
      {"augment.jitter.brightness", ""},
      {"augment.jitter.contrast", ""},
      {"augment.jitter.saturation", ""},
      {"augment.jitter.hue", ""},
      {"augment.grayscale.enabled", ""},
      {"augment.grayscale.prob", ""},
      {"augment.blur.enabled", ""},
      {"augment.blur.prob", ""},
      {"augment.blur.sigma_lo", ""},
      {"augment.blur.sigma_hi", ""},
      {"probe.lr", "0.01"},
      {"probe.epochs", "100"},
      {"probe.batch_size", "128"},
      {"probe.train_fraction", "0.8"},
      {"gen.kind", "clusters"},
      {"gen.k", "2"},
      {"gen.n_per", "200"},
      {"gen.dim", "2"},
      {"gen.means", ""},
      {"gen.stddev", "0.3"},
      {"gen.n", "300"},
      {"sweep.kappas", "5,20,100"},
      {"ablate.stages", "crop,hflip,jitter,grayscale,blur"},
      {"grid.x_lo", "0"},
      {"grid.x_hi", "1"},
      {"grid.y_lo", "0"},
      {"grid.y_hi", "1"},
      {"grid.resolution", "41"},
      {"grid.anchor", ""},
      {"grid.anchor_index", "0"},
      {"grid.slice_axes", ""},
      {"grid.slice_base", ""},
      {"embed.which", "encoder"},
      {"gradcheck.loss", "all"},
      {"gradcheck.batch", "4"},
      {"gradcheck.embed_dim", "8"},
      {"gradcheck.kappa", "5"},
      {"gradcheck.step", "1e-05"},
      {"gradcheck.tol", "0.0001"},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty() || !parts.empty()) parts.push_back(trim(current));
  return parts;
}

}  // namespace

ConfigMap ConfigMap::defaults() {
  ConfigMap map;
  map.values_ = default_values();
  return map;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorKind::Usage, "unknown configuration key: " + key);
  }
  it->second = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorKind::Usage, "unknown configuration key: " + key);
  }
  return it->second;
}

double ConfigMap::get_double(const std::string& key) const {
  const std::string& raw = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Usage,
                "configuration key " + key + ": not a number: '" + raw + "'");
  }
}

std::size_t ConfigMap::get_size(const std::string& key) const {
  const double v = get_double(key);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw Error(ErrorKind::Usage,
                "configuration key " + key + ": not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t ConfigMap::get_u64(const std::string& key) const {
  const std::string& raw = get(key);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Usage,
                "configuration key " + key + ": not an unsigned integer: '" +
                    raw + "'");
  }
}

bool ConfigMap::get_bool(const std::string& key) const {
  const std::string& raw = get(key);
  if (raw == "true" || raw == "1") return true;
  if (raw == "false" || raw == "0") return false;
  throw Error(ErrorKind::Usage,
              "configuration key " + key + ": expected true/false, got '" +
                  raw + "'");
}

std::vector<std::size_t> ConfigMap::get_size_list(
    const std::string& key) const {
  std::vector<std::size_t> out;
  if (get(key).empty()) return out;
  for (const std::string& part : split(get(key), ',')) {
    try {
      out.push_back(std::stoull(part));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Usage,
                  "configuration key " + key + ": bad list entry '" + part +
                      "'");
    }
  }
  return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
  std::vector<double> out;
  if (get(key).empty()) return out;
  for (const std::string& part : split(get(key), ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Usage,
                  "configuration key " + key + ": bad list entry '" + part +
                      "'");
    }
  }
  return out;
}

std::vector<std::string> ConfigMap::get_string_list(
    const std::string& key) const {
  if (get(key).empty()) return {};
  return split(get(key), ',');
}

void ConfigMap::load_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw Error(ErrorKind::Usage, "cannot open config file: " + path);
  }
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Usage, path + ":" + std::to_string(line_number) +
                                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorKind::Usage, path + ":" + std::to_string(line_number) +
                                        ": empty key");
    }
    try {
      set(key, value);
    } catch (const Error&) {
      throw Error(ErrorKind::Usage, path + ":" + std::to_string(line_number) +
                                        ": unknown configuration key: " + key);
    }
  }
}

void ConfigMap::apply_override(const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorKind::Usage,
                "override must be key=value: " + key_equals_value);
  }
  set(trim(key_equals_value.substr(0, eq)),
      trim(key_equals_value.substr(eq + 1)));
}

std::string ConfigMap::dump() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key + " = " + value + "\n";
  }
  return out;
}

augment::AugmentSpec build_augment_spec(const ConfigMap& map) {
  augment::AugmentSpec spec = augment::preset(map.get("augment.preset"));
  auto maybe_bool = [&](const char* key, bool& out) {
    if (!map.empty_value(key)) out = map.get_bool(key);
  };
  auto maybe_double = [&](const char* key, double& out) {
    if (!map.empty_value(key)) out = map.get_double(key);
  };
  maybe_bool("augment.crop.enabled", spec.crop.enabled);
  maybe_double("augment.crop.area_lo", spec.crop.area_lo);
  maybe_double("augment.crop.area_hi", spec.crop.area_hi);
  maybe_double("augment.crop.aspect_lo", spec.crop.aspect_lo);
  maybe_double("augment.crop.aspect_hi", spec.crop.aspect_hi);
  maybe_bool("augment.hflip.enabled", spec.hflip.enabled);
  maybe_double("augment.hflip.prob", spec.hflip.prob);
  maybe_bool("augment.jitter.enabled", spec.jitter.enabled);
  maybe_double("augment.jitter.prob", spec.jitter.prob);
  maybe_double("augment.jitter.brightness", spec.jitter.brightness);
  maybe_double("augment.jitter.contrast", spec.jitter.contrast);
  maybe_double("augment.jitter.saturation", spec.jitter.saturation);
  maybe_double("augment.jitter.hue", spec.jitter.hue);
  maybe_bool("augment.grayscale.enabled", spec.grayscale.enabled);
  maybe_double("augment.grayscale.prob", spec.grayscale.prob);
  maybe_bool("augment.blur.enabled", spec.blur.enabled);
  maybe_double("augment.blur.prob", spec.blur.prob);
  maybe_double("augment.blur.sigma_lo", spec.blur.sigma_lo);
  maybe_double("augment.blur.sigma_hi", spec.blur.sigma_hi);
  spec.validate();
  return spec;
}

void materialize_augment_keys(ConfigMap& map) {
  const augment::AugmentSpec spec = build_augment_spec(map);
  auto put_bool = [&](const char* key, bool v) {
    map.set(key, v ? "true" : "false");
  };
  auto put_double = [&](const char* key, double v) {
    map.set(key, io::format_double(v));
  };
  put_bool("augment.crop.enabled", spec.crop.enabled);
  put_double("augment.crop.area_lo", spec.crop.area_lo);
  put_double("augment.crop.area_hi", spec.crop.area_hi);
  put_double("augment.crop.aspect_lo", spec.crop.aspect_lo);
  put_double("augment.crop.aspect_hi", spec.crop.aspect_hi);
  put_bool("augment.hflip.enabled", spec.hflip.enabled);
  put_double("augment.hflip.prob", spec.hflip.prob);
  put_bool("augment.jitter.enabled", spec.jitter.enabled);
  put_double("augment.jitter.prob", spec.jitter.prob);
  put_double("augment.jitter.brightness", spec.jitter.brightness);
  put_double("augment.jitter.contrast", spec.jitter.contrast);
  put_double("augment.jitter.saturation", spec.jitter.saturation);
  put_double("augment.jitter.hue", spec.jitter.hue);
  put_bool("augment.grayscale.enabled", spec.grayscale.enabled);
  put_double("augment.grayscale.prob", spec.grayscale.prob);
  put_bool("augment.blur.enabled", spec.blur.enabled);
  put_double("augment.blur.prob", spec.blur.prob);
  put_double("augment.blur.sigma_lo", spec.blur.sigma_lo);
  put_double("augment.blur.sigma_hi", spec.blur.sigma_hi);
}

train::TrainConfig build_train_config(const ConfigMap& map) {
  train::TrainConfig config;
  config.tau = map.get_double("tau");
  config.kernel.kind = losses::parse_kernel_kind(map.get("kernel.kind"));
  config.kernel.sigma = map.get_double("kernel.sigma");
  config.kernel.alpha = map.get_double("kernel.alpha");
  if (!map.empty_value("divergence_temperature")) {
    config.divergence_temperature = map.get_double("divergence_temperature");
  }
  config.batch_size = map.get_size("batch_size");
  config.epochs = map.get_size("epochs");
  config.drop_last = map.get_bool("drop_last");
  config.optimizer.lr = map.get_double("optim.lr");
  config.optimizer.beta1 = map.get_double("optim.beta1");
  config.optimizer.beta2 = map.get_double("optim.beta2");
  config.optimizer.weight_decay = map.get_double("optim.weight_decay");
  config.optimizer.eps = map.get_double("optim.eps");
  config.seed = map.get_u64("seed");
  config.augment_preset = map.get("augment.preset");
  config.augment_spec = build_augment_spec(map);
  config.lr_milestones = map.get_size_list("lr.milestones");
  config.lr_gamma = map.get_double("lr.gamma");
  config.checkpoint_every = map.get_size("checkpoint_every");
  config.validate();
  return config;
}

train::ModelSpec build_model_spec(const ConfigMap& map) {
  train::ModelSpec spec;
  spec.encoder_widths = map.get_size_list("model.encoder_widths");
  spec.projection_hidden = map.get_size("model.projection_hidden");
  spec.embed_dim = map.get_size("model.embed_dim");
  spec.kappa = map.get_size("kappa");
  spec.subnet_widths = map.get_size_list("model.subnet_widths");
  spec.subnet_batch_norm = map.get_bool("model.subnet_batch_norm");
  spec.use_contrastive_loss = map.get_bool("use_contrastive_loss");
  spec.use_divergence_loss = map.get_bool("use_divergence_loss");
  spec.validate();
  return spec;
}

train::EvalConfig build_eval_config(const ConfigMap& map) {
  train::EvalConfig config;
  config.lr = map.get_double("probe.lr");
  config.epochs = map.get_size("probe.epochs");
  config.batch_size = map.get_size("probe.batch_size");
  config.train_fraction = map.get_double("probe.train_fraction");
  config.seed = map.get_u64("seed");
  return config;
}

train::GridSpec build_grid_spec(const ConfigMap& map) {
  train::GridSpec grid;
  grid.x_lo = map.get_double("grid.x_lo");
  grid.x_hi = map.get_double("grid.x_hi");
  grid.y_lo = map.get_double("grid.y_lo");
  grid.y_hi = map.get_double("grid.y_hi");
  grid.resolution = map.get_size("grid.resolution");
  grid.slice_axes = map.get_size_list("grid.slice_axes");
  grid.slice_base = map.get_double_list("grid.slice_base");
  return grid;
}

}  // namespace config
}  // namespace condiv
