#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condiv/eval.hpp"
#include "condiv/experiments.hpp"
#include "condiv/train.hpp"

namespace condiv {
namespace config {

// Flat key = value configuration with a fixed key catalog. Layering is
// defaults < config file < CONDIV_SEED env (seed only) < explicit flags;
// the CLI owns the layering order, this class owns parsing, validation and
// the resolved snapshot.
class ConfigMap {
 public:
  static ConfigMap defaults();

  bool known(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool empty_value(const std::string& key) const { return get(key).empty(); }

  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  // `key = value` lines with '#' comments; unknown keys and malformed lines
  // are usage errors citing the line number.
  void load_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);

  // Sorted `key = value` dump, the resolved-config snapshot.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

// Typed views over a resolved ConfigMap.
train::TrainConfig build_train_config(const ConfigMap& map);
train::ModelSpec build_model_spec(const ConfigMap& map);
train::EvalConfig build_eval_config(const ConfigMap& map);
train::GridSpec build_grid_spec(const ConfigMap& map);
augment::AugmentSpec build_augment_spec(const ConfigMap& map);

// Writes the effective augmentation values back into the map so the
// snapshot records them even when they came from a preset.
void materialize_augment_keys(ConfigMap& map);

}  // namespace config
}  // namespace condiv
