#pragma once

#include <functional>
#include <optional>

#include "condiv/dataset.hpp"
#include "condiv/model.hpp"

namespace condiv {
namespace train {

struct EvalConfig {
  double lr = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

struct EvalReport {
  double top1 = 0.0;
  std::optional<double> top5;  // present when the dataset has > 5 classes
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t classes = 0;
};

// Linear evaluation protocol: freeze the encoder, compute representations
// once in inference mode, fit a single dense layer with softmax
// cross-entropy on a stratified train split and report top-1 (and top-5
// when there are more than 5 classes) on the held-out split. The encoder
// parameters are never touched.
EvalReport linear_eval(Model& model, const data::Dataset& dataset,
                       const EvalConfig& config);
EvalReport linear_eval(EncoderModel& encoder, const data::Dataset& dataset,
                       const EvalConfig& config);

// Shared implementation over an arbitrary frozen feature map.
EvalReport linear_eval_features(
    const std::function<Tensor(const Tensor&)>& features,
    std::size_t feature_dim, const data::Dataset& dataset,
    const EvalConfig& config);

}  // namespace train
}  // namespace condiv
