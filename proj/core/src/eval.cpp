#include "condiv/eval.hpp"

#include <algorithm>
#include <numeric>

namespace condiv {
namespace train {

namespace {

constexpr std::uint64_t kSplitTag = 0x73706c6974ull;  // probe split stream

Tensor dataset_matrix(const data::Dataset& dataset,
                      const std::vector<std::size_t>& indices) {
  const std::size_t dim = dataset.sample_numel();
  std::vector<double> values(indices.size() * dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double* src = dataset.pixels.data() + indices[i] * dim;
    std::copy(src, src + dim, values.begin() + i * dim);
  }
  return Tensor::from_data({indices.size(), dim}, std::move(values));
}

// Row-wise -log softmax(target); plain cross-entropy for the probe.
Tensor cross_entropy(const Tensor& logits,
                     const std::vector<std::size_t>& targets) {
  const std::size_t n = logits.rows();
  MaxResult shift = max_axis(logits, 1);
  Tensor shifted = sub(logits, reshape(shift.values, {n, 1}));
  Tensor denom = sum_axis(exp(shifted), 1);
  Tensor pos = take_per_row(logits, targets);
  return mean_all(add(log(denom), sub(shift.values, pos)));
}

}  // namespace

EvalReport linear_eval_features(
    const std::function<Tensor(const Tensor&)>& features,
    std::size_t feature_dim, const data::Dataset& dataset,
    const EvalConfig& config) {
  dataset.validate();
  if (!dataset.labeled()) {
    throw Error(ErrorKind::Value, "linear_eval: dataset has no labels");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw Error(ErrorKind::Value,
                "linear_eval: train_fraction must be inside (0,1)");
  }
  const std::size_t n = dataset.size();
  const std::size_t classes = dataset.num_classes();

  // Stratified split: a per-class shuffle, then train_fraction of each
  // class into the probe's training set.
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) by_class[dataset.labels[i]].push_back(i);
  Rng split_rng = Rng::derive(config.seed, kSplitTag);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& members : by_class) {
    split_rng.shuffle(members);
    const auto cut = static_cast<std::size_t>(
        config.train_fraction * static_cast<double>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < cut ? train_idx : test_idx).push_back(members[i]);
    }
  }
  if (train_idx.empty() || test_idx.empty()) {
    throw Error(ErrorKind::Value,
                "linear_eval: dataset too small for the requested split");
  }

  // Frozen features, computed once.
  Tensor train_features = features(dataset_matrix(dataset, train_idx));
  Tensor test_features = features(dataset_matrix(dataset, test_idx));
  if (train_features.cols() != feature_dim) {
    throw_shape_error("linear_eval", train_features.shape(), {0, feature_dim});
  }

  ParamGraph probe_params;
  Rng init_rng = Rng::derive(config.seed, kSplitTag + 1);
  Linear probe(feature_dim, classes, "probe", probe_params, init_rng);
  AdamConfig adam_config;
  adam_config.lr = config.lr;
  adam_config.beta1 = 0.9;
  adam_config.beta2 = 0.999;
  adam_config.weight_decay = 0.0;
  Adam optimizer(adam_config);

  data::BatchPlan plan{std::min(config.batch_size, train_idx.size()),
                       config.seed, /*drop_last=*/false};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : data::epoch_batches(train_idx.size(), plan,
                                                 epoch)) {
      Tensor x = gather_rows(train_features, batch);
      std::vector<std::size_t> y(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i)
        y[i] = dataset.labels[train_idx[batch[i]]];
      Tensor loss = cross_entropy(probe.forward(x), y);
      backward(loss, probe_params);
      optimizer.step(probe_params);
    }
  }

  Tensor logits = probe.forward(test_features);
  EvalReport report;
  report.n_train = train_idx.size();
  report.n_test = test_idx.size();
  report.classes = classes;

  std::size_t hits1 = 0, hits5 = 0;
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    const std::size_t label = dataset.labels[test_idx[i]];
    std::vector<std::size_t> ranked(classes);
    std::iota(ranked.begin(), ranked.end(), std::size_t{0});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) {
                       return logits.at(i, a) > logits.at(i, b);
                     });
    if (ranked[0] == label) ++hits1;
    for (std::size_t k = 0; k < std::min<std::size_t>(5, classes); ++k) {
      if (ranked[k] == label) {
        ++hits5;
        break;
      }
    }
  }
  report.top1 = static_cast<double>(hits1) / static_cast<double>(test_idx.size());
  if (classes > 5) {
    report.top5 =
        static_cast<double>(hits5) / static_cast<double>(test_idx.size());
  }
  return report;
}

EvalReport linear_eval(Model& model, const data::Dataset& dataset,
                       const EvalConfig& config) {
  return linear_eval_features(
      [&model](const Tensor& x) { return model.representations(x); },
      model.encoder().out_dim(), dataset, config);
}

EvalReport linear_eval(EncoderModel& encoder, const data::Dataset& dataset,
                       const EvalConfig& config) {
  return linear_eval_features(
      [&encoder](const Tensor& x) { return encoder.forward(x); },
      encoder.out_dim(), dataset, config);
}

}  // namespace train
}  // namespace condiv
