#include "condiv/train.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

namespace condiv {
namespace train {

namespace {

constexpr std::uint64_t kAugmentTag = 0x61756721ull;  // augmentation streams

}  // namespace

void TrainConfig::validate() const {
  if (!(tau > 0.0)) throw Error(ErrorKind::Value, "config: tau must be > 0");
  if (batch_size == 0) {
    throw Error(ErrorKind::Value, "config: batch_size must be >= 1");
  }
  if (divergence_temperature && !(*divergence_temperature > 0.0)) {
    throw Error(ErrorKind::Value,
                "config: divergence_temperature must be > 0");
  }
  if (!(lr_gamma > 0.0)) {
    throw Error(ErrorKind::Value, "config: lr gamma must be > 0");
  }
  kernel.validate();
  augment_spec.validate();
}

std::string TrainLog::to_csv() const {
  std::string out = "step,epoch,contrastive,divergence,total\n";
  for (const StepRecord& r : steps) {
    out += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," +
           io::format_double(r.contrastive) + "," +
           io::format_double(r.divergence) + "," + io::format_double(r.total) +
           "\n";
  }
  return out;
}

namespace {

// Stacks per-sample view tensors into one (n, input_dim) constant batch.
Tensor stack_views(const std::vector<Tensor>& views) {
  const std::size_t n = views.size();
  const std::size_t dim = views[0].numel();
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(views[i].data().begin(), views[i].data().end(),
              data.begin() + i * dim);
  }
  return Tensor::from_data({n, dim}, std::move(data));
}

}  // namespace

losses::LossBreakdown train_step(Model& model, Adam& optimizer,
                                 const data::Dataset& dataset,
                                 const std::vector<std::size_t>& batch,
                                 const TrainConfig& config, std::size_t epoch) {
  if (batch.empty()) {
    throw Error(ErrorKind::Value, "train_step: empty batch");
  }
  if (dataset.sample_numel() != model.input_dim()) {
    throw_shape_error("train_step",
                      "dataset sample size " +
                          std::to_string(dataset.sample_numel()) +
                          " does not match model input " +
                          std::to_string(model.input_dim()));
  }

  const bool image_pipeline = !dataset.is_vector_data();
  std::vector<Tensor> views1, views2;
  views1.reserve(batch.size());
  views2.reserve(batch.size());
  for (std::size_t index : batch) {
    Tensor sample = dataset.sample(index);
    if (image_pipeline) {
      Rng rng = Rng::derive(config.seed, kAugmentTag, epoch, index);
      auto [v1, v2] = augment::two_views(sample, config.augment_spec, rng);
      views1.push_back(std::move(v1));
      views2.push_back(std::move(v2));
    } else {
      views1.push_back(sample);
      views2.push_back(sample);
    }
  }

  Tensor x1 = stack_views(views1);
  Tensor x2 = stack_views(views2);
  Tensor z1 = model.embeddings(model.representations(x1, true, true), true, true);
  Tensor z2 = model.embeddings(model.representations(x2, true, true), true, true);

  const ModelSpec& spec = model.spec();
  std::optional<Tensor> loss_contrastive, loss_divergence;
  if (spec.use_contrastive_loss) {
    loss_contrastive = losses::nt_xent(z1, z2, config.tau);
  }
  if (spec.use_divergence_loss) {
    Tensor o1 = model.subnet_outputs(z1, true, true);
    Tensor o2 = model.subnet_outputs(z2, true, true);
    Tensor divergences = bregman::deep_divergence(o1, o2);
    Tensor similarity = losses::apply_kernel(config.kernel, divergences);
    loss_divergence =
        losses::divergence_loss(similarity, config.divergence_temperature);
  }

  Tensor total;
  if (loss_contrastive && loss_divergence) {
    total = add(*loss_contrastive, *loss_divergence);
  } else if (loss_contrastive) {
    total = *loss_contrastive;
  } else {
    total = *loss_divergence;
  }

  backward(total, model.params());
  optimizer.step(model.params());

  return losses::total_loss(
      loss_contrastive ? loss_contrastive->value() : 0.0,
      loss_divergence ? loss_divergence->value() : 0.0);
}

namespace {

void write_checkpoint(const Model& model, const Adam& optimizer,
                      std::size_t next_epoch, const std::string& path) {
  io::write_sections(path, model.full_state_sections(optimizer, next_epoch));
}

}  // namespace

TrainLog fit(Model& model, Adam& optimizer, const data::Dataset& dataset,
             const TrainConfig& config, const std::string& out_dir,
             std::size_t start_epoch) {
  config.validate();
  dataset.validate();
  if (dataset.size() == 0) {
    throw Error(ErrorKind::Value, "fit: empty dataset");
  }
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  TrainLog log;
  const double base_lr = config.optimizer.lr;

  data::BatchPlan plan{config.batch_size, config.seed, config.drop_last};

  for (std::size_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
    double lr = base_lr;
    for (std::size_t milestone : config.lr_milestones) {
      if (epoch >= milestone) lr *= config.lr_gamma;
    }
    optimizer.set_learning_rate(lr);

    const auto batches = data::epoch_batches(dataset.size(), plan, epoch);
    EpochSummary summary;
    summary.epoch = epoch;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      losses::LossBreakdown breakdown;
      try {
        breakdown =
            train_step(model, optimizer, dataset, batches[b], config, epoch);
      } catch (const Error& e) {
        throw Error(e.kind(), "epoch " + std::to_string(epoch) + " step " +
                                  std::to_string(b) + ": " + e.what());
      }
      StepRecord record;
      record.step = epoch * batches.size() + b + 1;
      record.epoch = epoch;
      record.contrastive = breakdown.contrastive;
      record.divergence = breakdown.divergence;
      record.total = breakdown.total;
      log.steps.push_back(record);
      summary.mean_contrastive += breakdown.contrastive;
      summary.mean_divergence += breakdown.divergence;
      summary.mean_total += breakdown.total;
    }
    if (!batches.empty()) {
      const double inv = 1.0 / static_cast<double>(batches.size());
      summary.mean_contrastive *= inv;
      summary.mean_divergence *= inv;
      summary.mean_total *= inv;
    }
    log.epochs.push_back(summary);

    if (!out_dir.empty() && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0 &&
        epoch + 1 < config.epochs) {
      char name[48];
      std::snprintf(name, sizeof(name), "checkpoint_epoch%04zu.cdc",
                    epoch + 1);
      write_checkpoint(model, optimizer, epoch + 1, out_dir + "/" + name);
    }
  }

  if (!out_dir.empty()) {
    write_checkpoint(model, optimizer, config.epochs,
                     out_dir + "/checkpoint.cdc");
    io::write_sections(out_dir + "/encoder.cdc",
                       model.encoder_artifact_sections());
  }

  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return log;
}

}  // namespace train
}  // namespace condiv
