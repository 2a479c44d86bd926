#pragma once

#include <optional>
#include <string>
#include <vector>

#include "condiv/augment.hpp"
#include "condiv/dataset.hpp"
#include "condiv/losses.hpp"
#include "condiv/model.hpp"

namespace condiv {
namespace train {

struct TrainConfig {
  double tau = 0.1;
  losses::SimilarityKernel kernel;  // gaussian, sigma 0.9
  std::optional<double> divergence_temperature;  // absent: no temperature
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  bool drop_last = true;
  AdamConfig optimizer;  // lr 0.005, betas 0.5/0.999, weight decay 1e-4
  std::uint64_t seed = 42;
  std::string augment_preset = "small";
  augment::AugmentSpec augment_spec;  // resolved from the preset + overrides
  std::vector<std::size_t> lr_milestones;  // epochs where lr is scaled
  double lr_gamma = 0.1;
  std::size_t checkpoint_every = 0;  // epochs between checkpoints; 0 = final only

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;   // 1-based, monotone across epochs
  std::size_t epoch = 0;  // 0-based
  double contrastive = 0.0;
  double divergence = 0.0;
  double total = 0.0;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double mean_contrastive = 0.0;
  double mean_divergence = 0.0;
  double mean_total = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EpochSummary> epochs;
  double wall_seconds = 0.0;

  std::string to_csv() const;  // "step,epoch,contrastive,divergence,total"
};

// One pass of the training recipe on an explicit batch: augment two views
// per sample (vector datasets bypass the image pipeline and feed the raw
// sample as both views), embed, run the subnetworks, combine the contrastive
// and divergence losses, backpropagate and take an optimizer step. Returns
// the loss values; disabled branches contribute an exact 0 and build no
// graph.
losses::LossBreakdown train_step(Model& model, Adam& optimizer,
                                 const data::Dataset& dataset,
                                 const std::vector<std::size_t>& batch,
                                 const TrainConfig& config, std::size_t epoch);

// Runs `config.epochs` epochs of train_step over deterministic shuffled
// batches. When `out_dir` is non-empty, full training checkpoints land
// there at the configured cadence together with the final checkpoint and
// the encoder-only evaluation artifact ("checkpoint.cdc", "encoder.cdc").
// A `start_epoch` > 0 continues a restored run; the batch and augmentation
// streams are keyed by (seed, epoch), so a resumed trajectory is
// bit-identical to an uninterrupted one.
TrainLog fit(Model& model, Adam& optimizer, const data::Dataset& dataset,
             const TrainConfig& config, const std::string& out_dir = "",
             std::size_t start_epoch = 0);

}  // namespace train
}  // namespace condiv
