#pragma once

#include <string>
#include <vector>

#include "condiv/eval.hpp"
#include "condiv/train.hpp"

namespace condiv {
namespace train {

struct KappaSweepRow {
  std::size_t kappa = 0;
  double top1 = 0.0;
};

// One full train + linear-eval per kappa value, all runs sharing the same
// seed. Requires at least two distinct values.
std::vector<KappaSweepRow> sweep_kappa(const data::Dataset& dataset,
                                       const ModelSpec& base_spec,
                                       const TrainConfig& config,
                                       const EvalConfig& eval_config,
                                       const std::vector<std::size_t>& kappas);
std::string sweep_csv(const std::vector<KappaSweepRow>& rows);

struct AblationRow {
  std::string removed;  // "baseline" or the removed stage name
  double top1 = 0.0;
  double delta = 0.0;  // top1 - baseline top1 (0 for the baseline row)
};

// Baseline run plus one run per removed augmentation stage, seed-matched.
std::vector<AblationRow> ablate_augmentations(
    const data::Dataset& dataset, const ModelSpec& spec,
    const TrainConfig& config, const EvalConfig& eval_config,
    const std::vector<std::string>& stages);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct GridSpec {
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
  std::size_t resolution = 41;
  // For encoders with input dim > 2: the varied coordinate pair and the
  // base point supplying the remaining coordinates.
  std::vector<std::size_t> slice_axes;  // empty: inputs must be 2-D
  std::vector<double> slice_base;
};

struct GridPoint {
  double x = 0.0, y = 0.0, divergence = 0.0;
};

struct DivergenceGrid {
  std::vector<GridPoint> points;  // row-major over (y, x)
  std::size_t resolution = 0;

  std::string to_csv() const;  // header "x,y,d"
};

// Deep divergence between each grid point and a fixed anchor, both run
// through encoder + projection + subnetworks as single-row batches:
// d = max(o_g) - o_g[argmax(o_anchor)]. Zero exactly where the grid point's
// argmax subnetwork agrees with the anchor's.
DivergenceGrid export_divergence_grid(Model& model,
                                      const std::vector<double>& anchor,
                                      const GridSpec& grid);

// Per-sample embedding export: "id,label,e0,..."; label -1 when unlabeled.
// `which` selects the encoder representations or the projection embeddings.
std::string export_embeddings_csv(Model& model, const data::Dataset& dataset,
                                  const std::string& which);
std::string export_embeddings_csv(EncoderModel& encoder,
                                  const data::Dataset& dataset);

}  // namespace train
}  // namespace condiv
