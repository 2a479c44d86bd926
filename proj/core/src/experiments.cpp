#include "condiv/experiments.hpp"

#include <algorithm>
#include <set>

namespace condiv {
namespace train {

std::vector<KappaSweepRow> sweep_kappa(const data::Dataset& dataset,
                                       const ModelSpec& base_spec,
                                       const TrainConfig& config,
                                       const EvalConfig& eval_config,
                                       const std::vector<std::size_t>& kappas) {
  std::set<std::size_t> distinct(kappas.begin(), kappas.end());
  if (distinct.size() < 2) {
    throw Error(ErrorKind::Value,
                "sweep_kappa: need at least two distinct kappa values");
  }
  std::vector<KappaSweepRow> rows;
  for (std::size_t kappa : kappas) {
    ModelSpec spec = base_spec;
    spec.kappa = kappa;
    Model model(dataset.sample_numel(), spec, config.seed);
    Adam optimizer(config.optimizer);
    fit(model, optimizer, dataset, config);
    const EvalReport report = linear_eval(model, dataset, eval_config);
    rows.push_back({kappa, report.top1});
  }
  return rows;
}

std::string sweep_csv(const std::vector<KappaSweepRow>& rows) {
  std::string out = "kappa,top1\n";
  for (const auto& row : rows) {
    out += std::to_string(row.kappa) + "," + io::format_double(row.top1) + "\n";
  }
  return out;
}

std::vector<AblationRow> ablate_augmentations(
    const data::Dataset& dataset, const ModelSpec& spec,
    const TrainConfig& config, const EvalConfig& eval_config,
    const std::vector<std::string>& stages) {
  for (const std::string& stage : stages) {
    if (!augment::is_valid_stage(stage)) {
      throw Error(ErrorKind::Usage, "unknown augmentation stage: " + stage);
    }
  }

  auto run = [&](const TrainConfig& run_config) {
    Model model(dataset.sample_numel(), spec, run_config.seed);
    Adam optimizer(run_config.optimizer);
    fit(model, optimizer, dataset, run_config);
    return linear_eval(model, dataset, eval_config).top1;
  };

  std::vector<AblationRow> rows;
  const double baseline = run(config);
  rows.push_back({"baseline", baseline, 0.0});
  for (const std::string& stage : stages) {
    TrainConfig dropped = config;
    dropped.augment_spec = augment::drop_stage(config.augment_spec, stage);
    const double top1 = run(dropped);
    rows.push_back({stage, top1, top1 - baseline});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "removed,top1,delta\n";
  for (const auto& row : rows) {
    out += row.removed + "," + io::format_double(row.top1) + "," +
           io::format_double(row.delta) + "\n";
  }
  return out;
}

std::string DivergenceGrid::to_csv() const {
  std::string out = "x,y,d\n";
  for (const GridPoint& p : points) {
    out += io::format_double(p.x) + "," + io::format_double(p.y) + "," +
           io::format_double(p.divergence) + "\n";
  }
  return out;
}

DivergenceGrid export_divergence_grid(Model& model,
                                      const std::vector<double>& anchor,
                                      const GridSpec& grid) {
  if (grid.resolution < 2) {
    throw Error(ErrorKind::Value,
                "export_divergence_grid: resolution must be >= 2");
  }
  const std::size_t input_dim = model.input_dim();
  std::size_t axis_x = 0, axis_y = 1;
  std::vector<double> base(input_dim, 0.0);
  if (input_dim != 2) {
    if (grid.slice_axes.size() != 2 || grid.slice_base.size() != input_dim) {
      throw Error(ErrorKind::Value,
                  "export_divergence_grid: encoder input dim is " +
                      std::to_string(input_dim) +
                      "; provide two slice axes and a full base point");
    }
    axis_x = grid.slice_axes[0];
    axis_y = grid.slice_axes[1];
    if (axis_x >= input_dim || axis_y >= input_dim || axis_x == axis_y) {
      throw Error(ErrorKind::Value, "export_divergence_grid: bad slice axes");
    }
    base = grid.slice_base;
  }
  if (anchor.size() != input_dim) {
    throw_shape_error("export_divergence_grid",
                      "anchor dimension " + std::to_string(anchor.size()) +
                          " does not match encoder input " +
                          std::to_string(input_dim));
  }

  const std::size_t res = grid.resolution;
  auto coord = [res](double lo, double hi, std::size_t i) {
    if (i + 1 == res) return hi;  // endpoint-exact
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(res - 1);
  };

  // Anchor first, then the grid points, all in one inference batch.
  std::vector<double> inputs((res * res + 1) * input_dim);
  std::copy(anchor.begin(), anchor.end(), inputs.begin());
  for (std::size_t iy = 0; iy < res; ++iy) {
    for (std::size_t ix = 0; ix < res; ++ix) {
      const std::size_t row = 1 + iy * res + ix;
      std::copy(base.begin(), base.end(), inputs.begin() + row * input_dim);
      inputs[row * input_dim + axis_x] = coord(grid.x_lo, grid.x_hi, ix);
      inputs[row * input_dim + axis_y] = coord(grid.y_lo, grid.y_hi, iy);
    }
  }

  Tensor x = Tensor::from_data({res * res + 1, input_dim}, std::move(inputs));
  Tensor z = model.embeddings(model.representations(x));
  Tensor outputs = model.subnet_outputs(z);
  MaxResult maxima = max_axis(outputs, 1);
  const std::size_t anchor_argmax = maxima.indices[0];

  DivergenceGrid result;
  result.resolution = res;
  result.points.reserve(res * res);
  for (std::size_t iy = 0; iy < res; ++iy) {
    for (std::size_t ix = 0; ix < res; ++ix) {
      const std::size_t row = 1 + iy * res + ix;
      GridPoint p;
      p.x = coord(grid.x_lo, grid.x_hi, ix);
      p.y = coord(grid.y_lo, grid.y_hi, iy);
      p.divergence =
          maxima.values.data()[row] - outputs.at(row, anchor_argmax);
      result.points.push_back(p);
    }
  }
  return result;
}

namespace {

std::string embeddings_csv_impl(
    const std::function<Tensor(const Tensor&)>& features,
    const data::Dataset& dataset) {
  const std::size_t n = dataset.size();
  const std::size_t dim = dataset.sample_numel();
  std::vector<double> values(dataset.pixels);
  Tensor x = Tensor::from_data({n, dim}, std::move(values));
  Tensor e = features(x);

  std::string out = "id,label";
  for (std::size_t j = 0; j < e.cols(); ++j)
    out += ",e" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i) + ",";
    out += dataset.labeled()
               ? std::to_string(static_cast<long long>(dataset.labels[i]))
               : "-1";
    for (std::size_t j = 0; j < e.cols(); ++j)
      out += "," + io::format_double(e.at(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace

std::string export_embeddings_csv(Model& model, const data::Dataset& dataset,
                                  const std::string& which) {
  dataset.validate();
  if (dataset.sample_numel() != model.input_dim()) {
    throw_shape_error("export_embeddings",
                      "dataset sample size does not match encoder input");
  }
  if (which == "encoder") {
    return embeddings_csv_impl(
        [&model](const Tensor& x) { return model.representations(x); },
        dataset);
  }
  if (which == "projection") {
    return embeddings_csv_impl(
        [&model](const Tensor& x) {
          return model.embeddings(model.representations(x));
        },
        dataset);
  }
  throw Error(ErrorKind::Usage,
              "export_embeddings: which must be 'encoder' or 'projection'");
}

std::string export_embeddings_csv(EncoderModel& encoder,
                                  const data::Dataset& dataset) {
  dataset.validate();
  if (dataset.sample_numel() != encoder.input_dim()) {
    throw_shape_error("export_embeddings",
                      "dataset sample size does not match encoder input");
  }
  return embeddings_csv_impl(
      [&encoder](const Tensor& x) { return encoder.forward(x); }, dataset);
}

}  // namespace train
}  // namespace condiv
