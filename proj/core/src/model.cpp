#include "condiv/model.hpp"

#include <algorithm>

namespace condiv {
namespace train {

void ModelSpec::validate() const {
  if (embed_dim == 0) {
    throw Error(ErrorKind::Value, "model: embed_dim must be >= 1");
  }
  if (projection_hidden == 0) {
    throw Error(ErrorKind::Value, "model: projection_hidden must be >= 1");
  }
  if (kappa == 0) {
    throw Error(ErrorKind::Value, "model: kappa must be >= 1");
  }
  if (!use_contrastive_loss && !use_divergence_loss) {
    throw Error(ErrorKind::Value, "model: at least one loss must be enabled");
  }
}

Encoder::Encoder(std::size_t input_dim, const std::vector<std::size_t>& widths,
                 ParamGraph& params, Rng& rng)
    : input_dim_(input_dim), out_dim_(input_dim) {
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    layers_.emplace_back(in, widths[l], "encoder/" + std::to_string(l), params,
                         rng);
    in = widths[l];
  }
  out_dim_ = in;
}

Tensor Encoder::forward(const Tensor& x) const {
  if (x.ndim() != 2 || x.cols() != input_dim_) {
    throw_shape_error("encoder", x.shape(), {0, input_dim_});
  }
  Tensor h = x;
  for (const Linear& layer : layers_) h = relu(layer.forward(h));
  return h;
}

namespace {

// Loss-branch gating: parameters of a disabled branch are registered
// non-trainable so training provably leaves them bit-identical.
class TrainabilityScope {
 public:
  TrainabilityScope(ParamGraph& params, bool trainable)
      : params_(params), trainable_(trainable), start_(params.size()) {}
  ~TrainabilityScope() {
    if (trainable_) return;
    auto& entries = params_.entries();
    for (std::size_t i = start_; i < entries.size(); ++i) {
      entries[i].trainable = false;
      entries[i].tensor.node()->requires_grad = false;
    }
  }

 private:
  ParamGraph& params_;
  bool trainable_;
  std::size_t start_;
};

}  // namespace

Model::Model(std::size_t input_dim, ModelSpec spec, std::uint64_t init_seed)
    : spec_(std::move(spec)) {
  spec_.validate();
  if (input_dim == 0) {
    throw Error(ErrorKind::Value, "model: input_dim must be >= 1");
  }
  Rng rng = Rng::derive(init_seed, /*tag=*/0x696e6974ull);  // "init"

  encoder_ = std::make_unique<Encoder>(input_dim, spec_.encoder_widths,
                                       params_, rng);
  const std::size_t enc_out = encoder_->out_dim();
  proj_fc1_ = std::make_unique<Linear>(enc_out, spec_.projection_hidden,
                                       "proj/fc1", params_, rng);
  proj_bn_ =
      std::make_unique<BatchNorm1d>(spec_.projection_hidden, "proj/bn", params_);
  proj_fc2_ = std::make_unique<Linear>(spec_.projection_hidden, spec_.embed_dim,
                                       "proj/fc2", params_, rng);
  {
    TrainabilityScope gate(params_, spec_.use_divergence_loss);
    subnets_ = std::make_unique<bregman::DeepDivergenceNet>(
        spec_.embed_dim, spec_.kappa, spec_.subnet_widths,
        spec_.subnet_batch_norm, "subnet", params_, rng);
  }
}

Tensor Model::representations(const Tensor& x, bool training,
                              bool update_stats) {
  (void)training;
  (void)update_stats;
  return encoder_->forward(x);
}

Tensor Model::embeddings(const Tensor& representations, bool training,
                         bool update_stats) {
  Tensor h = proj_fc1_->forward(representations);
  h = proj_bn_->forward(h, training, update_stats);
  return proj_fc2_->forward(relu(h));
}

Tensor Model::subnet_outputs(const Tensor& embeddings, bool training,
                             bool update_stats) {
  return subnets_->forward(embeddings, training, update_stats);
}

namespace {

io::Section scalar_section(const std::string& name, double value) {
  return {name, {}, {value}};
}

io::Section vector_section(const std::string& name,
                           const std::vector<std::size_t>& values) {
  io::Section s{name, {values.size()}, {}};
  s.values.reserve(values.size());
  for (std::size_t v : values) s.values.push_back(static_cast<double>(v));
  return s;
}

std::vector<std::size_t> as_size_list(const io::Section& s) {
  std::vector<std::size_t> out;
  out.reserve(s.values.size());
  for (double v : s.values) out.push_back(static_cast<std::size_t>(v));
  return out;
}

}  // namespace

std::vector<io::Section> Model::full_state_sections(
    const Adam& optimizer, std::size_t next_epoch) const {
  std::vector<io::Section> sections;
  sections.push_back(scalar_section("meta/version", 1.0));
  sections.push_back(scalar_section("meta/artifact", 0.0));
  sections.push_back(
      scalar_section("meta/input_dim", static_cast<double>(input_dim())));
  sections.push_back(vector_section("meta/encoder_widths",
                                    spec_.encoder_widths));
  sections.push_back(scalar_section("meta/projection_hidden",
                                    static_cast<double>(spec_.projection_hidden)));
  sections.push_back(
      scalar_section("meta/embed_dim", static_cast<double>(spec_.embed_dim)));
  sections.push_back(
      scalar_section("meta/kappa", static_cast<double>(spec_.kappa)));
  sections.push_back(vector_section("meta/subnet_widths", spec_.subnet_widths));
  sections.push_back(scalar_section("meta/subnet_batch_norm",
                                    spec_.subnet_batch_norm ? 1.0 : 0.0));
  sections.push_back(scalar_section("meta/use_contrastive_loss",
                                    spec_.use_contrastive_loss ? 1.0 : 0.0));
  sections.push_back(scalar_section("meta/use_divergence_loss",
                                    spec_.use_divergence_loss ? 1.0 : 0.0));
  sections.push_back(
      scalar_section("train/next_epoch", static_cast<double>(next_epoch)));
  sections.push_back(scalar_section(
      "adam/step", static_cast<double>(optimizer.step_count())));

  for (const auto& entry : params_.entries()) {
    sections.push_back(
        {"param/" + entry.name, entry.tensor.shape(), entry.tensor.data()});
  }

  const auto& m = const_cast<Adam&>(optimizer).first_moments();
  const auto& v = const_cast<Adam&>(optimizer).second_moments();
  if (!m.empty()) {
    std::size_t t = 0;
    for (const auto& entry : params_.entries()) {
      if (!entry.trainable) continue;
      sections.push_back({"adam/m/" + entry.name, entry.tensor.shape(), m[t]});
      sections.push_back({"adam/v/" + entry.name, entry.tensor.shape(), v[t]});
      ++t;
    }
  }
  return sections;
}

std::vector<io::Section> Model::encoder_artifact_sections() const {
  std::vector<io::Section> sections;
  sections.push_back(scalar_section("meta/version", 1.0));
  sections.push_back(scalar_section("meta/artifact", 1.0));
  sections.push_back(
      scalar_section("meta/input_dim", static_cast<double>(input_dim())));
  sections.push_back(vector_section("meta/encoder_widths",
                                    spec_.encoder_widths));
  for (const auto& entry : params_.entries()) {
    if (entry.name.rfind("encoder/", 0) == 0) {
      sections.push_back(
          {"param/" + entry.name, entry.tensor.shape(), entry.tensor.data()});
    }
  }
  return sections;
}

Model::Loaded Model::load_full(const std::vector<io::Section>& sections) {
  if (io::find_section(sections, "meta/artifact").values[0] != 0.0) {
    throw Error(ErrorKind::Io,
                "checkpoint is an encoder-only artifact, not a full training "
                "checkpoint");
  }
  ModelSpec spec;
  spec.encoder_widths =
      as_size_list(io::find_section(sections, "meta/encoder_widths"));
  spec.projection_hidden = static_cast<std::size_t>(
      io::find_section(sections, "meta/projection_hidden").values[0]);
  spec.embed_dim = static_cast<std::size_t>(
      io::find_section(sections, "meta/embed_dim").values[0]);
  spec.kappa = static_cast<std::size_t>(
      io::find_section(sections, "meta/kappa").values[0]);
  spec.subnet_widths =
      as_size_list(io::find_section(sections, "meta/subnet_widths"));
  spec.subnet_batch_norm =
      io::find_section(sections, "meta/subnet_batch_norm").values[0] != 0.0;
  spec.use_contrastive_loss =
      io::find_section(sections, "meta/use_contrastive_loss").values[0] != 0.0;
  spec.use_divergence_loss =
      io::find_section(sections, "meta/use_divergence_loss").values[0] != 0.0;
  const auto input_dim = static_cast<std::size_t>(
      io::find_section(sections, "meta/input_dim").values[0]);

  Loaded loaded;
  loaded.model = std::make_unique<Model>(input_dim, spec, /*init_seed=*/0);
  loaded.next_epoch = static_cast<std::size_t>(
      io::find_section(sections, "train/next_epoch").values[0]);

  for (auto& entry : loaded.model->params_.entries()) {
    const io::Section& s = io::find_section(sections, "param/" + entry.name);
    if (s.shape != entry.tensor.shape()) {
      throw Error(ErrorKind::Io, "checkpoint: shape mismatch in " + s.name);
    }
    entry.tensor.mutable_data() = s.values;
  }

  const auto step = static_cast<std::int64_t>(
      io::find_section(sections, "adam/step").values[0]);
  bool have_moments = false;
  for (const auto& s : sections) {
    if (s.name.rfind("adam/m/", 0) == 0) {
      have_moments = true;
      break;
    }
  }
  std::vector<std::vector<double>> m, v;
  if (have_moments) {
    for (const auto& entry : loaded.model->params_.entries()) {
      if (!entry.trainable) continue;
      m.push_back(io::find_section(sections, "adam/m/" + entry.name).values);
      v.push_back(io::find_section(sections, "adam/v/" + entry.name).values);
    }
  }
  loaded.optimizer.restore(step, std::move(m), std::move(v));
  return loaded;
}

EncoderModel::EncoderModel(std::size_t input_dim,
                           const std::vector<std::size_t>& widths,
                           std::uint64_t init_seed) {
  Rng rng = Rng::derive(init_seed, /*tag=*/0x696e6974ull);
  encoder_ = std::make_unique<Encoder>(input_dim, widths, params_, rng);
}

EncoderModel EncoderModel::load(const std::vector<io::Section>& sections) {
  const auto input_dim = static_cast<std::size_t>(
      io::find_section(sections, "meta/input_dim").values[0]);
  const std::vector<std::size_t> widths =
      as_size_list(io::find_section(sections, "meta/encoder_widths"));
  EncoderModel model(input_dim, widths, /*init_seed=*/0);
  for (auto& entry : model.params_.entries()) {
    const io::Section& s = io::find_section(sections, "param/" + entry.name);
    if (s.shape != entry.tensor.shape()) {
      throw Error(ErrorKind::Io, "artifact: shape mismatch in " + s.name);
    }
    entry.tensor.mutable_data() = s.values;
  }
  return model;
}

}  // namespace train
}  // namespace condiv
