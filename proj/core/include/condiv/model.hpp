#pragma once

#include <memory>
#include <string>
#include <vector>

#include "condiv/adam.hpp"
#include "condiv/divergence_net.hpp"
#include "condiv/layers.hpp"
#include "condiv/serialize.hpp"

namespace condiv {
namespace train {

struct ModelSpec {
  // Hidden widths of the dense encoder; ReLU after every layer. Empty means
  // the encoder is the identity.
  std::vector<std::size_t> encoder_widths{256, 256};
  // Projection head: linear -> batch norm -> ReLU -> linear.
  std::size_t projection_hidden = 256;
  std::size_t embed_dim = 32;
  // kappa affine subnetworks on top of the embeddings.
  std::size_t kappa = 100;
  std::vector<std::size_t> subnet_widths{128, 64};
  bool subnet_batch_norm = false;

  bool use_contrastive_loss = true;
  bool use_divergence_loss = true;

  void validate() const;
};

// Dense ReLU stack producing the representations used for evaluation.
class Encoder {
 public:
  Encoder(std::size_t input_dim, const std::vector<std::size_t>& widths,
          ParamGraph& params, Rng& rng);

  Tensor forward(const Tensor& x) const;
  std::size_t input_dim() const { return input_dim_; }
  std::size_t out_dim() const { return out_dim_; }

 private:
  std::size_t input_dim_, out_dim_;
  std::vector<Linear> layers_;
};

// Encoder + projection head + kappa divergence subnetworks over one shared
// parameter registry. When a loss branch is disabled in the spec its
// parameters are registered as non-trainable, so the optimizer provably
// never touches them.
class Model {
 public:
  Model(std::size_t input_dim, ModelSpec spec, std::uint64_t init_seed);

  Tensor representations(const Tensor& x, bool training = false,
                         bool update_stats = false);
  Tensor embeddings(const Tensor& representations, bool training = false,
                    bool update_stats = false);
  Tensor subnet_outputs(const Tensor& embeddings, bool training = false,
                        bool update_stats = false);

  const ModelSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return encoder_->input_dim(); }
  ParamGraph& params() { return params_; }
  const Encoder& encoder() const { return *encoder_; }
  bregman::DeepDivergenceNet& divergence_net() { return *subnets_; }

  // Full training state (spec, every parameter and buffer, optimizer
  // moments, resume epoch) as named sections; `load_full` rebuilds an
  // identical model so a resumed run continues bit-for-bit.
  std::vector<io::Section> full_state_sections(const Adam& optimizer,
                                               std::size_t next_epoch) const;
  // Evaluation artifact: encoder parameters only.
  std::vector<io::Section> encoder_artifact_sections() const;

  struct Loaded {
    std::unique_ptr<Model> model;
    Adam optimizer;
    std::size_t next_epoch = 0;
  };
  static Loaded load_full(const std::vector<io::Section>& sections);

 private:
  ModelSpec spec_;
  ParamGraph params_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Linear> proj_fc1_;
  std::unique_ptr<BatchNorm1d> proj_bn_;
  std::unique_ptr<Linear> proj_fc2_;
  std::unique_ptr<bregman::DeepDivergenceNet> subnets_;
};

// Encoder rebuilt from an artifact file, for linear evaluation and
// embedding export.
class EncoderModel {
 public:
  EncoderModel(std::size_t input_dim, const std::vector<std::size_t>& widths,
               std::uint64_t init_seed);
  static EncoderModel load(const std::vector<io::Section>& sections);

  Tensor forward(const Tensor& x) { return encoder_->forward(x); }
  std::size_t input_dim() const { return encoder_->input_dim(); }
  std::size_t out_dim() const { return encoder_->out_dim(); }
  ParamGraph& params() { return params_; }

 private:
  ParamGraph params_;
  std::unique_ptr<Encoder> encoder_;
};

}  // namespace train
}  // namespace condiv
