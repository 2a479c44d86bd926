#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>

#include "condiv/config.hpp"
#include "condiv/eval.hpp"
#include "condiv/experiments.hpp"
#include "condiv/grad_check.hpp"
#include "condiv/train.hpp"

using namespace condiv;
using train::Model;
using train::ModelSpec;
using train::TrainConfig;

namespace {

std::string temp_dir(const std::string& name) {
  auto path = std::filesystem::temp_directory_path() /
              ("condiv_train_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::create_directories(path);
  return path.string();
}

ModelSpec tiny_spec(std::size_t kappa = 4) {
  ModelSpec spec;
  spec.encoder_widths = {16};
  spec.projection_hidden = 12;
  spec.embed_dim = 6;
  spec.kappa = kappa;
  spec.subnet_widths = {8};
  return spec;
}

TrainConfig tiny_config(std::size_t epochs, std::size_t batch_size = 16) {
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = batch_size;
  config.seed = 99;
  config.augment_spec = augment::preset("small");
  return config;
}

data::Dataset cluster_data(std::size_t per_cluster = 40) {
  Rng rng(5);
  return data::gen_gaussian_clusters(2, per_cluster, 2,
                                     {{-2.0, -2.0}, {2.0, 2.0}}, 0.3, rng);
}

std::vector<std::vector<double>> snapshot_params(Model& model) {
  std::vector<std::vector<double>> out;
  for (const auto& e : model.params().entries()) out.push_back(e.tensor.data());
  return out;
}

}  // namespace

TEST_CASE("model spec validation") {
  ModelSpec spec = tiny_spec();
  spec.use_contrastive_loss = false;
  spec.use_divergence_loss = false;
  CHECK_THROWS_AS(spec.validate(), Error);
  CHECK_THROWS_AS(Model(0, tiny_spec(), 1), Error);
}

TEST_CASE("model shapes line up") {
  Model model(2, tiny_spec(), 7);
  Tensor x = Tensor::from_data({5, 2}, std::vector<double>(10, 0.2));
  Tensor h = model.representations(x, true, false);
  CHECK(h.shape() == Shape{5, 16});
  Tensor z = model.embeddings(h, true, false);
  CHECK(z.shape() == Shape{5, 6});
  Tensor o = model.subnet_outputs(z, true, false);
  CHECK(o.shape() == Shape{5, 4});
}

TEST_CASE("train_step determinism") {
  data::Dataset ds = cluster_data();
  std::vector<std::size_t> batch{0, 1, 40, 41, 2, 42};

  auto run = [&]() {
    Model model(2, tiny_spec(), 11);
    Adam adam;
    TrainConfig config = tiny_config(1);
    auto breakdown = train::train_step(model, adam, ds, batch, config, 0);
    return std::make_pair(breakdown, snapshot_params(model));
  };
  auto [b1, p1] = run();
  auto [b2, p2] = run();
  CHECK(b1.total == b2.total);
  CHECK(b1.contrastive == b2.contrastive);
  CHECK(p1 == p2);
  CHECK(b1.total == b1.contrastive + b1.divergence);
}

TEST_CASE("disabled divergence loss freezes subnet parameters") {
  data::Dataset ds = cluster_data();
  ModelSpec spec = tiny_spec();
  spec.use_divergence_loss = false;
  Model model(2, spec, 13);
  Adam adam;
  TrainConfig config = tiny_config(3);

  std::vector<std::vector<double>> before;
  for (const auto& e : model.params().entries()) {
    if (e.name.rfind("subnet/", 0) == 0) before.push_back(e.tensor.data());
  }
  CHECK_FALSE(before.empty());

  train::TrainLog log = train::fit(model, adam, ds, config);
  CHECK_FALSE(log.steps.empty());
  for (const auto& r : log.steps) CHECK(r.divergence == 0.0);

  std::size_t i = 0;
  for (const auto& e : model.params().entries()) {
    if (e.name.rfind("subnet/", 0) == 0) {
      CHECK(e.tensor.data() == before[i++]);
    }
  }
}

TEST_CASE("disabled contrastive loss still trains the encoder") {
  data::Dataset ds = cluster_data();
  ModelSpec spec = tiny_spec();
  spec.use_contrastive_loss = false;
  Model model(2, spec, 17);
  Adam adam;
  TrainConfig config = tiny_config(1);

  std::vector<double> encoder_before =
      model.params().at("encoder/0/w").tensor.data();
  train::TrainLog log = train::fit(model, adam, ds, config);
  for (const auto& r : log.steps) {
    CHECK(r.contrastive == 0.0);
    CHECK(r.total == r.divergence);
  }
  CHECK(model.params().at("encoder/0/w").tensor.data() != encoder_before);
}

TEST_CASE("fit: zero epochs leaves parameters untouched") {
  data::Dataset ds = cluster_data();
  Model model(2, tiny_spec(), 19);
  Adam adam;
  TrainConfig config = tiny_config(0);
  auto before = snapshot_params(model);
  train::TrainLog log = train::fit(model, adam, ds, config);
  CHECK(log.steps.empty());
  CHECK(snapshot_params(model) == before);
}

TEST_CASE("fit determinism: bit-identical trajectories for 10+ steps") {
  data::Dataset ds = cluster_data();
  auto run = [&]() {
    Model model(2, tiny_spec(), 23);
    Adam adam;
    TrainConfig config = tiny_config(4, 16);  // 5 batches/epoch * 4 epochs
    train::TrainLog log = train::fit(model, adam, ds, config);
    return std::make_pair(log.to_csv(), snapshot_params(model));
  };
  auto [csv1, params1] = run();
  auto [csv2, params2] = run();
  CHECK(csv1 == csv2);
  CHECK(params1 == params2);
}

TEST_CASE("loss additivity holds in every log record") {
  data::Dataset ds = cluster_data();
  Model model(2, tiny_spec(), 29);
  Adam adam;
  train::TrainLog log = train::fit(model, adam, ds, tiny_config(2));
  for (const auto& r : log.steps) {
    CHECK(r.total == r.contrastive + r.divergence);
  }
  CHECK(log.epochs.size() == 2);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted trajectory") {
  data::Dataset ds = cluster_data();
  const std::string dir = temp_dir("resume");

  Model full(2, tiny_spec(), 31);
  Adam full_adam;
  TrainConfig config = tiny_config(4);
  train::fit(full, full_adam, ds, config);

  Model half(2, tiny_spec(), 31);
  Adam half_adam;
  TrainConfig first_half = config;
  first_half.epochs = 2;
  train::fit(half, half_adam, ds, first_half, dir);

  auto loaded = Model::load_full(io::read_sections(dir + "/checkpoint.cdc"));
  CHECK(loaded.next_epoch == 2);
  loaded.optimizer.set_config(config.optimizer);
  train::fit(*loaded.model, loaded.optimizer, ds, config, "", loaded.next_epoch);

  auto expect = snapshot_params(full);
  auto got = snapshot_params(*loaded.model);
  CHECK(expect == got);
  std::filesystem::remove_all(dir);
}

TEST_CASE("encoder artifact contains only encoder parameters") {
  Model model(2, tiny_spec(), 37);
  auto sections = model.encoder_artifact_sections();
  for (const auto& s : sections) {
    const bool meta = s.name.rfind("meta/", 0) == 0;
    const bool encoder_param = s.name.rfind("param/encoder/", 0) == 0;
    CHECK((meta || encoder_param));
  }

  train::EncoderModel encoder = train::EncoderModel::load(sections);
  Tensor x = Tensor::from_data({3, 2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  Tensor a = model.representations(x);
  Tensor b = encoder.forward(x);
  CHECK(a.data() == b.data());
}

TEST_CASE("full-model gradient check on the composite loss") {
  data::Dataset ds = cluster_data(6);
  ModelSpec spec;
  spec.encoder_widths = {6};
  spec.projection_hidden = 5;
  spec.embed_dim = 4;
  spec.kappa = 3;
  spec.subnet_widths = {4};
  Model model(2, spec, 41);
  TrainConfig config = tiny_config(1);

  std::vector<std::size_t> batch{0, 6, 1, 7};
  std::vector<Tensor> samples;
  for (std::size_t i : batch) samples.push_back(ds.sample(i));
  std::vector<double> flat;
  for (const auto& s : samples)
    flat.insert(flat.end(), s.data().begin(), s.data().end());
  Tensor x = Tensor::from_data({batch.size(), 2}, flat);

  auto f = [&]() {
    Tensor z1 = model.embeddings(model.representations(x, true, false), true,
                                 false);
    Tensor z2 = model.embeddings(
        model.representations(mul(x, Tensor::scalar(0.9)), true, false), true,
        false);
    Tensor loss1 = losses::nt_xent(z1, z2, config.tau);
    Tensor o1 = model.subnet_outputs(z1, true, false);
    Tensor o2 = model.subnet_outputs(z2, true, false);
    Tensor psi = losses::apply_kernel(config.kernel,
                                      bregman::deep_divergence(o1, o2));
    return add(loss1, losses::divergence_loss(psi));
  };
  GradCheckReport report = grad_check(f, model.params(), 1e-5, 1e-4);
  INFO("max rel error ", report.max_rel_error, " over ", report.checked);
  CHECK(report.passed());
}

TEST_CASE("linear_eval errors on unlabeled data and freezes the encoder") {
  data::Dataset ds = cluster_data();
  Model model(2, tiny_spec(), 43);
  train::EvalConfig eval_config;
  eval_config.epochs = 20;
  eval_config.seed = 7;

  data::Dataset unlabeled = ds;
  unlabeled.labels.clear();
  CHECK_THROWS_AS(train::linear_eval(model, unlabeled, eval_config), Error);

  auto before = snapshot_params(model);
  train::EvalReport report = train::linear_eval(model, ds, eval_config);
  CHECK(snapshot_params(model) == before);  // frozen means frozen
  CHECK(report.n_train + report.n_test == ds.size());
  CHECK(report.classes == 2);
  // Random separable features: the probe should beat the majority baseline.
  CHECK(report.top1 >= 0.5);
  CHECK_FALSE(report.top5.has_value());
}

TEST_CASE("linear_eval at chance level under permuted labels") {
  data::Dataset ds = cluster_data(50);
  Rng rng(47);
  rng.shuffle(ds.labels);
  Model model(2, tiny_spec(), 53);
  train::EvalConfig eval_config;
  eval_config.epochs = 30;
  eval_config.seed = 11;
  train::EvalReport report = train::linear_eval(model, ds, eval_config);
  CHECK(report.top1 >= 0.5 - 0.15);
  CHECK(report.top1 <= 0.5 + 0.15);
}

TEST_CASE("sweep_kappa requires two distinct values and emits full rows") {
  data::Dataset ds = cluster_data(10);
  TrainConfig config = tiny_config(1, 8);
  train::EvalConfig eval_config;
  eval_config.epochs = 5;

  CHECK_THROWS_AS(
      train::sweep_kappa(ds, tiny_spec(), config, eval_config, {4}), Error);
  CHECK_THROWS_AS(
      train::sweep_kappa(ds, tiny_spec(), config, eval_config, {4, 4}), Error);

  auto rows = train::sweep_kappa(ds, tiny_spec(), config, eval_config, {2, 5});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].kappa == 2);
  CHECK(rows[1].kappa == 5);
  for (const auto& row : rows) {
    CHECK(row.top1 >= 0.0);
    CHECK(row.top1 <= 1.0);
  }
  CHECK(train::sweep_csv(rows).rfind("kappa,top1\n", 0) == 0);
}

TEST_CASE("ablation: removing a disabled stage gives delta exactly zero") {
  Rng rng(59);
  data::Dataset ds = data::gen_toy_shapes(12, rng);
  TrainConfig config = tiny_config(1, 6);
  train::EvalConfig eval_config;
  eval_config.epochs = 5;
  ModelSpec spec = tiny_spec(2);

  // blur is disabled in the small preset, so dropping it is a no-op and the
  // seed-matched delta must be exactly zero.
  auto rows =
      train::ablate_augmentations(ds, spec, config, eval_config, {"blur"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].removed == "baseline");
  CHECK(rows[1].removed == "blur");
  CHECK(rows[1].delta == 0.0);

  CHECK_THROWS_AS(train::ablate_augmentations(ds, spec, config, eval_config,
                                              {"rotate"}),
                  Error);

  auto baseline_only =
      train::ablate_augmentations(ds, spec, config, eval_config, {});
  CHECK(baseline_only.size() == 1);
}

TEST_CASE("divergence grid: anchor zero, kappa=1 identically zero") {
  data::Dataset ds = cluster_data(8);
  Model model(2, tiny_spec(1), 61);  // single subnetwork
  train::GridSpec grid;
  grid.resolution = 7;
  auto result = train::export_divergence_grid(model, {0.5, 0.5}, grid);
  REQUIRE(result.points.size() == 49);
  for (const auto& p : result.points) CHECK(p.divergence == 0.0);

  Model multi(2, tiny_spec(5), 63);
  auto multi_grid = train::export_divergence_grid(multi, {0.5, 0.5}, grid);
  for (const auto& p : multi_grid.points) CHECK(p.divergence >= 0.0);
  // The grid node at the anchor itself diverges by exactly zero.
  bool found_anchor = false;
  for (const auto& p : multi_grid.points) {
    if (p.x == 0.5 && p.y == 0.5) {
      found_anchor = true;
      CHECK(p.divergence == 0.0);
    }
  }
  CHECK(found_anchor);

  train::GridSpec bad = grid;
  bad.resolution = 1;
  CHECK_THROWS_AS(train::export_divergence_grid(multi, {0.5, 0.5}, bad), Error);
  CHECK_THROWS_AS(train::export_divergence_grid(multi, {0.5}, grid), Error);
}

TEST_CASE("divergence grid slice mode for higher-dimensional inputs") {
  Model model(4, tiny_spec(3), 67);
  train::GridSpec grid;
  grid.resolution = 3;
  CHECK_THROWS_AS(
      train::export_divergence_grid(model, {0.1, 0.2, 0.3, 0.4}, grid), Error);

  grid.slice_axes = {0, 2};
  grid.slice_base = {0.1, 0.2, 0.3, 0.4};
  auto result =
      train::export_divergence_grid(model, {0.1, 0.2, 0.3, 0.4}, grid);
  CHECK(result.points.size() == 9);
}

TEST_CASE("embedding export format") {
  data::Dataset ds = cluster_data(3);
  Model model(2, tiny_spec(), 71);
  std::string csv = train::export_embeddings_csv(model, ds, "encoder");
  CHECK(csv.rfind("id,label,e0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);

  std::string proj = train::export_embeddings_csv(model, ds, "projection");
  // projection embeddings have embed_dim columns
  CHECK(proj.find(",e5") != std::string::npos);
  CHECK(proj.find(",e6") == std::string::npos);

  data::Dataset unlabeled = ds;
  unlabeled.labels.clear();
  std::string anon = train::export_embeddings_csv(model, unlabeled, "encoder");
  CHECK(anon.find("0,-1,") != std::string::npos);

  CHECK_THROWS_AS(train::export_embeddings_csv(model, ds, "both"), Error);

  // Re-export is byte-identical.
  CHECK(train::export_embeddings_csv(model, ds, "encoder") == csv);
}
