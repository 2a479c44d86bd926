#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "condiv/dataset.hpp"
#include "condiv/serialize.hpp"

#include "oracles.hpp"

using namespace condiv;
using data::BatchPlan;
using data::Dataset;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("condiv_test_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

std::string read_bytes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file);
  return std::string((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("gaussian clusters: shape, labels, determinism, separability") {
  std::vector<std::vector<double>> means{{-2, -2}, {2, 2}};
  Rng rng_a(7), rng_b(7);
  Dataset a = data::gen_gaussian_clusters(2, 200, 2, means, 0.3, rng_a);
  Dataset b = data::gen_gaussian_clusters(2, 200, 2, means, 0.3, rng_b);
  CHECK(a.size() == 400);
  CHECK(a.labeled());
  CHECK(a.num_classes() == 2);
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  CHECK(a.metadata.count("affine_lo") == 1);
  for (double v : a.pixels) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }

  // Linear separability certified by an independent logistic regression.
  oracles::Matrix x(a.size(), std::vector<double>(2));
  std::vector<int> y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    x[i][0] = a.pixels[i * 2];
    x[i][1] = a.pixels[i * 2 + 1];
    y[i] = static_cast<int>(a.labels[i]);
  }
  CHECK(oracles::logistic_regression_train_accuracy(x, y) >= 0.99);
}

TEST_CASE("cluster generator contract violations") {
  Rng rng(1);
  std::vector<std::vector<double>> one_mean{{0, 0}};
  CHECK_THROWS_AS(data::gen_gaussian_clusters(1, 10, 2, one_mean, 0.3, rng),
                  Error);
  std::vector<std::vector<double>> dup{{1, 1}, {1, 1}};
  CHECK_THROWS_AS(data::gen_gaussian_clusters(2, 10, 2, dup, 0.3, rng), Error);
  std::vector<std::vector<double>> ok{{-1, 0}, {1, 0}};
  CHECK_THROWS_AS(data::gen_gaussian_clusters(2, 10, 2, ok, 0.0, rng), Error);
}

TEST_CASE("toy shapes: balanced classes, valid pixels") {
  Rng rng(11);
  Dataset ds = data::gen_toy_shapes(30, rng);
  CHECK(ds.size() == 30);
  CHECK(ds.channels == 3);
  CHECK(ds.height == 16);
  CHECK(ds.num_classes() == 3);
  std::size_t counts[3] = {0, 0, 0};
  for (auto label : ds.labels) counts[label]++;
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);
}

TEST_CASE("CDL1 round trip is bit-exact") {
  Rng rng(13);
  Dataset ds = data::gen_toy_shapes(9, rng);
  const std::string path = temp_path("roundtrip.cdl");
  data::write_dataset(ds, path);
  Dataset back = data::read_dataset(path);
  CHECK(back.pixels == ds.pixels);
  CHECK(back.labels == ds.labels);
  CHECK(back.channels == ds.channels);
  CHECK(back.height == ds.height);
  CHECK(back.width == ds.width);

  // Writing the read-back dataset reproduces the file byte for byte.
  const std::string path2 = temp_path("roundtrip2.cdl");
  data::write_dataset(back, path2);
  CHECK(read_bytes(path) == read_bytes(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("CDL1 empty dataset round trips") {
  Dataset empty;
  empty.channels = 1;
  empty.height = 1;
  empty.width = 4;
  const std::string path = temp_path("empty.cdl");
  data::write_dataset(empty, path);
  Dataset back = data::read_dataset(path);
  CHECK(back.size() == 0);
  CHECK(back.width == 4);
  std::filesystem::remove(path);
}

TEST_CASE("CDL1 malformed files produce structured errors") {
  const std::string path = temp_path("bad.cdl");

  io::write_text_file(path, "NOPE");
  CHECK_THROWS_WITH_AS(data::read_dataset(path),
                       "CDL1: bad magic at byte offset 0", Error);

  // Valid header claiming more pixels than the file holds.
  std::string truncated;
  truncated += "CDL1";
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      truncated.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(4);  // n
  put_u32(1);  // C
  put_u32(1);  // H
  put_u32(5);  // W
  truncated.push_back(0);  // unlabeled
  truncated.push_back(1);  // f32
  put_u32(0);              // a single pixel instead of 20
  io::write_text_file(path, truncated);
  CHECK_THROWS_AS(data::read_dataset(path), Error);

  // Corrupt label value.
  std::string bad_label;
  bad_label += "CDL1";
  auto put_u32b = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      bad_label.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32b(1);
  put_u32b(1);
  put_u32b(1);
  put_u32b(1);
  bad_label.push_back(1);  // labeled
  bad_label.push_back(1);  // f32
  put_u32b(0);             // one pixel (f32 bits of 0.0)
  put_u32b(0xffffffffu);   // label
  io::write_text_file(path, bad_label);
  CHECK_THROWS_AS(data::read_dataset(path), Error);

  std::filesystem::remove(path);
}

TEST_CASE("epoch_batches: partition, determinism, epoch variation") {
  BatchPlan plan{5, 123, true};
  auto batches = data::epoch_batches(10, plan, 0);
  REQUIRE(batches.size() == 2);
  std::vector<bool> seen(10, false);
  for (const auto& batch : batches) {
    CHECK(batch.size() == 5);
    for (std::size_t idx : batch) {
      CHECK_FALSE(seen[idx]);
      seen[idx] = true;
    }
  }
  for (bool s : seen) CHECK(s);

  CHECK(data::epoch_batches(10, plan, 0) == batches);
  CHECK(data::epoch_batches(10, plan, 1) != batches);
}

TEST_CASE("epoch_batches edge cases") {
  BatchPlan plan{4, 9, true};
  CHECK_THROWS_AS(data::epoch_batches(3, plan, 0), Error);

  BatchPlan keep{4, 9, false};
  auto batches = data::epoch_batches(6, keep, 0);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].size() == 4);
  CHECK(batches[1].size() == 2);

  BatchPlan zero{0, 9, true};
  CHECK_THROWS_AS(data::epoch_batches(5, zero, 0), Error);
}

TEST_CASE("section container round trip and errors") {
  std::vector<io::Section> sections;
  sections.push_back({"meta/answer", {}, {42.0}});
  sections.push_back({"stats/values", {2, 3}, {1, 2, 3, 4, 5, 6}});
  sections.push_back({"empty/list", {0}, {}});

  const std::string path = temp_path("sections.cdc");
  io::write_sections(path, sections);
  auto back = io::read_sections(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].name == "meta/answer");
  CHECK(back[0].values == std::vector<double>{42.0});
  CHECK(back[1].shape == Shape{2, 3});
  CHECK(back[1].values == std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(io::find_section(back, "empty/list").values.empty());
  CHECK(io::find_section_opt(back, "missing") == nullptr);
  CHECK_THROWS_AS(io::find_section(back, "missing"), Error);

  io::write_text_file(path, "JUNK");
  CHECK_THROWS_AS(io::read_sections(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}
