#include <doctest.h>

#include <cmath>

#include "condiv/augment.hpp"
#include "condiv/rng.hpp"

using namespace condiv;
using augment::AugmentSpec;

namespace {

Tensor random_image(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
  std::vector<double> values(c * h * w);
  for (double& v : values) v = rng.uniform();
  return Tensor::from_data({c, h, w}, std::move(values));
}

}  // namespace

TEST_CASE("disabled pipeline is the identity") {
  Rng rng(1);
  Tensor img = random_image(rng, 3, 8, 8);
  AugmentSpec spec = augment::preset("none");
  Rng aug_rng(2);
  auto [v1, v2] = augment::two_views(img, spec, aug_rng);
  CHECK(v1.data() == img.data());
  CHECK(v2.data() == img.data());
}

TEST_CASE("hflip is an involution") {
  Rng rng(3);
  Tensor img = random_image(rng, 3, 6, 7);
  CHECK(augment::hflip(augment::hflip(img)).data() == img.data());
}

TEST_CASE("two_views determinism and independence") {
  Rng rng(5);
  Tensor img = random_image(rng, 3, 16, 16);
  AugmentSpec spec = augment::preset("small");

  Rng a(77), b(77);
  auto [a1, a2] = augment::two_views(img, spec, a);
  auto [b1, b2] = augment::two_views(img, spec, b);
  CHECK(a1.data() == b1.data());
  CHECK(a2.data() == b2.data());
  CHECK(a1.data() != a2.data());  // two independent chains

  Rng c(78);
  auto [c1, c2] = augment::two_views(img, spec, c);
  CHECK(a1.data() != c1.data());
}

TEST_CASE("range and shape preservation across presets") {
  Rng rng(7);
  for (const char* name : {"small", "imagenet"}) {
    AugmentSpec spec = augment::preset(name);
    for (int t = 0; t < 25; ++t) {
      Tensor img = random_image(rng, 3, 16, 16);
      Rng aug_rng(100 + t);
      auto [v1, v2] = augment::two_views(img, spec, aug_rng);
      CHECK(v1.shape() == img.shape());
      CHECK(v2.shape() == img.shape());
      for (double v : v1.data()) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("small image precondition") {
  Rng rng(9);
  Tensor tiny = random_image(rng, 1, 1, 4);
  AugmentSpec spec = augment::preset("small");
  Rng aug_rng(1);
  CHECK_THROWS_AS(augment::two_views(tiny, spec, aug_rng), Error);
}

TEST_CASE("grayscale is idempotent") {
  Rng rng(11);
  Tensor img = random_image(rng, 3, 8, 8);
  Tensor once = augment::grayscale(img);
  Tensor twice = augment::grayscale(once);
  for (std::size_t i = 0; i < once.numel(); ++i) {
    CHECK(std::fabs(once.data()[i] - twice.data()[i]) < 1e-12);
  }
}

TEST_CASE("drop_stage disables exactly one stage and is idempotent") {
  AugmentSpec spec = augment::preset("imagenet");
  AugmentSpec no_crop = augment::drop_stage(spec, "crop");
  CHECK(spec.crop.enabled);
  CHECK_FALSE(no_crop.crop.enabled);
  CHECK(no_crop.hflip.enabled);
  AugmentSpec again = augment::drop_stage(no_crop, "crop");
  CHECK_FALSE(again.crop.enabled);

  AugmentSpec none = spec;
  for (const char* stage : {"crop", "hflip", "jitter", "grayscale", "blur"}) {
    none = augment::drop_stage(none, stage);
  }
  Rng rng(13);
  Tensor img = random_image(rng, 3, 8, 8);
  Rng aug_rng(14);
  auto [v1, v2] = augment::two_views(img, none, aug_rng);
  CHECK(v1.data() == img.data());
  CHECK(v2.data() == img.data());

  CHECK_THROWS_AS(augment::drop_stage(spec, "rotate"), Error);
}

TEST_CASE("eval_transform identity when sizes match") {
  Rng rng(15);
  Tensor img = random_image(rng, 3, 10, 10);
  Tensor out = augment::eval_transform(img, 10, 10);
  CHECK(out.data() == img.data());
}

TEST_CASE("eval_transform preserves constant images") {
  Tensor img = Tensor::full({3, 4, 4}, 0.4375);
  Tensor out = augment::eval_transform(img, 3, 3);
  CHECK(out.shape() == Shape{3, 3, 3});
  for (double v : out.data()) CHECK(v == doctest::Approx(0.4375).epsilon(1e-12));

  Tensor up = augment::eval_transform(img, 9, 9);
  for (double v : up.data()) CHECK(v == doctest::Approx(0.4375).epsilon(1e-12));
}

TEST_CASE("eval_transform rejects crops larger than the resized image") {
  Tensor img = Tensor::full({1, 4, 8}, 0.5);
  // Shorter side resized to 4 -> (4,8); a 4x9 crop cannot fit.
  CHECK_THROWS_AS(augment::eval_transform(img, 4, 9), Error);
}

TEST_CASE("bilinear upscale of a 2x2 checkerboard matches hand-computed weights") {
  // Pixels: [[1,0],[0,1]] upscaled to 4x4 with half-pixel centers. Source
  // coordinates are (x_out + 0.5)/2 - 0.5 in {-0.25, 0.25, 0.75, 1.25},
  // clamped to [0,1]; interpolation weights are therefore
  // {0, 0.25, 0.75, 1} against the two source cells.
  Tensor img = Tensor::from_data({1, 2, 2}, {1, 0, 0, 1});
  Tensor up = augment::bilinear_resize(img, 4, 4);

  auto expected_1d = [](double a, double b) {
    return std::vector<double>{a, 0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b, b};
  };
  const auto wx = expected_1d(0.0, 1.0);  // weight of the right column
  std::vector<double> expected(16);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double wy = wx[y];  // weight of the bottom row (symmetry)
      const double w_right = wx[x];
      // value = (1-wy)*((1-wx)*1 + wx*0) + wy*((1-wx)*0 + wx*1)
      expected[y * 4 + x] =
          (1.0 - wy) * (1.0 - w_right) + wy * w_right;
    }
  }
  for (int i = 0; i < 16; ++i) {
    CHECK(up.data()[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  }

  // Center-cropping back after a 2x upscale keeps the middle 2x2 block.
  Tensor round_trip = augment::eval_transform(up, 2, 2);
  CHECK(round_trip.shape() == Shape{1, 2, 2});
}

TEST_CASE("blur preserves constant images and the value range") {
  Tensor img = Tensor::full({3, 12, 12}, 0.625);
  Tensor out = augment::gaussian_blur(img, 1.3);
  for (double v : out.data()) CHECK(v == doctest::Approx(0.625).epsilon(1e-12));

  Rng rng(17);
  Tensor noisy = random_image(rng, 3, 12, 12);
  Tensor blurred = augment::gaussian_blur(noisy, 0.8);
  for (double v : blurred.data()) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("spec validation catches bad ranges") {
  AugmentSpec spec = augment::preset("small");
  spec.hflip.prob = 1.5;
  CHECK_THROWS_AS(spec.validate(), Error);

  AugmentSpec bad_area = augment::preset("small");
  bad_area.crop.area_lo = 0.0;
  CHECK_THROWS_AS(bad_area.validate(), Error);

  CHECK_THROWS_AS(augment::preset("mystery"), Error);
}

TEST_CASE("presets carry the documented parameters") {
  AugmentSpec small = augment::preset("small");
  CHECK(small.crop.area_lo == 0.2);
  CHECK(small.jitter.brightness == 0.4);
  CHECK(small.jitter.hue == 0.1);
  CHECK(small.grayscale.prob == 0.2);
  CHECK_FALSE(small.blur.enabled);

  AugmentSpec imagenet = augment::preset("imagenet");
  CHECK(imagenet.crop.area_lo == 0.08);
  CHECK(imagenet.jitter.brightness == 0.8);
  CHECK(imagenet.jitter.hue == 0.2);
  CHECK(imagenet.blur.enabled);
  CHECK(imagenet.blur.sigma_lo == 0.1);
  CHECK(imagenet.blur.sigma_hi == 2.0);
}
