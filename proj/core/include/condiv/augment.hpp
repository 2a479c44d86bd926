#pragma once

#include <string>
#include <utility>

#include "condiv/rng.hpp"
#include "condiv/tensor.hpp"

namespace condiv {
namespace augment {

// Images are (C,H,W) tensors with values in [0,1], C in {1,3}. Augmentation
// happens off the tape; the training graph starts at the encoder input.

struct CropSpec {
  bool enabled = true;
  double area_lo = 0.2, area_hi = 1.0;
  double aspect_lo = 3.0 / 4.0, aspect_hi = 4.0 / 3.0;
};

struct HflipSpec {
  bool enabled = true;
  double prob = 0.5;
};

struct JitterSpec {
  bool enabled = true;
  double prob = 0.8;
  double brightness = 0.4, contrast = 0.4, saturation = 0.4, hue = 0.1;
};

struct GrayscaleSpec {
  bool enabled = true;
  double prob = 0.2;
};

struct BlurSpec {
  bool enabled = false;
  double prob = 0.5;
  double sigma_lo = 0.1, sigma_hi = 2.0;
};

struct AugmentSpec {
  CropSpec crop;
  HflipSpec hflip;
  JitterSpec jitter;
  GrayscaleSpec grayscale;
  BlurSpec blur;

  void validate() const;
};

// "small" is the small-dataset recipe (jitter strengths 0.4/0.4/0.4/0.1,
// crop area 0.2-1.0, no blur); "imagenet" strengthens the jitter to
// 0.8/0.8/0.8/0.2, widens the crop to 0.08-1.0 and enables blur; "none"
// disables every stage (identity pipeline).
AugmentSpec preset(const std::string& name);

// Disables one stage of {crop, hflip, jitter, grayscale, blur}; the input
// spec is left untouched. Unknown names are an error.
AugmentSpec drop_stage(const AugmentSpec& spec, const std::string& stage);

bool is_valid_stage(const std::string& stage);

// Two independently sampled augmentation chains over the same image, each
// applied in the fixed order crop -> hflip -> jitter -> grayscale -> blur.
// Output shape equals the input shape (crops are resized back bilinearly)
// and values are clamped to [0,1]. Requires H >= 2 and W >= 2.
std::pair<Tensor, Tensor> two_views(const Tensor& image,
                                    const AugmentSpec& spec, Rng& rng);

// Deterministic evaluation transform: bilinear resize so the shorter side
// matches min(out_h, out_w), then center crop to (out_h, out_w). Errors if
// the resized image is smaller than the requested crop.
Tensor eval_transform(const Tensor& image, std::size_t out_h,
                      std::size_t out_w);

// Individual deterministic transforms, exposed for tests and tools.
Tensor bilinear_resize(const Tensor& image, std::size_t out_h,
                       std::size_t out_w);
Tensor hflip(const Tensor& image);
Tensor grayscale(const Tensor& image);
Tensor gaussian_blur(const Tensor& image, double sigma);

}  // namespace augment
}  // namespace condiv
