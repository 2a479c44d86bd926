#include "condiv/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace condiv {
namespace augment {

namespace {

struct Dims {
  std::size_t c, h, w;
};

Dims check_image(const char* op, const Tensor& image) {
  if (image.ndim() != 3) {
    throw_shape_error(op, "expected a (C,H,W) image, got " +
                              shape_to_string(image.shape()));
  }
  const std::size_t c = image.shape()[0];
  if (c != 1 && c != 3) {
    throw_shape_error(op, "channel count must be 1 or 3");
  }
  return {c, image.shape()[1], image.shape()[2]};
}

double pixel(const std::vector<double>& data, const Dims& d, std::size_t c,
             std::size_t y, std::size_t x) {
  return data[(c * d.h + y) * d.w + x];
}

std::vector<double> clamp01(std::vector<double> data) {
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
  return data;
}

Tensor make_image(const Dims& d, std::vector<double> data) {
  return Tensor::from_data({d.c, d.h, d.w}, std::move(data));
}

// reflect-101 indexing: -1 -> 1, n -> n-2
std::size_t reflect(long idx, long n) {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * n - 2 - idx;
  }
  return static_cast<std::size_t>(idx);
}

Tensor crop_region(const Tensor& image, std::size_t top, std::size_t left,
                   std::size_t h, std::size_t w) {
  const Dims d = check_image("crop", image);
  std::vector<double> out(d.c * h * w);
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out[(c * h + y) * w + x] = pixel(image.data(), d, c, top + y, left + x);
  return Tensor::from_data({d.c, h, w}, std::move(out));
}

double luma(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

// RGB <-> HSV with h in [0,1) turns; inputs clamped to [0,1] by callers.
void rgb_to_hsv(double r, double g, double b, double& h, double& s,
                double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta == 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = std::fmod((g - b) / delta, 6.0) / 6.0;
  } else if (mx == g) {
    h = ((b - r) / delta + 2.0) / 6.0;
  } else {
    h = ((r - g) / delta + 4.0) / 6.0;
  }
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g,
                double& b) {
  const double hh = h * 6.0;
  const int sector = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

Tensor adjust_brightness(const Tensor& image, double factor) {
  const Dims d = check_image("brightness", image);
  std::vector<double> out = image.data();
  for (double& v : out) v *= factor;
  return make_image(d, clamp01(std::move(out)));
}

Tensor adjust_contrast(const Tensor& image, double factor) {
  const Dims d = check_image("contrast", image);
  double mean = 0.0;
  if (d.c == 3) {
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t x = 0; x < d.w; ++x)
        mean += luma(pixel(image.data(), d, 0, y, x),
                     pixel(image.data(), d, 1, y, x),
                     pixel(image.data(), d, 2, y, x));
  } else {
    for (double v : image.data()) mean += v;
  }
  mean /= static_cast<double>(d.h * d.w);

  std::vector<double> out = image.data();
  for (double& v : out) v = mean + factor * (v - mean);
  return make_image(d, clamp01(std::move(out)));
}

Tensor adjust_saturation(const Tensor& image, double factor) {
  const Dims d = check_image("saturation", image);
  if (d.c == 1) return image;
  std::vector<double> out = image.data();
  for (std::size_t y = 0; y < d.h; ++y) {
    for (std::size_t x = 0; x < d.w; ++x) {
      const double gray = luma(pixel(image.data(), d, 0, y, x),
                               pixel(image.data(), d, 1, y, x),
                               pixel(image.data(), d, 2, y, x));
      for (std::size_t c = 0; c < 3; ++c) {
        double& v = out[(c * d.h + y) * d.w + x];
        v = gray + factor * (v - gray);
      }
    }
  }
  return make_image(d, clamp01(std::move(out)));
}

Tensor adjust_hue(const Tensor& image, double shift) {
  const Dims d = check_image("hue", image);
  if (d.c == 1) return image;
  std::vector<double> out = image.data();
  for (std::size_t y = 0; y < d.h; ++y) {
    for (std::size_t x = 0; x < d.w; ++x) {
      double h, s, v;
      rgb_to_hsv(pixel(image.data(), d, 0, y, x),
                 pixel(image.data(), d, 1, y, x),
                 pixel(image.data(), d, 2, y, x), h, s, v);
      h = h + shift;
      h -= std::floor(h);
      double r, g, b;
      hsv_to_rgb(h, s, v, r, g, b);
      out[(0 * d.h + y) * d.w + x] = r;
      out[(1 * d.h + y) * d.w + x] = g;
      out[(2 * d.h + y) * d.w + x] = b;
    }
  }
  return make_image(d, clamp01(std::move(out)));
}

}  // namespace

void AugmentSpec::validate() const {
  auto check_prob = [](const char* name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::Value,
                  std::string("augment: ") + name + " probability not in [0,1]");
    }
  };
  check_prob("hflip", hflip.prob);
  check_prob("jitter", jitter.prob);
  check_prob("grayscale", grayscale.prob);
  check_prob("blur", blur.prob);
  if (!(crop.area_lo > 0.0 && crop.area_lo <= crop.area_hi &&
        crop.area_hi <= 1.0)) {
    throw Error(ErrorKind::Value, "augment: crop area range not in (0,1]");
  }
  if (!(crop.aspect_lo > 0.0 && crop.aspect_lo <= crop.aspect_hi)) {
    throw Error(ErrorKind::Value, "augment: bad crop aspect range");
  }
  if (!(blur.sigma_lo > 0.0 && blur.sigma_lo <= blur.sigma_hi)) {
    throw Error(ErrorKind::Value, "augment: bad blur sigma range");
  }
  if (jitter.brightness < 0 || jitter.contrast < 0 || jitter.saturation < 0 ||
      jitter.hue < 0 || jitter.brightness >= 1.0 || jitter.contrast >= 1.0 ||
      jitter.saturation >= 1.0 || jitter.hue > 0.5) {
    throw Error(ErrorKind::Value, "augment: jitter strengths out of range");
  }
}

AugmentSpec preset(const std::string& name) {
  AugmentSpec spec;  // defaults are the small-data recipe
  if (name == "small") return spec;
  if (name == "imagenet") {
    spec.crop.area_lo = 0.08;
    spec.jitter.brightness = 0.8;
    spec.jitter.contrast = 0.8;
    spec.jitter.saturation = 0.8;
    spec.jitter.hue = 0.2;
    spec.blur.enabled = true;
    return spec;
  }
  if (name == "none") {
    spec.crop.enabled = false;
    spec.hflip.enabled = false;
    spec.jitter.enabled = false;
    spec.grayscale.enabled = false;
    spec.blur.enabled = false;
    return spec;
  }
  throw Error(ErrorKind::Usage, "unknown augmentation preset: " + name);
}

bool is_valid_stage(const std::string& stage) {
  return stage == "crop" || stage == "hflip" || stage == "jitter" ||
         stage == "grayscale" || stage == "blur";
}

AugmentSpec drop_stage(const AugmentSpec& spec, const std::string& stage) {
  AugmentSpec out = spec;
  if (stage == "crop") out.crop.enabled = false;
  else if (stage == "hflip") out.hflip.enabled = false;
  else if (stage == "jitter") out.jitter.enabled = false;
  else if (stage == "grayscale") out.grayscale.enabled = false;
  else if (stage == "blur") out.blur.enabled = false;
  else throw Error(ErrorKind::Usage, "unknown augmentation stage: " + stage);
  return out;
}

Tensor bilinear_resize(const Tensor& image, std::size_t out_h,
                       std::size_t out_w) {
  const Dims d = check_image("resize", image);
  if (out_h == 0 || out_w == 0) {
    throw Error(ErrorKind::Value, "resize: zero output size");
  }
  if (out_h == d.h && out_w == d.w) return image;

  const double scale_y = static_cast<double>(d.h) / static_cast<double>(out_h);
  const double scale_x = static_cast<double>(d.w) / static_cast<double>(out_w);
  std::vector<double> out(d.c * out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    // half-pixel centers
    double sy = (static_cast<double>(y) + 0.5) * scale_y - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(d.h - 1));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, d.h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      double sx = (static_cast<double>(x) + 0.5) * scale_x - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(d.w - 1));
      const std::size_t x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, d.w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < d.c; ++c) {
        const double top = (1.0 - fx) * pixel(image.data(), d, c, y0, x0) +
                           fx * pixel(image.data(), d, c, y0, x1);
        const double bottom = (1.0 - fx) * pixel(image.data(), d, c, y1, x0) +
                              fx * pixel(image.data(), d, c, y1, x1);
        out[(c * out_h + y) * out_w + x] = (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return Tensor::from_data({d.c, out_h, out_w}, std::move(out));
}

Tensor hflip(const Tensor& image) {
  const Dims d = check_image("hflip", image);
  std::vector<double> out(image.numel());
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t x = 0; x < d.w; ++x)
        out[(c * d.h + y) * d.w + x] =
            pixel(image.data(), d, c, y, d.w - 1 - x);
  return make_image(d, std::move(out));
}

Tensor grayscale(const Tensor& image) {
  const Dims d = check_image("grayscale", image);
  if (d.c == 1) return image;
  std::vector<double> out(image.numel());
  for (std::size_t y = 0; y < d.h; ++y) {
    for (std::size_t x = 0; x < d.w; ++x) {
      const double g = luma(pixel(image.data(), d, 0, y, x),
                            pixel(image.data(), d, 1, y, x),
                            pixel(image.data(), d, 2, y, x));
      for (std::size_t c = 0; c < 3; ++c) out[(c * d.h + y) * d.w + x] = g;
    }
  }
  return make_image(d, clamp01(std::move(out)));
}

Tensor gaussian_blur(const Tensor& image, double sigma) {
  const Dims d = check_image("blur", image);
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::Value, "blur: sigma must be > 0");
  }
  // Kernel size ~10% of the shorter side (odd, at least 3), with the radius
  // additionally truncated at 2*sigma.
  std::size_t k = static_cast<std::size_t>(
      std::lround(0.1 * static_cast<double>(std::min(d.h, d.w))));
  if (k < 3) k = 3;
  if (k % 2 == 0) ++k;
  std::size_t radius = k / 2;
  const auto sigma_radius =
      static_cast<std::size_t>(std::ceil(2.0 * sigma));
  radius = std::max<std::size_t>(1, std::min(radius, sigma_radius));

  std::vector<double> weights(2 * radius + 1);
  double wsum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double offset = static_cast<double>(i) - static_cast<double>(radius);
    weights[i] = std::exp(-offset * offset / (2.0 * sigma * sigma));
    wsum += weights[i];
  }
  for (double& w : weights) w /= wsum;

  const long lh = static_cast<long>(d.h), lw = static_cast<long>(d.w);
  std::vector<double> horiz(image.numel());
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t x = 0; x < d.w; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
          const long sx = static_cast<long>(x) + static_cast<long>(i) -
                          static_cast<long>(radius);
          acc += weights[i] * pixel(image.data(), d, c, y, reflect(sx, lw));
        }
        horiz[(c * d.h + y) * d.w + x] = acc;
      }

  std::vector<double> out(image.numel());
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t x = 0; x < d.w; ++x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
          const long sy = static_cast<long>(y) + static_cast<long>(i) -
                          static_cast<long>(radius);
          acc += weights[i] * horiz[(c * d.h + reflect(sy, lh)) * d.w + x];
        }
        out[(c * d.h + y) * d.w + x] = acc;
      }
  return make_image(d, clamp01(std::move(out)));
}

namespace {

Tensor random_resized_crop(const Tensor& image, const CropSpec& spec,
                           Rng& rng) {
  const Dims d = check_image("crop", image);
  const double area = static_cast<double>(d.h * d.w);
  std::size_t crop_h = 0, crop_w = 0;
  bool found = false;
  for (int attempt = 0; attempt < 10 && !found; ++attempt) {
    const double target = area * rng.uniform(spec.area_lo, spec.area_hi);
    const double ratio = std::exp(
        rng.uniform(std::log(spec.aspect_lo), std::log(spec.aspect_hi)));
    const auto w = static_cast<std::size_t>(
        std::lround(std::sqrt(target * ratio)));
    const auto h = static_cast<std::size_t>(
        std::lround(std::sqrt(target / ratio)));
    if (w >= 1 && h >= 1 && w <= d.w && h <= d.h) {
      crop_h = h;
      crop_w = w;
      found = true;
    }
  }
  std::size_t top, left;
  if (found) {
    top = rng.uniform_index(d.h - crop_h + 1);
    left = rng.uniform_index(d.w - crop_w + 1);
  } else {
    // Center-crop fallback with the aspect clamped into range.
    const double in_ratio =
        static_cast<double>(d.w) / static_cast<double>(d.h);
    if (in_ratio < spec.aspect_lo) {
      crop_w = d.w;
      crop_h = static_cast<std::size_t>(
          std::lround(static_cast<double>(d.w) / spec.aspect_lo));
    } else if (in_ratio > spec.aspect_hi) {
      crop_h = d.h;
      crop_w = static_cast<std::size_t>(
          std::lround(static_cast<double>(d.h) * spec.aspect_hi));
    } else {
      crop_h = d.h;
      crop_w = d.w;
    }
    crop_h = std::clamp<std::size_t>(crop_h, 1, d.h);
    crop_w = std::clamp<std::size_t>(crop_w, 1, d.w);
    top = (d.h - crop_h) / 2;
    left = (d.w - crop_w) / 2;
  }
  return bilinear_resize(crop_region(image, top, left, crop_h, crop_w), d.h,
                         d.w);
}

Tensor apply_jitter(const Tensor& image, const JitterSpec& spec, Rng& rng) {
  std::vector<std::size_t> order{0, 1, 2, 3};
  rng.shuffle(order);
  Tensor out = image;
  for (std::size_t which : order) {
    switch (which) {
      case 0:
        out = adjust_brightness(
            out, rng.uniform(1.0 - spec.brightness, 1.0 + spec.brightness));
        break;
      case 1:
        out = adjust_contrast(
            out, rng.uniform(1.0 - spec.contrast, 1.0 + spec.contrast));
        break;
      case 2:
        out = adjust_saturation(
            out, rng.uniform(1.0 - spec.saturation, 1.0 + spec.saturation));
        break;
      default:
        out = adjust_hue(out, rng.uniform(-spec.hue, spec.hue));
        break;
    }
  }
  return out;
}

Tensor augment_once(const Tensor& image, const AugmentSpec& spec, Rng& rng) {
  Tensor out = image;
  if (spec.crop.enabled) out = random_resized_crop(out, spec.crop, rng);
  if (spec.hflip.enabled && rng.uniform() < spec.hflip.prob) out = hflip(out);
  if (spec.jitter.enabled && rng.uniform() < spec.jitter.prob)
    out = apply_jitter(out, spec.jitter, rng);
  if (spec.grayscale.enabled && rng.uniform() < spec.grayscale.prob)
    out = grayscale(out);
  if (spec.blur.enabled && rng.uniform() < spec.blur.prob)
    out = gaussian_blur(out, rng.uniform(spec.blur.sigma_lo, spec.blur.sigma_hi));
  return Tensor::from_data(out.shape(), clamp01(out.data()));
}

}  // namespace

std::pair<Tensor, Tensor> two_views(const Tensor& image,
                                    const AugmentSpec& spec, Rng& rng) {
  spec.validate();
  const Dims d = check_image("two_views", image);
  if (d.h < 2 || d.w < 2) {
    throw Error(ErrorKind::Value,
                "two_views: image sides must be at least 2 pixels");
  }
  Tensor v1 = augment_once(image, spec, rng);
  Tensor v2 = augment_once(image, spec, rng);
  return {std::move(v1), std::move(v2)};
}

Tensor eval_transform(const Tensor& image, std::size_t out_h,
                      std::size_t out_w) {
  const Dims d = check_image("eval_transform", image);
  const std::size_t target = std::min(out_h, out_w);
  if (target == 0) {
    throw Error(ErrorKind::Value, "eval_transform: zero output size");
  }

  std::size_t new_h = d.h, new_w = d.w;
  if (std::min(d.h, d.w) != target) {
    const double scale =
        static_cast<double>(target) / static_cast<double>(std::min(d.h, d.w));
    if (d.h <= d.w) {
      new_h = target;
      new_w = static_cast<std::size_t>(
          std::lround(static_cast<double>(d.w) * scale));
    } else {
      new_w = target;
      new_h = static_cast<std::size_t>(
          std::lround(static_cast<double>(d.h) * scale));
    }
  }
  if (new_h < out_h || new_w < out_w) {
    throw Error(ErrorKind::Value,
                "eval_transform: requested crop " + std::to_string(out_h) +
                    "x" + std::to_string(out_w) +
                    " exceeds resized image " + std::to_string(new_h) + "x" +
                    std::to_string(new_w));
  }
  Tensor resized = bilinear_resize(image, new_h, new_w);
  const std::size_t top = (new_h - out_h) / 2;
  const std::size_t left = (new_w - out_w) / 2;
  return crop_region(resized, top, left, out_h, out_w);
}

}  // namespace augment
}  // namespace condiv
