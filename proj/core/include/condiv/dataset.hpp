#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "condiv/rng.hpp"
#include "condiv/tensor.hpp"

namespace condiv {
namespace data {

// In-memory dataset of n images (C,H,W) in [0,1], optionally labeled.
// Vector datasets use C=H=1, W=d. Pixel values are stored as doubles but
// are always exactly representable in f32, which is what makes the on-disk
// round trip bit-exact.
struct Dataset {
  std::string name;
  std::size_t channels = 1, height = 1, width = 1;
  std::vector<double> pixels;           // n * C * H * W, row-major
  std::vector<std::uint32_t> labels;    // empty when unlabeled
  std::map<std::string, std::string> metadata;

  std::size_t size() const {
    const std::size_t per = sample_numel();
    return per == 0 ? 0 : pixels.size() / per;
  }
  std::size_t sample_numel() const { return channels * height * width; }
  bool labeled() const { return !labels.empty(); }
  std::size_t num_classes() const;
  bool is_vector_data() const { return height < 2 || width < 2; }

  // Copy of sample i as a (C,H,W) tensor.
  Tensor sample(std::size_t i) const;

  void validate() const;
};

// k gaussian blobs with the given means (k rows of `dim` values) and shared
// isotropic stddev, labeled by blob. All coordinates are rescaled into [0,1]
// by one global affine map, recorded in metadata as affine_lo/affine_hi so
// the original geometry is recoverable (raw = lo + v * (hi - lo)).
Dataset gen_gaussian_clusters(std::size_t k, std::size_t n_per,
                              std::size_t dim,
                              const std::vector<std::vector<double>>& means,
                              double stddev, Rng& rng);

// Evenly spaced default means on a radius-2 ring in the first two
// coordinates (zeros elsewhere); requires dim >= 2.
std::vector<std::vector<double>> default_cluster_means(std::size_t k,
                                                       std::size_t dim);

// 3x16x16 images of one filled shape each (class 0 square, 1 circle,
// 2 bar) with random geometry and colors; classes cycle so the dataset is
// balanced.
Dataset gen_toy_shapes(std::size_t n, Rng& rng);

// "CDL1" little-endian container: magic, u32 n/C/H/W, u8 has_labels,
// u8 dtype (1 = f32), f32 pixels, then u32 labels when labeled.
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);

struct BatchPlan {
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  bool drop_last = true;
};

// Deterministic function of (seed, epoch): one shuffled permutation of
// [0,n) chunked into batches. With drop_last the trailing partial batch is
// discarded (an error if not even one full batch fits).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n,
                                                    const BatchPlan& plan,
                                                    std::size_t epoch);

}  // namespace data
}  // namespace condiv
