#include "condiv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace condiv {
namespace data {

std::size_t Dataset::num_classes() const {
  std::uint32_t top = 0;
  for (std::uint32_t label : labels) top = std::max(top, label);
  return labels.empty() ? 0 : static_cast<std::size_t>(top) + 1;
}

Tensor Dataset::sample(std::size_t i) const {
  const std::size_t per = sample_numel();
  std::vector<double> values(pixels.begin() + i * per,
                             pixels.begin() + (i + 1) * per);
  return Tensor::from_data({channels, height, width}, std::move(values));
}

void Dataset::validate() const {
  if (sample_numel() == 0) {
    throw Error(ErrorKind::Value, "dataset: zero-sized samples");
  }
  if (pixels.size() % sample_numel() != 0) {
    throw Error(ErrorKind::Value, "dataset: pixel buffer not a whole number "
                                  "of samples");
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::Value, "dataset: pixel value outside [0,1]");
    }
  }
  if (!labels.empty() && labels.size() != size()) {
    throw Error(ErrorKind::Value, "dataset: label count does not match "
                                  "sample count");
  }
}

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

std::vector<std::vector<double>> default_cluster_means(std::size_t k,
                                                       std::size_t dim) {
  if (dim < 2) {
    throw Error(ErrorKind::Value, "default cluster means require dim >= 2");
  }
  std::vector<std::vector<double>> means(k, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const double angle =
        6.283185307179586 * static_cast<double>(i) / static_cast<double>(k);
    means[i][0] = 2.0 * std::cos(angle);
    means[i][1] = 2.0 * std::sin(angle);
  }
  return means;
}

Dataset gen_gaussian_clusters(std::size_t k, std::size_t n_per,
                              std::size_t dim,
                              const std::vector<std::vector<double>>& means,
                              double stddev, Rng& rng) {
  if (k < 2) {
    throw Error(ErrorKind::Value, "gen_gaussian_clusters: k must be >= 2");
  }
  if (!(stddev > 0.0)) {
    throw Error(ErrorKind::Value, "gen_gaussian_clusters: stddev must be > 0");
  }
  if (means.size() != k) {
    throw Error(ErrorKind::Value, "gen_gaussian_clusters: need one mean per "
                                  "cluster");
  }
  for (const auto& m : means) {
    if (m.size() != dim) {
      throw Error(ErrorKind::Value,
                  "gen_gaussian_clusters: mean dimension mismatch");
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (means[a] == means[b]) {
        throw Error(ErrorKind::Value,
                    "gen_gaussian_clusters: duplicate cluster means");
      }
    }
  }

  const std::size_t n = k * n_per;
  std::vector<double> raw(n * dim);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t s = 0; s < n_per; ++s) {
      const std::size_t idx = c * n_per + s;
      labels[idx] = static_cast<std::uint32_t>(c);
      for (std::size_t j = 0; j < dim; ++j)
        raw[idx * dim + j] = rng.normal(means[c][j], stddev);
    }
  }

  double lo = raw.empty() ? 0.0 : raw[0], hi = lo;
  for (double v : raw) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    throw Error(ErrorKind::Value, "gen_gaussian_clusters: degenerate value "
                                  "range");
  }
  for (double& v : raw) v = to_f32((v - lo) / (hi - lo));

  Dataset ds;
  ds.name = "gaussian-clusters";
  ds.channels = 1;
  ds.height = 1;
  ds.width = dim;
  ds.pixels = std::move(raw);
  ds.labels = std::move(labels);
  ds.metadata["affine_lo"] = std::to_string(lo);
  ds.metadata["affine_hi"] = std::to_string(hi);
  ds.validate();
  return ds;
}

Dataset gen_toy_shapes(std::size_t n, Rng& rng) {
  constexpr std::size_t kSide = 16;
  Dataset ds;
  ds.name = "toy-shapes";
  ds.channels = 3;
  ds.height = kSide;
  ds.width = kSide;
  ds.pixels.assign(n * 3 * kSide * kSide, 0.0);
  ds.labels.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t cls = static_cast<std::uint32_t>(i % 3);
    ds.labels[i] = cls;
    double fg[3], bg[3];
    for (double& v : bg) v = to_f32(rng.uniform(0.0, 0.35));
    for (double& v : fg) v = to_f32(rng.uniform(0.55, 1.0));

    const double cx = rng.uniform(5.0, 11.0);
    const double cy = rng.uniform(5.0, 11.0);
    const double half = rng.uniform(2.5, 5.0);
    const bool vertical = rng.uniform() < 0.5;
    const double thickness = rng.uniform(1.5, 3.0);

    double* base = ds.pixels.data() + i * 3 * kSide * kSide;
    for (std::size_t y = 0; y < kSide; ++y) {
      for (std::size_t x = 0; x < kSide; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        bool inside = false;
        switch (cls) {
          case 0:  // square
            inside = std::fabs(dx) <= half && std::fabs(dy) <= half;
            break;
          case 1:  // circle
            inside = dx * dx + dy * dy <= half * half;
            break;
          default:  // bar
            inside = vertical ? std::fabs(dx) <= thickness
                              : std::fabs(dy) <= thickness;
            break;
        }
        for (std::size_t c = 0; c < 3; ++c)
          base[(c * kSide + y) * kSide + x] = inside ? fg[c] : bg[c];
      }
    }
  }
  ds.validate();
  return ds;
}

namespace {

constexpr char kMagic[4] = {'C', 'D', 'L', '1'};
constexpr std::uint8_t kDtypeF32 = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::string& bytes;
  std::size_t offset = 0;

  void need(std::size_t count, const char* what) const {
    if (offset + count > bytes.size()) {
      throw Error(ErrorKind::Io,
                  std::string("CDL1: truncated ") + what + " at byte offset " +
                      std::to_string(offset) + " (file has " +
                      std::to_string(bytes.size()) + " bytes)");
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes[offset++]);
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(
               bytes[offset + i]))
           << (8 * i);
    offset += 4;
    return v;
  }

  float f32(const char* what) {
    const std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

void write_dataset(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  const std::size_t n = dataset.size();

  std::string out;
  out.reserve(18 + dataset.pixels.size() * 4 + dataset.labels.size() * 4);
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, static_cast<std::uint32_t>(dataset.channels));
  put_u32(out, static_cast<std::uint32_t>(dataset.height));
  put_u32(out, static_cast<std::uint32_t>(dataset.width));
  out.push_back(dataset.labeled() ? 1 : 0);
  out.push_back(static_cast<char>(kDtypeF32));
  for (double v : dataset.pixels) put_f32(out, static_cast<float>(v));
  if (dataset.labeled()) {
    for (std::uint32_t label : dataset.labels) put_u32(out, label);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw Error(ErrorKind::Io, "short write: " + path);
  }
}

Dataset read_dataset(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw Error(ErrorKind::Io, "cannot open: " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());

  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::Io, "CDL1: bad magic at byte offset 0");
  }
  r.offset = 4;
  const std::uint32_t n = r.u32("sample count");
  const std::uint32_t c = r.u32("channel count");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  const std::uint8_t has_labels = r.u8("label flag");
  const std::uint8_t dtype = r.u8("dtype tag");
  if (has_labels > 1) {
    throw Error(ErrorKind::Io, "CDL1: invalid label flag at byte offset 16");
  }
  if (dtype != kDtypeF32) {
    throw Error(ErrorKind::Io, "CDL1: unsupported dtype tag " +
                                   std::to_string(dtype) +
                                   " at byte offset 17");
  }
  if (c == 0 || h == 0 || w == 0) {
    throw Error(ErrorKind::Io, "CDL1: zero-sized sample dimensions");
  }

  Dataset ds;
  ds.channels = c;
  ds.height = h;
  ds.width = w;
  const std::size_t count =
      static_cast<std::size_t>(n) * c * static_cast<std::size_t>(h) * w;
  ds.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    ds.pixels[i] = static_cast<double>(r.f32("pixel payload"));
  if (has_labels) {
    ds.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::size_t label_offset = r.offset;
      const std::uint32_t label = r.u32("label payload");
      // Class ids beyond 2^24 only arise from corruption.
      if (label > (1u << 24)) {
        throw Error(ErrorKind::Io,
                    "CDL1: label out of range at byte offset " +
                        std::to_string(label_offset));
      }
      ds.labels[i] = label;
    }
  }
  if (r.offset != bytes.size()) {
    throw Error(ErrorKind::Io,
                "CDL1: trailing bytes at offset " + std::to_string(r.offset));
  }
  ds.validate();
  return ds;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n,
                                                    const BatchPlan& plan,
                                                    std::size_t epoch) {
  if (plan.batch_size == 0) {
    throw Error(ErrorKind::Value, "epoch_batches: batch_size must be >= 1");
  }
  if (plan.drop_last && plan.batch_size > n) {
    throw Error(ErrorKind::Value,
                "epoch_batches: batch_size " + std::to_string(plan.batch_size) +
                    " exceeds dataset size " + std::to_string(n) +
                    " with drop_last");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(plan.seed, /*tag=*/0x6261746368ull, epoch);  // "batch"
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start + plan.batch_size <= n;
       start += plan.batch_size) {
    batches.emplace_back(order.begin() + start,
                         order.begin() + start + plan.batch_size);
  }
  if (!plan.drop_last && n % plan.batch_size != 0) {
    batches.emplace_back(order.begin() + (n - n % plan.batch_size),
                         order.end());
  }
  return batches;
}

}  // namespace data
}  // namespace condiv
