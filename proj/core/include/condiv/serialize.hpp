#pragma once

#include <string>
#include <vector>

#include "condiv/tensor.hpp"

namespace condiv {
namespace io {

// Named-section binary container in the same little-endian style as the
// CDL1 dataset format: magic "CDC1", u32 section count, then per section a
// u32 name length, the name bytes, u8 dtype (2 = f64), u8 ndim, u32 dims,
// and the raw payload. Used for checkpoints and the encoder-only artifact.
struct Section {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

void write_sections(const std::string& path,
                    const std::vector<Section>& sections);
std::vector<Section> read_sections(const std::string& path);

const Section& find_section(const std::vector<Section>& sections,
                            const std::string& name);
const Section* find_section_opt(const std::vector<Section>& sections,
                                const std::string& name);

// Round-trip-exact double formatting ("%.17g"), shared by every CSV and
// text artifact so reruns are byte-identical.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& contents);

struct CsvWriter {
  std::string buffer;

  explicit CsvWriter(const std::string& header) { buffer = header + "\n"; }
  void row(const std::vector<std::string>& cells);
  void save(const std::string& path) const { write_text_file(path, buffer); }
};

}  // namespace io
}  // namespace condiv
