#include "condiv/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace condiv {
namespace io {

namespace {

constexpr char kMagic[4] = {'C', 'D', 'C', '1'};
constexpr std::uint8_t kDtypeF64 = 2;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& bytes;
  std::size_t offset = 0;

  void need(std::size_t count, const char* what) const {
    if (offset + count > bytes.size()) {
      throw Error(ErrorKind::Io,
                  std::string("CDC1: truncated ") + what + " at byte offset " +
                      std::to_string(offset));
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
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes[offset + i]))
           << (8 * i);
    offset += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[offset + i]))
              << (8 * i);
    offset += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

void write_sections(const std::string& path,
                    const std::vector<Section>& sections) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(sections.size()));
  for (const Section& s : sections) {
    if (shape_numel(s.shape) != s.values.size()) {
      throw Error(ErrorKind::State,
                  "section " + s.name + ": shape does not match payload");
    }
    put_u32(out, static_cast<std::uint32_t>(s.name.size()));
    out.append(s.name);
    out.push_back(static_cast<char>(kDtypeF64));
    out.push_back(static_cast<char>(s.shape.size()));
    for (std::size_t d : s.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : s.values) put_f64(out, v);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorKind::Io, "short write: " + path);
}

std::vector<Section> read_sections(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());

  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::Io, "CDC1: bad magic at byte offset 0");
  }
  r.offset = 4;
  const std::uint32_t count = r.u32("section count");
  std::vector<Section> sections(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Section& s = sections[i];
    const std::uint32_t name_len = r.u32("section name length");
    r.need(name_len, "section name");
    s.name.assign(bytes, r.offset, name_len);
    r.offset += name_len;
    const std::uint8_t dtype = r.u8("dtype tag");
    if (dtype != kDtypeF64) {
      throw Error(ErrorKind::Io, "CDC1: unsupported dtype tag in section " +
                                     s.name);
    }
    const std::uint8_t ndim = r.u8("rank");
    s.shape.resize(ndim);
    for (std::uint8_t d = 0; d < ndim; ++d) s.shape[d] = r.u32("dimension");
    const std::size_t numel = shape_numel(s.shape);
    s.values.resize(numel);
    for (std::size_t j = 0; j < numel; ++j) s.values[j] = r.f64("payload");
  }
  if (r.offset != bytes.size()) {
    throw Error(ErrorKind::Io,
                "CDC1: trailing bytes at offset " + std::to_string(r.offset));
  }
  return sections;
}

const Section* find_section_opt(const std::vector<Section>& sections,
                                const std::string& name) {
  for (const Section& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const Section& find_section(const std::vector<Section>& sections,
                            const std::string& name) {
  const Section* s = find_section_opt(sections, name);
  if (!s) throw Error(ErrorKind::Io, "CDC1: missing section " + name);
  return *s;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
  file.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!file) throw Error(ErrorKind::Io, "short write: " + path);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer.push_back(',');
    buffer.append(cells[i]);
  }
  buffer.push_back('\n');
}

}  // namespace io
}  // namespace condiv
