#include "crpn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "crpn/error.hpp"

namespace crpn {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'P', 'N'};
constexpr std::uint32_t kFormatVersion = 1;
// Header: magic(4) + version(4) + C,H,W (4 each).
constexpr std::size_t kHeaderBytes = 20;
constexpr std::uint64_t kMaxElements = 1ull << 31;

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

float f32_from_le(const unsigned char* p) {
  std::uint32_t bits = read_u32_le(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

void f32_to_le(float f, unsigned char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  write_u32_le(bits, p);
}

}  // namespace

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width)
    : channels_(channels), height_(height), width_(width) {
  if (channels == 0 || height == 0 || width == 0) {
    throw std::invalid_argument("Tensor dimensions must be positive");
  }
  data_.assign(channels * height * width, 0.0);
}

Tensor Tensor::filled(std::size_t channels, std::size_t height, std::size_t width,
                      double value) {
  Tensor t(channels, height, width);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path.string());

  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  if (static_cast<std::size_t>(in.gcount()) != kHeaderBytes) {
    throw FormatError("truncated tensor header in " + path.string(),
                      static_cast<std::size_t>(in.gcount()));
  }
  if (std::memcmp(header, kMagic, 4) != 0) {
    throw FormatError("bad magic in " + path.string(), 0);
  }
  const std::uint32_t version = read_u32_le(header + 4);
  if (version != kFormatVersion) {
    throw FormatError("unsupported tensor format version " + std::to_string(version), 4);
  }
  const std::uint32_t c = read_u32_le(header + 8);
  const std::uint32_t h = read_u32_le(header + 12);
  const std::uint32_t w = read_u32_le(header + 16);
  if (c == 0) throw FormatError("zero channel count", 8);
  if (h == 0) throw FormatError("zero height", 12);
  if (w == 0) throw FormatError("zero width", 16);
  const std::uint64_t count =
      static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(h) *
      static_cast<std::uint64_t>(w);
  if (count > kMaxElements) throw FormatError("tensor dimensions overflow", 8);

  Tensor t(c, h, w);
  std::vector<unsigned char> payload(count * 4);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw FormatError("truncated tensor payload in " + path.string(),
                      kHeaderBytes + static_cast<std::size_t>(in.gcount()));
  }
  // Reject trailing bytes so files are exactly what write_tensor emits.
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) {
    throw FormatError("trailing bytes after tensor payload in " + path.string(),
                      kHeaderBytes + payload.size());
  }

  for (std::uint64_t i = 0; i < count; ++i) {
    const float f = f32_from_le(payload.data() + i * 4);
    if (!std::isfinite(f)) {
      throw FormatError("non-finite value in tensor payload",
                        kHeaderBytes + static_cast<std::size_t>(i) * 4);
    }
    t.data()[i] = static_cast<double>(f);
  }
  return t;
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  if (t.size() == 0) throw std::invalid_argument("cannot write an empty tensor");
  if (!t.all_finite()) throw std::invalid_argument("cannot write non-finite tensor");
  if (t.channels() > std::numeric_limits<std::uint32_t>::max() ||
      t.height() > std::numeric_limits<std::uint32_t>::max() ||
      t.width() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("tensor dimensions exceed format limits");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open tensor file for writing: " + path.string());

  unsigned char header[kHeaderBytes];
  std::memcpy(header, kMagic, 4);
  write_u32_le(kFormatVersion, header + 4);
  write_u32_le(static_cast<std::uint32_t>(t.channels()), header + 8);
  write_u32_le(static_cast<std::uint32_t>(t.height()), header + 12);
  write_u32_le(static_cast<std::uint32_t>(t.width()), header + 16);
  out.write(reinterpret_cast<const char*>(header), kHeaderBytes);

  std::vector<unsigned char> payload(t.size() * 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    f32_to_le(static_cast<float>(t.data()[i]), payload.data() + i * 4);
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor channel_softmax(const Tensor& t) {
  if (t.channels() < 1) throw std::invalid_argument("softmax needs channels >= 1");
  Tensor out(t.channels(), t.height(), t.width());
  const std::size_t plane = t.height() * t.width();
  for (std::size_t p = 0; p < plane; ++p) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < t.channels(); ++c) {
      max_logit = std::max(max_logit, t.data()[c * plane + p]);
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < t.channels(); ++c) {
      denom += std::exp(t.data()[c * plane + p] - max_logit);
    }
    for (std::size_t c = 0; c < t.channels(); ++c) {
      out.data()[c * plane + p] = std::exp(t.data()[c * plane + p] - max_logit) / denom;
    }
  }
  return out;
}

}  // namespace crpn
