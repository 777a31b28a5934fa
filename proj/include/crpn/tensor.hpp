#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace crpn {

/// Dense rank-3 float tensor, laid out channel-major then row-major:
/// index(c, y, x) = (c * height + y) * width + x.
///
/// Values are held as 64-bit doubles in memory; the on-disk format stores
/// 32-bit floats (see read_tensor / write_tensor). Tensors are treated as
/// immutable once filled; all free functions below are pure.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t channels, std::size_t height, std::size_t width);

  static Tensor filled(std::size_t channels, std::size_t height, std::size_t width,
                       double value);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Reads a tensor from the CRPN binary format:
/// magic "CRPN", u32 version (=1), u32 C, u32 H, u32 W (little-endian),
/// then C*H*W float32 little-endian values, channel-major row-major, no padding.
/// Throws FormatError (with byte offset) on malformed input, IoError on I/O failure.
Tensor read_tensor(const std::filesystem::path& path);

/// Writes the CRPN binary format; doubles are rounded to the nearest float32.
void write_tensor(const Tensor& t, const std::filesystem::path& path);

/// Per-pixel softmax across channels, computed with max-subtraction.
/// Output channels sum to 1 at every (y, x).
Tensor channel_softmax(const Tensor& t);

}  // namespace crpn
