#pragma once

#include <cstddef>

#include "crpn/geometry.hpp"
#include "crpn/tensor.hpp"

namespace crpn {

/// Rotated RoI in feature-map coordinates; same five-tuple as RotatedRect.
using RRoI = RotatedRect;

/// Fixed-size grid pooled from a feature map. `values` is channels x gh x gw.
struct PooledGrid {
  Tensor values;
  bool roi_overlapped = true;  // false: the RoI missed the map entirely

  std::size_t channels() const { return values.channels(); }
  std::size_t gh() const { return values.height(); }
  std::size_t gw() const { return values.width(); }
};

enum class PoolSampling {
  Bilinear,  // 2x2 bilinear samples per cell, max over samples (default)
  Nearest,   // nearest-neighbor reads at the same sample points
};

/// Converts an image-space quad to a feature-map RRoI: min_area_rect scaled
/// down by stride. theta stays in [0, 90).
RRoI rroi_from_quad(const Quad& q, double stride);

/// Rotated RoI max pooling. The RoI's h x w window is divided into a gh x gw
/// grid; each cell is sampled at a regular 2x2 sub-grid of points mapped
/// through the rotation about the RoI center, with bilinear interpolation on
/// the feature map; the cell output is the max over samples. Samples falling
/// outside the map read 0.
PooledGrid rroi_pool(const Tensor& features, const RRoI& roi, std::size_t gh,
                     std::size_t gw, PoolSampling sampling = PoolSampling::Bilinear);

/// The paired RoI (r, c, w, h, 90 - theta); theta exactly 90 normalizes back
/// to (r, c, h, w, 0). Involution: dual_of(dual_of(x)) == x.
RRoI dual_of(const RRoI& roi);

/// Element-wise sum of pooling the RoI and its dual. Requires gh == gw (the
/// dual swaps h and w, so only square grids align element-wise).
PooledGrid dual_rroi_pool(const Tensor& features, const RRoI& roi, std::size_t gh,
                          std::size_t gw,
                          PoolSampling sampling = PoolSampling::Bilinear);

}  // namespace crpn
