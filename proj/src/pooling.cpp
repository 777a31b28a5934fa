#include "crpn/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace crpn {

namespace {

/// Bilinear read with zero padding outside the map.
double sample_bilinear(const Tensor& f, std::size_t channel, double x, double y) {
  const int w = static_cast<int>(f.width());
  const int h = static_cast<int>(f.height());
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int xi, int yi) -> double {
    if (xi < 0 || yi < 0 || xi >= w || yi >= h) return 0.0;
    return f.at(channel, static_cast<std::size_t>(yi), static_cast<std::size_t>(xi));
  };
  return (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
         fy * ((1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
}

double sample_nearest(const Tensor& f, std::size_t channel, double x, double y) {
  const int xi = static_cast<int>(std::lround(x));
  const int yi = static_cast<int>(std::lround(y));
  if (xi < 0 || yi < 0 || xi >= static_cast<int>(f.width()) ||
      yi >= static_cast<int>(f.height())) {
    return 0.0;
  }
  return f.at(channel, static_cast<std::size_t>(yi), static_cast<std::size_t>(xi));
}

}  // namespace

RRoI rroi_from_quad(const Quad& q, double stride) {
  if (stride <= 0.0) throw std::invalid_argument("rroi_from_quad: stride must be positive");
  const RotatedRect rect = min_area_rect(q);
  return RRoI{rect.r / stride, rect.c / stride, rect.h / stride, rect.w / stride,
              rect.theta};
}

PooledGrid rroi_pool(const Tensor& features, const RRoI& roi, std::size_t gh,
                     std::size_t gw, PoolSampling sampling) {
  if (gh < 1 || gw < 1) throw std::invalid_argument("rroi_pool: grid must be >= 1x1");
  if (roi.h <= 0.0 || roi.w <= 0.0) {
    throw std::invalid_argument("rroi_pool: RoI extents must be positive");
  }

  PooledGrid out;
  out.values = Tensor(features.channels(), gh, gw);

  const double rad = roi.theta * std::numbers::pi / 180.0;
  const double cos_t = std::cos(rad);
  const double sin_t = std::sin(rad);
  // Local RoI frame: u along theta (extent w), v perpendicular (extent h).
  auto to_map = [&](double u, double v) -> Point {
    return {roi.c + u * cos_t - v * sin_t, roi.r + u * sin_t + v * cos_t};
  };

  // Quick overlap probe on the RoI's axis-aligned bounds.
  const double reach_x = 0.5 * (std::abs(roi.w * cos_t) + std::abs(roi.h * sin_t));
  const double reach_y = 0.5 * (std::abs(roi.w * sin_t) + std::abs(roi.h * cos_t));
  const bool overlaps = roi.c + reach_x > -0.5 &&
                        roi.c - reach_x < static_cast<double>(features.width()) - 0.5 &&
                        roi.r + reach_y > -0.5 &&
                        roi.r - reach_y < static_cast<double>(features.height()) - 0.5;
  out.roi_overlapped = overlaps;
  if (!overlaps) return out;  // all-zero grid

  const double cell_w = roi.w / static_cast<double>(gw);
  const double cell_h = roi.h / static_cast<double>(gh);
  constexpr int kSamplesPerAxis = 2;

  for (std::size_t c = 0; c < features.channels(); ++c) {
    for (std::size_t i = 0; i < gh; ++i) {
      for (std::size_t j = 0; j < gw; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int sy = 0; sy < kSamplesPerAxis; ++sy) {
          for (int sx = 0; sx < kSamplesPerAxis; ++sx) {
            const double u = -0.5 * roi.w +
                             (static_cast<double>(j) +
                              (sx + 0.5) / kSamplesPerAxis) * cell_w;
            const double v = -0.5 * roi.h +
                             (static_cast<double>(i) +
                              (sy + 0.5) / kSamplesPerAxis) * cell_h;
            const Point p = to_map(u, v);
            const bool inside = p.x >= 0.0 && p.y >= 0.0 &&
                                p.x <= static_cast<double>(features.width()) - 1.0 &&
                                p.y <= static_cast<double>(features.height()) - 1.0;
            double value = 0.0;
            if (inside) {
              value = sampling == PoolSampling::Bilinear
                          ? sample_bilinear(features, c, p.x, p.y)
                          : sample_nearest(features, c, p.x, p.y);
            }
            best = std::max(best, value);
          }
        }
        out.values.at(c, i, j) = best;
      }
    }
  }
  return out;
}

RRoI dual_of(const RRoI& roi) {
  RRoI dual{roi.r, roi.c, roi.w, roi.h, 90.0 - roi.theta};
  if (dual.theta >= 90.0) {
    // (r, c, h, w, 90) describes the same rectangle as (r, c, w, h, 0).
    std::swap(dual.h, dual.w);
    dual.theta = 0.0;
  }
  return dual;
}

PooledGrid dual_rroi_pool(const Tensor& features, const RRoI& roi, std::size_t gh,
                          std::size_t gw, PoolSampling sampling) {
  if (gh != gw) {
    throw std::invalid_argument("dual_rroi_pool: the fused grids must be square (gh == gw)");
  }
  PooledGrid a = rroi_pool(features, roi, gh, gw, sampling);
  const PooledGrid b = rroi_pool(features, dual_of(roi), gh, gw, sampling);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    a.values.data()[i] += b.values.data()[i];
  }
  a.roi_overlapped = a.roi_overlapped || b.roi_overlapped;
  return a;
}

}  // namespace crpn
