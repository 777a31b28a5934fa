#include "crpn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "crpn/error.hpp"
#include "crpn/rng.hpp"

namespace crpn {

namespace {

constexpr int kPlacementRetries = 1000;

double snap_to_cell_center(double coord, double stride) {
  const double cell = std::lround(coord / stride - 0.5);
  return (cell + 0.5) * stride;
}

Point snap_point(Point p, double stride) {
  return {snap_to_cell_center(p.x, stride), snap_to_cell_center(p.y, stride)};
}

bool in_bounds(Point p, const SceneSpec& spec) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < spec.image_w && p.y < spec.image_h;
}

/// Same-role corners of two instances must stay more than the suppression
/// radius apart (3 cells) or extraction cannot keep both.
bool corners_well_separated(const Quad& a, const Quad& b, double stride) {
  for (int i = 0; i < 4; ++i) {
    const Point pa = a.vertices()[i];
    const Point pb = b.vertices()[i];
    const double cheb = std::max(std::abs(pa.x - pb.x), std::abs(pa.y - pb.y));
    if (cheb < 3.0 * stride) return false;
  }
  return true;
}

}  // namespace

SceneGenResult generate_scene(const SceneSpec& spec) {
  if (spec.instances < 0) throw std::invalid_argument("generate_scene: instances >= 0");
  if (spec.size_min <= 0.0 || spec.size_max < spec.size_min) {
    throw std::invalid_argument("generate_scene: bad size range");
  }
  if (spec.aspect_min < 1.0 || spec.aspect_max < spec.aspect_min) {
    throw std::invalid_argument("generate_scene: bad aspect range");
  }
  if (spec.min_separation < 3.0 * spec.stride) {
    throw std::invalid_argument("generate_scene: min separation below 3*stride");
  }

  Rng rng(spec.seed);
  SceneGenResult result;
  std::vector<Point> centers;

  for (int inst = 0; inst < spec.instances; ++inst) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      const double short_side = rng.uniform(spec.size_min, spec.size_max);
      const double aspect = rng.uniform(spec.aspect_min, spec.aspect_max);
      const double w = short_side * aspect;
      const double h = short_side;
      const double angle =
          rng.uniform(spec.angle_min, spec.angle_max) * std::numbers::pi / 180.0;
      const double margin = 0.5 * std::hypot(w, h) + spec.stride;
      if (2.0 * margin >= spec.image_w || 2.0 * margin >= spec.image_h) continue;
      const Point center{rng.uniform(margin, spec.image_w - margin),
                         rng.uniform(margin, spec.image_h - margin)};

      const double cos_a = std::cos(angle);
      const double sin_a = std::sin(angle);
      auto corner = [&](double dx, double dy) -> Point {
        return {center.x + dx * cos_a - dy * sin_a, center.y + dx * sin_a + dy * cos_a};
      };
      Point tl = corner(-w / 2, -h / 2);
      Point tr = corner(w / 2, -h / 2);
      Point br = corner(w / 2, h / 2);
      Point bl = corner(-w / 2, h / 2);

      if (spec.vertex_jitter > 0.0) {
        const double j = spec.vertex_jitter * short_side;
        for (Point* p : {&tl, &tr, &br, &bl}) {
          p->x += rng.uniform(-j, j);
          p->y += rng.uniform(-j, j);
        }
      }
      if (spec.snap_to_grid) {
        // Snap three corners to cell centers and derive the fourth, keeping
        // the instance an exact parallelogram on the lattice.
        tl = snap_point(tl, spec.stride);
        tr = snap_point(tr, spec.stride);
        bl = snap_point(bl, spec.stride);
        br = tr + bl - tl;
      }

      if (!in_bounds(tl, spec) || !in_bounds(tr, spec) || !in_bounds(br, spec) ||
          !in_bounds(bl, spec)) {
        continue;
      }
      const auto quad = Quad::make(tl, tr, br, bl);
      if (!quad) continue;

      bool clash = false;
      for (std::size_t k = 0; k < result.quads.size(); ++k) {
        const double dist = std::hypot(center.x - centers[k].x, center.y - centers[k].y);
        if (dist < spec.min_separation || quad_iou(*quad, result.quads[k]) > 0.0 ||
            !corners_well_separated(*quad, result.quads[k], spec.stride)) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      result.quads.push_back(*quad);
      centers.push_back(center);
      placed = true;
    }
    if (!placed) {
      result.complete = false;
      break;
    }
  }
  return result;
}

CornerScoreMaps scene_to_maps(const std::vector<Quad>& quads, const SceneSpec& spec,
                              int bins, double stride, double sharpness) {
  const std::size_t map_h = static_cast<std::size_t>(
      std::ceil(static_cast<double>(spec.image_h) / stride));
  const std::size_t map_w = static_cast<std::size_t>(
      std::ceil(static_cast<double>(spec.image_w) / stride));

  const GtCornerLabels gt = render_gt_corner_maps(quads, map_h, map_w, bins, stride);
  CornerScoreMaps maps = ideal_score_maps(gt, sharpness);

  // Separate noise stream so scene placement stays comparable across noise
  // settings for the same seed.
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ull);

  if (spec.logit_sigma > 0.0) {
    for (Tensor& t : maps.maps) {
      for (double& v : t.data()) v += rng.normal(0.0, spec.logit_sigma);
    }
  }

  for (int s = 0; s < spec.spurious_corners; ++s) {
    const int type = static_cast<int>(rng.below(4));
    // Find a background cell of that role.
    int cx = 0, cy = 0;
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
      cx = static_cast<int>(rng.below(map_w));
      cy = static_cast<int>(rng.below(map_h));
      found = gt.labels[type][static_cast<std::size_t>(cy) * map_w + cx] == 0;
    }
    if (!found) continue;
    const int dir = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(bins)));
    // Varied strength: weak fakes stay below the test threshold, strong ones
    // sail past it, so candidate counts respond smoothly to T.
    const double strength = sharpness * rng.uniform(0.8, 1.6);
    maps.maps[type].at(static_cast<std::size_t>(dir), static_cast<std::size_t>(cy),
                       static_cast<std::size_t>(cx)) = strength;
  }
  return maps;
}

}  // namespace crpn
