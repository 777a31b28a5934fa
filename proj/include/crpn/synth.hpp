#pragma once

#include <cstdint>
#include <vector>

#include "crpn/cornermap.hpp"
#include "crpn/geometry.hpp"

namespace crpn {

/// Parameters for the synthetic scene generator.
struct SceneSpec {
  int image_w = 512;
  int image_h = 512;
  int instances = 5;
  double size_min = 40.0;    // short side, px
  double size_max = 72.0;
  double aspect_min = 1.5;   // long/short ratio
  double aspect_max = 3.0;
  double angle_min = -45.0;  // degrees
  double angle_max = 45.0;
  double min_separation = 120.0;  // center-to-center, px
  std::uint64_t seed = 0;

  double stride = 8.0;
  /// Snap corners to the lattice of cell centers so the map rendering is an
  /// exact inverse of candidate extraction. tl/tr/bl move at most half a
  /// cell; br is derived, keeping each instance an exact parallelogram.
  bool snap_to_grid = true;
  /// Extra random vertex displacement (fraction of the short side, 0..~0.1);
  /// applied before snapping, convexity re-checked.
  double vertex_jitter = 0.0;

  // Map-synthesis noise.
  double logit_sigma = 0.0;     // additive Gaussian jitter on all logits
  int spurious_corners = 0;     // fake one-hot corners per scene
};

struct SceneGenResult {
  std::vector<Quad> quads;
  /// False when placement retries ran out and fewer instances were emitted.
  bool complete = true;
};

/// Places `instances` parallelograms by rejection sampling: pairwise center
/// separation >= min_separation, zero mutual overlap, same-role corners at
/// least 3 cells apart, all corners in bounds. Deterministic under seed.
SceneGenResult generate_scene(const SceneSpec& spec);

/// Renders ground truth labels and idealized logit maps for the scene, then
/// applies the spec's noise: Gaussian logit jitter and spurious corners at
/// random background cells with random direction bins and varied strength.
CornerScoreMaps scene_to_maps(const std::vector<Quad>& quads, const SceneSpec& spec,
                              int bins, double stride, double sharpness);

}  // namespace crpn
