#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "crpn/geometry.hpp"
#include "crpn/tensor.hpp"

namespace crpn {

/// Raw corner score maps: one (K+1)-channel logit tensor per corner role.
/// Channel 0 is background; channels 1..K are direction bins toward the
/// diagonal partner. stride converts image pixels to map cells.
struct CornerScoreMaps {
  std::array<Tensor, 4> maps;
  int bins = 24;     // K
  double stride = 8.0;

  std::size_t height() const { return maps[0].height(); }
  std::size_t width() const { return maps[0].width(); }

  const Tensor& map(Corner c) const { return maps[static_cast<int>(c)]; }
  Tensor& map(Corner c) { return maps[static_cast<int>(c)]; }

  /// Throws DataError unless all four tensors share H, W and K+1 channels.
  void validate() const;
};

/// A scored corner detection on the map grid.
struct CornerCandidate {
  Corner type = Corner::TopLeft;
  int cx = 0;            // map cell column
  int cy = 0;            // map cell row
  double prob = 0.0;     // P_i at the cell, in (0, 1]
  int link_dir = 1;      // predicted direction bin toward the partner, 1..K
};

/// Ground-truth labels: per corner role, an H x W map of values in {0..K}
/// (0 = background, k = direction bin of the corner toward its partner).
struct GtCornerLabels {
  std::array<std::vector<int>, 4> labels;
  std::size_t height = 0;
  std::size_t width = 0;
  int bins = 24;
  double stride = 8.0;

  int at(Corner c, std::size_t y, std::size_t x) const {
    return labels[static_cast<int>(c)][y * width + x];
  }
  int& at(Corner c, std::size_t y, std::size_t x) {
    return labels[static_cast<int>(c)][y * width + x];
  }
};

/// Nearest map cell for an image coordinate: cells are centered at
/// (cell + 0.5) * stride, so this is lround(x / stride - 0.5).
int cell_of(double image_coord, double stride);

/// Center of a map cell in image coordinates: (cell + 0.5) * stride.
double image_of_cell(int cell, double stride);

/// Image-coordinate position of a candidate (its cell center).
Point candidate_image_point(const CornerCandidate& cand, double stride);

/// P_i(x, y) = sum over direction channels of the per-pixel softmax,
/// i.e. 1 - P(background). Returned as a 1 x H x W tensor.
Tensor corner_probability(const CornerScoreMaps& m, Corner type);

/// Argmax over direction channels (1..K) of the softmax at a cell; ties break
/// toward the smaller bin. Throws std::out_of_range for bad cells.
int predicted_link_direction(const CornerScoreMaps& m, Corner type, int cx, int cy);

/// Corner candidates of one role: cells with P_i > threshold, visited in
/// descending probability; a cell within Chebyshev distance <= radius of an
/// already kept one is rejected; at most max_count kept.
std::vector<CornerCandidate> extract_candidates(const CornerScoreMaps& m, Corner type,
                                                double threshold, int max_count,
                                                int radius);

/// Rasterizes ground-truth quads into label maps: each in-bounds corner paints
/// its direction bin at the nearest cell; out-of-bounds corners are skipped;
/// later quads overwrite earlier ones on collision.
GtCornerLabels render_gt_corner_maps(const std::vector<Quad>& quads, std::size_t height,
                                     std::size_t width, int bins, double stride);

/// Synthesizes idealized logit maps from labels: labeled cells carry
/// `sharpness` on their direction channel, background cells carry it on
/// channel 0, everything else is 0.
CornerScoreMaps ideal_score_maps(const GtCornerLabels& gt, double sharpness);

/// On-disk convention: prefix.tl/.tr/.br/.bl CRPN tensors plus a JSON sidecar
/// prefix.json holding {"K": bins, "stride": stride}.
void save_corner_maps(const CornerScoreMaps& m, const std::filesystem::path& prefix);
CornerScoreMaps load_corner_maps(const std::filesystem::path& prefix);

}  // namespace crpn
