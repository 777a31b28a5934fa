#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "crpn/cornermap.hpp"
#include "crpn/geometry.hpp"

namespace crpn {

/// One sampled pixel for the segmentation loss: position, its (K+1)-vector of
/// logits and the ground-truth class z in {0..K}.
struct SegSample {
  int x = 0;
  int y = 0;
  std::vector<double> logits;
  int label = 0;
};

/// Mini-batch for one corner role.
struct SegBatch {
  Corner type = Corner::TopLeft;
  std::vector<SegSample> samples;
};

/// Per-class weights: all direction classes share w_corner, background gets
/// w_background.
struct BalancedWeights {
  double w_background = 0.0;
  double w_corner = 0.0;
};

struct SegLossResult {
  double loss = 0.0;
  /// d(loss)/d(logit), same shape as the batches' logit vectors.
  std::array<std::vector<std::vector<double>>, 4> grads;
};

struct ScalarLoss {
  double loss = 0.0;
  double grad = 0.0;
};

/// Eight normalized corner offsets (x then y for tl, tr, br, bl).
using RegressionTuple = std::array<double, 8>;

struct LocLossResult {
  double loss = 0.0;
  RegressionTuple grad{};  // d(loss)/d(t)
};

struct LossWeights {
  double seg = 1.0;
  double cls = 1.0;
  double loc = 1.0;
};

/// Samples up to size/2 positive pixels (label > 0) uniformly without
/// replacement, padding the batch with uniformly sampled negatives.
/// Deterministic for a given seed. Logit vectors are zero-filled; use
/// fill_logits_from_maps or fill in synthetic values.
SegBatch sample_seg_batch(const GtCornerLabels& gt, Corner type, int size,
                          std::uint64_t seed);

/// Copies the (K+1) logits at each sample position from the score maps.
void fill_logits_from_maps(SegBatch& batch, const CornerScoreMaps& maps);

/// w_corner = (#negatives)/|S|, w_background = (#positives)/|S|.
BalancedWeights balanced_weights(const SegBatch& batch);

/// Weighted softmax cross-entropy over the four role batches:
/// sum_i -(1/|S_i|) sum_m w_i^{z} log softmax(logits_m)[z], with analytic
/// gradients. Log arguments are clamped at 1e-12.
SegLossResult seg_loss(const std::array<SegBatch, 4>& batches);

/// Binary cross-entropy -[y log p + (1-y) log(1-p)] with dL/dp; p clamped to
/// [1e-12, 1-1e-12].
ScalarLoss cls_loss(double p, int y);

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise; value and derivative.
ScalarLoss smooth_l1(double x);

/// Normalized offsets from proposal corners to ground-truth corners:
/// t_x = (x - x*) / w, t_y = (y - y*) / h with (w, h) the proposal's
/// axis-aligned bounding-box extents. Throws DataError on zero extent.
RegressionTuple encode_targets(const Quad& proposal, const Quad& gt);

/// Inverse of encode_targets: recovers ground-truth corner points from offsets
/// (tl, tr, br, bl order).
std::array<Point, 4> decode_targets(const Quad& proposal, const RegressionTuple& t);

/// Sum of smooth_l1 over the eight component differences, with gradient
/// with respect to t.
LocLossResult loc_loss(const RegressionTuple& t, const RegressionTuple& t_star);

/// lambda_seg * seg + lambda_cls * cls + lambda_loc * loc.
double total_loss(double seg, double cls, double loc, const LossWeights& w = {});

/// Index of the ground truth with maximal quad_iou against the proposal;
/// nullopt when gts is empty; ties break toward the lowest index.
std::optional<std::size_t> match_gt(const Quad& proposal, const std::vector<Quad>& gts);

}  // namespace crpn
