#pragma once

#include <cstddef>
#include <vector>

#include "crpn/geometry.hpp"
#include "crpn/proposal.hpp"

namespace crpn {

struct EvalMatch {
  std::size_t det = 0;
  std::size_t gt = 0;
  double iou = 0.0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::vector<EvalMatch> matches;
};

/// Greedy one-to-one matching: detections in descending score order each take
/// the unmatched ground truth with the highest quad_iou >= iou_thresh.
/// precision = matches/dets (0 when dets is empty), recall = matches/gts
/// (0 when gts is empty), F = 2PR/(P+R) or 0.
EvalReport evaluate(const std::vector<QuadProposal>& dets, const std::vector<Quad>& gts,
                    double iou_thresh = 0.5);

}  // namespace crpn
