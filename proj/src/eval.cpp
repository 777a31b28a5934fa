#include "crpn/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace crpn {

EvalReport evaluate(const std::vector<QuadProposal>& dets, const std::vector<Quad>& gts,
                    double iou_thresh) {
  if (iou_thresh <= 0.0 || iou_thresh >= 1.0) {
    throw std::invalid_argument("evaluate: iou_thresh must be in (0,1)");
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  EvalReport report;
  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t det_idx : order) {
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g]) continue;
      const double iou = quad_iou(dets[det_idx].quad, gts[g]);
      if (iou >= iou_thresh && iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size()) {
      gt_taken[best_gt] = true;
      report.matches.push_back({det_idx, best_gt, best_iou});
    }
  }

  const double matched = static_cast<double>(report.matches.size());
  report.precision = dets.empty() ? 0.0 : matched / static_cast<double>(dets.size());
  report.recall = gts.empty() ? 0.0 : matched / static_cast<double>(gts.size());
  const double pr = report.precision + report.recall;
  report.f_measure = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

}  // namespace crpn
