#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "crpn/cornermap.hpp"
#include "crpn/geometry.hpp"

namespace crpn {

/// A kept linkage between two diagonal-partner candidates (tl-br or tr-bl).
struct DiagonalLink {
  CornerCandidate a;
  CornerCandidate b;
};

/// A scored quadrilateral proposal.
struct QuadProposal {
  Quad quad;
  double score = 0.0;
};

/// Direction-compatibility options for linking.
struct LinkOptions {
  bool mutual = true;    // check the predicted direction at both endpoints
  bool circular = true;  // bin distance on the K-cycle (false: plain |a-b|)
};

/// Pipeline parameters. Defaults: K=24, M=32, T=0.5 (test mode; 0.1 for
/// training-style high recall), NMS IoU 0.7, 200 proposals max.
struct ProposalParams {
  int bins = 24;                 // K
  double threshold = 0.5;        // T
  int max_candidates = 32;       // M
  int suppression_radius = 2;    // cells, Chebyshev
  double nms_iou = 0.7;
  int max_proposals = 200;
  LinkOptions link;
  /// Completed diagonals must also be direction-compatible from the detected
  /// third corner's side.
  bool filter_completed_diagonal = true;
  /// Proposals whose weakest corner-probability lookup falls below this are
  /// dropped; negative means "use `threshold`". Set 0 to disable.
  double min_corner_prob = -1.0;

  double effective_min_corner_prob() const {
    return min_corner_prob < 0.0 ? threshold : min_corner_prob;
  }
};

/// Is the directed linkage p->q compatible with p's predicted direction
/// (and q's, when mutual)? Positions are taken at cell centers.
bool link_compatible(const CornerCandidate& p, const CornerCandidate& q, int bins,
                     double stride, LinkOptions opts = {});

/// All direction-compatible pairs (a in cands_a) x (b in cands_b).
/// Coincident pairs are dropped. cands_a/cands_b must hold diagonal-partner
/// roles (tl x br or tr x bl).
std::vector<DiagonalLink> link_diagonals(const std::vector<CornerCandidate>& cands_a,
                                         const std::vector<CornerCandidate>& cands_b,
                                         int bins, double stride, LinkOptions opts = {});

/// Parallelogram completion: reflects the third corner about the midpoint of
/// the diagonal and labels the four vertices by role. Returns nullopt when the
/// result is degenerate (third corner collinear with the diagonal).
std::optional<Quad> complete_quad(const DiagonalLink& d, const CornerCandidate& third,
                                  double stride);

/// Per-role corner probabilities P_i at the quad's vertices, read from the
/// maps at the nearest cell (clamped to the map bounds).
std::array<double, 4> corner_probabilities_at(const CornerScoreMaps& m, const Quad& q);

/// Product of the four per-corner probabilities.
double score_proposal(const CornerScoreMaps& m, const Quad& q);

/// Full proposal generation: candidate extraction per role, diagonal linking
/// with direction filtering, parallelogram completion from both diagonal
/// pairs, scoring, per-corner probability floor, exact-duplicate merge
/// (max score), and a deterministic sort (score desc, then vertex order).
std::vector<QuadProposal> generate_proposals(const CornerScoreMaps& m,
                                             const ProposalParams& params);

/// Greedy NMS: sort by score (desc), keep a proposal unless it overlaps an
/// already kept one with quad_iou > iou_thresh; at most max_out returned.
std::vector<QuadProposal> quad_nms(std::vector<QuadProposal> props, double iou_thresh,
                                   std::size_t max_out);

/// JSON I/O for quads and proposal lists:
/// {"tl":[x,y],"tr":[x,y],"br":[x,y],"bl":[x,y],"score":s}, arrays thereof.
std::string proposals_to_json(const std::vector<QuadProposal>& props);
std::vector<QuadProposal> proposals_from_json(const std::string& text);
void save_proposals(const std::vector<QuadProposal>& props,
                    const std::filesystem::path& path);
std::vector<QuadProposal> load_proposals(const std::filesystem::path& path);

}  // namespace crpn
