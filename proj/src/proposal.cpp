#include "crpn/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "crpn/error.hpp"

namespace crpn {

namespace {

int bin_distance(int a, int b, int bins, bool circular) {
  return circular ? circular_bin_distance(a, b, bins) : std::abs(a - b);
}

bool is_diagonal_pairing(Corner a, Corner b) { return diagonal_partner(a) == b; }

/// P_i at a single map cell, computed directly from the logits
/// (1 - softmax background).
double prob_at_cell(const CornerScoreMaps& m, Corner type, int cx, int cy) {
  const Tensor& t = m.map(type);
  const int w = static_cast<int>(t.width());
  const int h = static_cast<int>(t.height());
  cx = std::clamp(cx, 0, w - 1);
  cy = std::clamp(cy, 0, h - 1);
  double max_logit = t.at(0, cy, cx);
  for (int k = 1; k <= m.bins; ++k) {
    max_logit = std::max(max_logit, t.at(static_cast<std::size_t>(k), cy, cx));
  }
  double denom = 0.0;
  for (int k = 0; k <= m.bins; ++k) {
    denom += std::exp(t.at(static_cast<std::size_t>(k), cy, cx) - max_logit);
  }
  return 1.0 - std::exp(t.at(0, cy, cx) - max_logit) / denom;
}

/// Direction-compatibility of the completed diagonal, judged from the
/// detected third corner: its predicted direction must point at the
/// synthesized partner (equivalently, at the source diagonal's midpoint).
bool completed_diagonal_compatible(const CornerCandidate& third, Point synthesized,
                                   int bins, double stride, const LinkOptions& opts) {
  const Point p = candidate_image_point(third, stride);
  if (p == synthesized) return false;
  const int practical = discretize_direction(p, synthesized, bins);
  return bin_distance(practical, third.link_dir, bins, opts.circular) <= 1;
}

struct VertexKey {
  std::array<double, 8> v;
  friend bool operator<(const VertexKey& a, const VertexKey& b) { return a.v < b.v; }
};

VertexKey key_of(const Quad& q) {
  VertexKey k;
  for (int i = 0; i < 4; ++i) {
    k.v[2 * i] = q.vertices()[i].x;
    k.v[2 * i + 1] = q.vertices()[i].y;
  }
  return k;
}

void sort_proposals(std::vector<QuadProposal>& props) {
  std::sort(props.begin(), props.end(), [](const QuadProposal& a, const QuadProposal& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.quad < b.quad;
  });
}

}  // namespace

bool link_compatible(const CornerCandidate& p, const CornerCandidate& q, int bins,
                     double stride, LinkOptions opts) {
  if (p.cx == q.cx && p.cy == q.cy) return false;
  const Point pp = candidate_image_point(p, stride);
  const Point qq = candidate_image_point(q, stride);
  const int d_pq = discretize_direction(pp, qq, bins);
  if (bin_distance(d_pq, p.link_dir, bins, opts.circular) > 1) return false;
  if (opts.mutual) {
    const int d_qp = discretize_direction(qq, pp, bins);
    if (bin_distance(d_qp, q.link_dir, bins, opts.circular) > 1) return false;
  }
  return true;
}

std::vector<DiagonalLink> link_diagonals(const std::vector<CornerCandidate>& cands_a,
                                         const std::vector<CornerCandidate>& cands_b,
                                         int bins, double stride, LinkOptions opts) {
  if (!cands_a.empty() && !cands_b.empty() &&
      !is_diagonal_pairing(cands_a.front().type, cands_b.front().type)) {
    throw std::invalid_argument("link_diagonals: candidate roles are not diagonal partners");
  }
  std::vector<DiagonalLink> links;
  for (const CornerCandidate& a : cands_a) {
    for (const CornerCandidate& b : cands_b) {
      if (link_compatible(a, b, bins, stride, opts)) links.push_back({a, b});
    }
  }
  return links;
}

std::optional<Quad> complete_quad(const DiagonalLink& d, const CornerCandidate& third,
                                  double stride) {
  if (is_diagonal_pairing(d.a.type, third.type) ||
      d.a.type == third.type || d.b.type == third.type) {
    throw std::invalid_argument("complete_quad: third corner must come from the other diagonal");
  }
  const Point a = candidate_image_point(d.a, stride);
  const Point b = candidate_image_point(d.b, stride);
  const Point t = candidate_image_point(third, stride);
  const Point mid = 0.5 * (a + b);
  const Point synthesized = 2.0 * mid - t;

  std::array<Point, 4> v{};
  v[static_cast<int>(d.a.type)] = a;
  v[static_cast<int>(d.b.type)] = b;
  v[static_cast<int>(third.type)] = t;
  v[static_cast<int>(diagonal_partner(third.type))] = synthesized;
  return Quad::make(v[0], v[1], v[2], v[3]);
}

std::array<double, 4> corner_probabilities_at(const CornerScoreMaps& m, const Quad& q) {
  std::array<double, 4> probs{};
  for (Corner c : kAllCorners) {
    const Point p = q.at(c);
    probs[static_cast<int>(c)] =
        prob_at_cell(m, c, cell_of(p.x, m.stride), cell_of(p.y, m.stride));
  }
  return probs;
}

double score_proposal(const CornerScoreMaps& m, const Quad& q) {
  const auto probs = corner_probabilities_at(m, q);
  return probs[0] * probs[1] * probs[2] * probs[3];
}

std::vector<QuadProposal> generate_proposals(const CornerScoreMaps& m,
                                             const ProposalParams& params) {
  m.validate();
  std::array<std::vector<CornerCandidate>, 4> cands;
  for (Corner c : kAllCorners) {
    cands[static_cast<int>(c)] =
        extract_candidates(m, c, params.threshold, params.max_candidates,
                           params.suppression_radius);
  }
  const auto& tl = cands[static_cast<int>(Corner::TopLeft)];
  const auto& tr = cands[static_cast<int>(Corner::TopRight)];
  const auto& br = cands[static_cast<int>(Corner::BotRight)];
  const auto& bl = cands[static_cast<int>(Corner::BotLeft)];

  const double floor = params.effective_min_corner_prob();
  std::map<VertexKey, double> merged;

  auto run_pass = [&](const std::vector<CornerCandidate>& a,
                      const std::vector<CornerCandidate>& b,
                      const std::vector<CornerCandidate>& thirds_one,
                      const std::vector<CornerCandidate>& thirds_two) {
    const auto links = link_diagonals(a, b, params.bins, m.stride, params.link);
    for (const DiagonalLink& link : links) {
      const Point pa = candidate_image_point(link.a, m.stride);
      const Point pb = candidate_image_point(link.b, m.stride);
      const Point mid = 0.5 * (pa + pb);
      auto consider = [&](const CornerCandidate& third) {
        const Point pt = candidate_image_point(third, m.stride);
        const Point synthesized = 2.0 * mid - pt;
        if (params.filter_completed_diagonal &&
            !completed_diagonal_compatible(third, synthesized, params.bins, m.stride,
                                           params.link)) {
          return;
        }
        const auto quad = complete_quad(link, third, m.stride);
        if (!quad) return;
        const auto probs = corner_probabilities_at(m, *quad);
        const double weakest = *std::min_element(probs.begin(), probs.end());
        if (weakest < floor) return;
        const double score = probs[0] * probs[1] * probs[2] * probs[3];
        auto [it, inserted] = merged.emplace(key_of(*quad), score);
        if (!inserted) it->second = std::max(it->second, score);
      };
      for (const CornerCandidate& third : thirds_one) consider(third);
      for (const CornerCandidate& third : thirds_two) consider(third);
    }
  };

  run_pass(tl, br, tr, bl);
  run_pass(tr, bl, tl, br);

  std::vector<QuadProposal> out;
  out.reserve(merged.size());
  for (const auto& [key, score] : merged) {
    const auto quad = Quad::make({key.v[0], key.v[1]}, {key.v[2], key.v[3]},
                                 {key.v[4], key.v[5]}, {key.v[6], key.v[7]});
    out.push_back({*quad, score});
  }
  sort_proposals(out);
  return out;
}

std::vector<QuadProposal> quad_nms(std::vector<QuadProposal> props, double iou_thresh,
                                   std::size_t max_out) {
  sort_proposals(props);
  std::vector<QuadProposal> kept;
  for (const QuadProposal& p : props) {
    if (kept.size() >= max_out) break;
    bool suppressed = false;
    for (const QuadProposal& k : kept) {
      if (quad_iou(p.quad, k.quad) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

namespace {

nlohmann::ordered_json quad_to_json(const Quad& q, double score) {
  nlohmann::ordered_json j;
  j["tl"] = {q.tl().x, q.tl().y};
  j["tr"] = {q.tr().x, q.tr().y};
  j["br"] = {q.br().x, q.br().y};
  j["bl"] = {q.bl().x, q.bl().y};
  j["score"] = score;
  return j;
}

Point point_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DataError("quad JSON: corner must be an [x, y] number pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string proposals_to_json(const std::vector<QuadProposal>& props) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const QuadProposal& p : props) arr.push_back(quad_to_json(p.quad, p.score));
  return arr.dump();
}

std::vector<QuadProposal> proposals_from_json(const std::string& text) {
  nlohmann::ordered_json arr;
  try {
    arr = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("proposal JSON parse error: ") + e.what());
  }
  if (!arr.is_array()) throw DataError("proposal JSON: expected a top-level array");
  std::vector<QuadProposal> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    if (!item.is_object()) throw DataError("proposal JSON: expected quad objects");
    if (!item.contains("tl") || !item.contains("tr") || !item.contains("br") ||
        !item.contains("bl")) {
      throw DataError("proposal JSON: quad needs tl/tr/br/bl");
    }
    const Point tl = point_from_json(item.at("tl"));
    const Point tr = point_from_json(item.at("tr"));
    const Point br = point_from_json(item.at("br"));
    const Point bl = point_from_json(item.at("bl"));
    const double score = item.contains("score") ? item.at("score").get<double>() : 1.0;
    const auto quad = Quad::make(tl, tr, br, bl);
    if (!quad) throw DataError("proposal JSON: vertices do not form a convex quad");
    out.push_back({*quad, score});
  }
  return out;
}

void save_proposals(const std::vector<QuadProposal>& props,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write proposals: " + path.string());
  out << proposals_to_json(props) << "\n";
}

std::vector<QuadProposal> load_proposals(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open proposals: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return proposals_from_json(text);
}

}  // namespace crpn
