#include "crpn/cornermap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "crpn/error.hpp"

namespace crpn {

void CornerScoreMaps::validate() const {
  if (bins < 2) throw DataError("corner maps: K must be >= 2");
  if (stride < 1.0) throw DataError("corner maps: stride must be >= 1");
  const std::size_t c = maps[0].channels();
  const std::size_t h = maps[0].height();
  const std::size_t w = maps[0].width();
  if (c != static_cast<std::size_t>(bins) + 1) {
    throw DataError("corner maps: channel count must be K+1");
  }
  for (const Tensor& t : maps) {
    if (t.channels() != c || t.height() != h || t.width() != w) {
      throw DataError("corner maps: the four tensors must share shape");
    }
  }
}

int cell_of(double image_coord, double stride) {
  return static_cast<int>(std::lround(image_coord / stride - 0.5));
}

double image_of_cell(int cell, double stride) {
  return (static_cast<double>(cell) + 0.5) * stride;
}

Point candidate_image_point(const CornerCandidate& cand, double stride) {
  return {image_of_cell(cand.cx, stride), image_of_cell(cand.cy, stride)};
}

Tensor corner_probability(const CornerScoreMaps& m, Corner type) {
  m.validate();
  const Tensor soft = channel_softmax(m.map(type));
  Tensor out(1, soft.height(), soft.width());
  const std::size_t plane = soft.height() * soft.width();
  for (std::size_t p = 0; p < plane; ++p) {
    double s = 0.0;
    for (int k = 1; k <= m.bins; ++k) {
      s += soft.data()[static_cast<std::size_t>(k) * plane + p];
    }
    out.data()[p] = s;
  }
  return out;
}

int predicted_link_direction(const CornerScoreMaps& m, Corner type, int cx, int cy) {
  const Tensor& t = m.map(type);
  if (cx < 0 || cy < 0 || static_cast<std::size_t>(cx) >= t.width() ||
      static_cast<std::size_t>(cy) >= t.height()) {
    throw std::out_of_range("predicted_link_direction: cell outside the map");
  }
  // Softmax is monotone per pixel, so the argmax over direction channels of
  // the logits matches the argmax of the probabilities (ties toward lower k).
  int best = 1;
  double best_logit = t.at(1, cy, cx);
  for (int k = 2; k <= m.bins; ++k) {
    const double v = t.at(static_cast<std::size_t>(k), cy, cx);
    if (v > best_logit) {
      best_logit = v;
      best = k;
    }
  }
  return best;
}

std::vector<CornerCandidate> extract_candidates(const CornerScoreMaps& m, Corner type,
                                                double threshold, int max_count,
                                                int radius) {
  if (threshold <= 0.0 || threshold >= 1.0) {
    throw std::invalid_argument("extract_candidates: threshold must be in (0,1)");
  }
  if (max_count < 1) throw std::invalid_argument("extract_candidates: max_count >= 1");
  if (radius < 0) throw std::invalid_argument("extract_candidates: radius >= 0");

  const Tensor prob = corner_probability(m, type);
  const int h = static_cast<int>(prob.height());
  const int w = static_cast<int>(prob.width());

  struct Cell {
    double p;
    int cx, cy;
  };
  std::vector<Cell> cells;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double p = prob.at(0, y, x);
      if (p > threshold) cells.push_back({p, x, y});
    }
  }
  // Descending probability; row-major position as a deterministic tie-break.
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.cy != b.cy) return a.cy < b.cy;
    return a.cx < b.cx;
  });

  std::vector<CornerCandidate> kept;
  for (const Cell& c : cells) {
    if (static_cast<int>(kept.size()) >= max_count) break;
    bool suppressed = false;
    for (const CornerCandidate& k : kept) {
      const int cheb = std::max(std::abs(k.cx - c.cx), std::abs(k.cy - c.cy));
      if (cheb <= radius) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    CornerCandidate cand;
    cand.type = type;
    cand.cx = c.cx;
    cand.cy = c.cy;
    cand.prob = c.p;
    cand.link_dir = predicted_link_direction(m, type, c.cx, c.cy);
    kept.push_back(cand);
  }
  return kept;
}

GtCornerLabels render_gt_corner_maps(const std::vector<Quad>& quads, std::size_t height,
                                     std::size_t width, int bins, double stride) {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("render_gt_corner_maps: empty map");
  }
  if (bins < 2) throw std::invalid_argument("render_gt_corner_maps: bins >= 2");
  GtCornerLabels gt;
  gt.height = height;
  gt.width = width;
  gt.bins = bins;
  gt.stride = stride;
  for (auto& m : gt.labels) m.assign(height * width, 0);

  for (const Quad& q : quads) {
    for (Corner c : kAllCorners) {
      const Point p = q.at(c);
      const Point partner = q.at(diagonal_partner(c));
      const int cx = cell_of(p.x, stride);
      const int cy = cell_of(p.y, stride);
      // Out-of-bounds corners are dropped, not clamped.
      if (cx < 0 || cy < 0 || static_cast<std::size_t>(cx) >= width ||
          static_cast<std::size_t>(cy) >= height) {
        continue;
      }
      gt.at(c, cy, cx) = discretize_direction(p, partner, bins);
    }
  }
  return gt;
}

CornerScoreMaps ideal_score_maps(const GtCornerLabels& gt, double sharpness) {
  if (sharpness <= 0.0) throw std::invalid_argument("ideal_score_maps: sharpness > 0");
  CornerScoreMaps m;
  m.bins = gt.bins;
  m.stride = gt.stride;
  const std::size_t channels = static_cast<std::size_t>(gt.bins) + 1;
  for (int t = 0; t < kNumCorners; ++t) {
    Tensor tensor(channels, gt.height, gt.width);
    for (std::size_t y = 0; y < gt.height; ++y) {
      for (std::size_t x = 0; x < gt.width; ++x) {
        const int label = gt.labels[t][y * gt.width + x];
        tensor.at(static_cast<std::size_t>(label), y, x) = sharpness;
      }
    }
    m.maps[t] = std::move(tensor);
  }
  return m;
}

void save_corner_maps(const CornerScoreMaps& m, const std::filesystem::path& prefix) {
  m.validate();
  static const char* kSuffix[4] = {".tl", ".tr", ".br", ".bl"};
  for (int t = 0; t < kNumCorners; ++t) {
    write_tensor(m.maps[t], prefix.string() + kSuffix[t]);
  }
  nlohmann::json sidecar;
  sidecar["K"] = m.bins;
  sidecar["stride"] = m.stride;
  std::ofstream out(prefix.string() + ".json", std::ios::trunc);
  if (!out) throw IoError("cannot write sidecar: " + prefix.string() + ".json");
  out << sidecar.dump() << "\n";
}

CornerScoreMaps load_corner_maps(const std::filesystem::path& prefix) {
  CornerScoreMaps m;
  std::ifstream in(prefix.string() + ".json");
  if (!in) throw IoError("cannot open sidecar: " + prefix.string() + ".json");
  nlohmann::json sidecar;
  try {
    in >> sidecar;
    m.bins = sidecar.at("K").get<int>();
    m.stride = sidecar.at("stride").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad corner-map sidecar " + prefix.string() + ".json: " + e.what());
  }
  static const char* kSuffix[4] = {".tl", ".tr", ".br", ".bl"};
  for (int t = 0; t < kNumCorners; ++t) {
    m.maps[t] = read_tensor(prefix.string() + kSuffix[t]);
  }
  m.validate();
  return m;
}

}  // namespace crpn
