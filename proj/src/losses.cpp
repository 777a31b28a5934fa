#include "crpn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crpn/error.hpp"
#include "crpn/rng.hpp"

namespace crpn {

namespace {

constexpr double kLogFloor = 1e-12;

std::vector<double> softmax_vec(const std::vector<double>& logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double denom = 0.0;
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    denom += p[i];
  }
  for (double& v : p) v /= denom;
  return p;
}

}  // namespace

SegBatch sample_seg_batch(const GtCornerLabels& gt, Corner type, int size,
                          std::uint64_t seed) {
  if (size < 2 || size % 2 != 0) {
    throw std::invalid_argument("sample_seg_batch: size must be a positive even count");
  }
  const auto& labels = gt.labels[static_cast<int>(type)];
  const std::size_t total = gt.height * gt.width;
  if (total == 0) throw DataError("sample_seg_batch: empty label map");

  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < total; ++i) {
    if (labels[i] > 0) positives.push_back(i);
  }

  Rng rng(seed);
  SegBatch batch;
  batch.type = type;

  // Up to size/2 positives, uniform without replacement (partial
  // Fisher-Yates keeps the draw order deterministic).
  const std::size_t want_pos =
      std::min(positives.size(), static_cast<std::size_t>(size) / 2);
  for (std::size_t i = 0; i < want_pos; ++i) {
    const std::size_t j = i + rng.below(positives.size() - i);
    std::swap(positives[i], positives[j]);
  }
  for (std::size_t i = 0; i < want_pos; ++i) {
    SegSample s;
    s.x = static_cast<int>(positives[i] % gt.width);
    s.y = static_cast<int>(positives[i] / gt.width);
    s.label = labels[positives[i]];
    s.logits.assign(static_cast<std::size_t>(gt.bins) + 1, 0.0);
    batch.samples.push_back(std::move(s));
  }

  // Pad with negatives, uniform without replacement via rejection (the
  // negative pool dwarfs the batch, so retries are rare).
  std::vector<std::size_t> chosen_neg;
  while (batch.samples.size() < static_cast<std::size_t>(size)) {
    if (chosen_neg.size() + positives.size() >= total) {
      throw DataError("sample_seg_batch: not enough negative pixels to fill the batch");
    }
    const std::size_t idx = rng.below(total);
    if (labels[idx] > 0) continue;
    if (std::find(chosen_neg.begin(), chosen_neg.end(), idx) != chosen_neg.end()) {
      continue;
    }
    chosen_neg.push_back(idx);
    SegSample s;
    s.x = static_cast<int>(idx % gt.width);
    s.y = static_cast<int>(idx / gt.width);
    s.label = 0;
    s.logits.assign(static_cast<std::size_t>(gt.bins) + 1, 0.0);
    batch.samples.push_back(std::move(s));
  }
  return batch;
}

void fill_logits_from_maps(SegBatch& batch, const CornerScoreMaps& maps) {
  maps.validate();
  const Tensor& t = maps.map(batch.type);
  for (SegSample& s : batch.samples) {
    s.logits.resize(t.channels());
    for (std::size_t c = 0; c < t.channels(); ++c) {
      s.logits[c] = t.at(c, static_cast<std::size_t>(s.y), static_cast<std::size_t>(s.x));
    }
  }
}

BalancedWeights balanced_weights(const SegBatch& batch) {
  if (batch.samples.empty()) throw std::invalid_argument("balanced_weights: empty batch");
  const double n = static_cast<double>(batch.samples.size());
  double pos = 0.0;
  for (const SegSample& s : batch.samples) {
    if (s.label > 0) pos += 1.0;
  }
  return {pos / n, (n - pos) / n};
}

SegLossResult seg_loss(const std::array<SegBatch, 4>& batches) {
  SegLossResult result;
  for (int t = 0; t < kNumCorners; ++t) {
    const SegBatch& batch = batches[t];
    result.grads[t].resize(batch.samples.size());
    if (batch.samples.empty()) continue;
    const BalancedWeights w = balanced_weights(batch);
    const double inv_n = 1.0 / static_cast<double>(batch.samples.size());
    for (std::size_t m = 0; m < batch.samples.size(); ++m) {
      const SegSample& s = batch.samples[m];
      if (s.logits.empty()) throw DataError("seg_loss: sample without logits");
      if (s.label < 0 || s.label >= static_cast<int>(s.logits.size())) {
        throw DataError("seg_loss: label outside {0..K}");
      }
      const std::vector<double> p = softmax_vec(s.logits);
      const double weight = s.label == 0 ? w.w_background : w.w_corner;
      result.loss -= inv_n * weight *
                     std::log(std::max(p[static_cast<std::size_t>(s.label)], kLogFloor));
      auto& g = result.grads[t][m];
      g.resize(s.logits.size());
      for (std::size_t k = 0; k < s.logits.size(); ++k) {
        const double indicator = (static_cast<int>(k) == s.label) ? 1.0 : 0.0;
        g[k] = inv_n * weight * (p[k] - indicator);
      }
    }
  }
  return result;
}

ScalarLoss cls_loss(double p, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("cls_loss: label must be 0 or 1");
  const double q = std::clamp(p, kLogFloor, 1.0 - kLogFloor);
  ScalarLoss out;
  out.loss = -(y * std::log(q) + (1 - y) * std::log(1.0 - q));
  out.grad = -(y / q) + (1 - y) / (1.0 - q);
  return out;
}

ScalarLoss smooth_l1(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("smooth_l1: non-finite input");
  ScalarLoss out;
  if (std::abs(x) < 1.0) {
    out.loss = 0.5 * x * x;
    out.grad = x;
  } else {
    out.loss = std::abs(x) - 0.5;
    out.grad = x > 0.0 ? 1.0 : -1.0;
  }
  return out;
}

RegressionTuple encode_targets(const Quad& proposal, const Quad& gt) {
  double min_x = proposal.vertices()[0].x, max_x = min_x;
  double min_y = proposal.vertices()[0].y, max_y = min_y;
  for (const Point& p : proposal.vertices()) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  if (w <= 0.0 || h <= 0.0) throw DataError("encode_targets: zero-extent proposal");

  RegressionTuple t{};
  for (int i = 0; i < 4; ++i) {
    const Point& p = proposal.vertices()[i];
    const Point& g = gt.vertices()[i];
    t[2 * i] = (p.x - g.x) / w;
    t[2 * i + 1] = (p.y - g.y) / h;
  }
  return t;
}

std::array<Point, 4> decode_targets(const Quad& proposal, const RegressionTuple& t) {
  double min_x = proposal.vertices()[0].x, max_x = min_x;
  double min_y = proposal.vertices()[0].y, max_y = min_y;
  for (const Point& p : proposal.vertices()) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  if (w <= 0.0 || h <= 0.0) throw DataError("decode_targets: zero-extent proposal");

  std::array<Point, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const Point& p = proposal.vertices()[i];
    out[i] = {p.x - t[2 * i] * w, p.y - t[2 * i + 1] * h};
  }
  return out;
}

LocLossResult loc_loss(const RegressionTuple& t, const RegressionTuple& t_star) {
  LocLossResult out;
  for (int i = 0; i < 8; ++i) {
    const ScalarLoss s = smooth_l1(t[i] - t_star[i]);
    out.loss += s.loss;
    out.grad[i] = s.grad;
  }
  return out;
}

double total_loss(double seg, double cls, double loc, const LossWeights& w) {
  return w.seg * seg + w.cls * cls + w.loc * loc;
}

std::optional<std::size_t> match_gt(const Quad& proposal, const std::vector<Quad>& gts) {
  if (gts.empty()) return std::nullopt;
  std::size_t best = 0;
  double best_iou = -1.0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const double iou = quad_iou(proposal, gts[i]);
    if (iou > best_iou) {
      best_iou = iou;
      best = i;
    }
  }
  return best;
}

}  // namespace crpn
