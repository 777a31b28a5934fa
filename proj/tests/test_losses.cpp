#include <doctest.h>

#include <cmath>
#include <set>

#include "crpn/cornermap.hpp"
#include "crpn/error.hpp"
#include "crpn/losses.hpp"
#include "crpn/rng.hpp"
#include "oracles.hpp"

using crpn::BalancedWeights;
using crpn::Corner;
using crpn::GtCornerLabels;
using crpn::Quad;
using crpn::RegressionTuple;
using crpn::SegBatch;
using crpn::SegSample;

namespace {

GtCornerLabels labels_with_positives(int count, std::size_t h = 32, std::size_t w = 32) {
  GtCornerLabels gt;
  gt.height = h;
  gt.width = w;
  gt.bins = 24;
  gt.stride = 8.0;
  for (auto& p : gt.labels) p.assign(h * w, 0);
  for (int i = 0; i < count; ++i) {
    gt.labels[0][static_cast<std::size_t>(i) * 7 % (h * w)] = 1 + i % 24;
  }
  return gt;
}

SegBatch uniform_batch(int n_pos, int n_neg, int bins = 24) {
  SegBatch b;
  b.type = Corner::TopLeft;
  for (int i = 0; i < n_pos + n_neg; ++i) {
    SegSample s;
    s.x = i;
    s.y = 0;
    s.label = i < n_pos ? 1 + i % bins : 0;
    s.logits.assign(bins + 1, 0.0);
    b.samples.push_back(std::move(s));
  }
  return b;
}

}  // namespace

TEST_CASE("seg batch sampling honors the positive:negative policy") {
  SUBCASE("plentiful positives: half and half") {
    const auto gt = labels_with_positives(100);
    const SegBatch b = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 1);
    REQUIRE(b.samples.size() == 32);
    int pos = 0;
    for (const auto& s : b.samples) pos += s.label > 0;
    CHECK(pos == 16);
  }
  SUBCASE("scarce positives: pad with negatives") {
    const auto gt = labels_with_positives(3);
    const SegBatch b = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 1);
    REQUIRE(b.samples.size() == 32);
    int pos = 0;
    for (const auto& s : b.samples) pos += s.label > 0;
    CHECK(pos == 3);
  }
  SUBCASE("no positives: all negatives") {
    const auto gt = labels_with_positives(0);
    const SegBatch b = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 1);
    int pos = 0;
    for (const auto& s : b.samples) pos += s.label > 0;
    CHECK(pos == 0);
  }
  SUBCASE("deterministic under the seed, no duplicate pixels") {
    const auto gt = labels_with_positives(40);
    const SegBatch a = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 9);
    const SegBatch b = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 9);
    REQUIRE(a.samples.size() == b.samples.size());
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].x == b.samples[i].x);
      CHECK(a.samples[i].y == b.samples[i].y);
      CHECK(a.samples[i].label == b.samples[i].label);
      CHECK(seen.insert({a.samples[i].x, a.samples[i].y}).second);
    }
    const SegBatch c = crpn::sample_seg_batch(gt, Corner::TopLeft, 32, 10);
    bool differs = false;
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
      differs = differs || c.samples[i].x != a.samples[i].x ||
                c.samples[i].y != a.samples[i].y;
    }
    CHECK(differs);
  }
}

TEST_CASE("balanced weights follow the class counts") {
  const BalancedWeights even = crpn::balanced_weights(uniform_batch(16, 16));
  CHECK(even.w_corner == doctest::Approx(0.5));
  CHECK(even.w_background == doctest::Approx(0.5));

  const BalancedWeights skew = crpn::balanced_weights(uniform_batch(3, 29));
  CHECK(skew.w_corner == doctest::Approx(29.0 / 32.0));
  CHECK(skew.w_background == doctest::Approx(3.0 / 32.0));

  const BalancedWeights empty_pos = crpn::balanced_weights(uniform_batch(0, 32));
  CHECK(empty_pos.w_corner == doctest::Approx(1.0));
  CHECK(empty_pos.w_background == doctest::Approx(0.0));
}

TEST_CASE("seg loss: closed forms") {
  SUBCASE("near-one-hot predictions drive the loss toward zero") {
    std::array<SegBatch, 4> batches;
    for (int t = 0; t < 4; ++t) {
      batches[t].type = static_cast<Corner>(t);
      SegSample s;
      s.label = 5;
      s.logits.assign(25, 0.0);
      s.logits[5] = 50.0;
      batches[t].samples.push_back(s);
      SegSample neg;
      neg.label = 0;
      neg.logits.assign(25, 0.0);
      neg.logits[0] = 50.0;
      batches[t].samples.push_back(neg);
    }
    CHECK(crpn::seg_loss(batches).loss == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("uniform logits, one positive and one negative sample") {
    // each sample contributes -w log(1/(K+1)) / |S|; w = 1/2, |S| = 2
    std::array<SegBatch, 4> batches;
    batches[0] = uniform_batch(1, 1);
    const double expected = std::log(25.0) / 2.0;  // two terms of ln(25)/4
    CHECK(crpn::seg_loss(batches).loss == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("all-negative batch is zeroed by the background weight") {
    std::array<SegBatch, 4> batches;
    batches[0] = uniform_batch(0, 8);
    CHECK(crpn::seg_loss(batches).loss == doctest::Approx(0.0));
  }
  SUBCASE("loss is nonnegative on random batches") {
    crpn::Rng rng(13);
    for (int round = 0; round < 20; ++round) {
      std::array<SegBatch, 4> batches;
      for (int t = 0; t < 4; ++t) {
        batches[t] = uniform_batch(4, 4);
        for (auto& s : batches[t].samples)
          for (double& v : s.logits) v = rng.normal(0.0, 2.0);
      }
      CHECK(crpn::seg_loss(batches).loss >= 0.0);
    }
  }
}

TEST_CASE("seg loss gradient matches finite differences") {
  crpn::Rng rng(14);
  double worst = 0.0;
  for (int round = 0; round < 10; ++round) {
    std::array<SegBatch, 4> batches;
    for (int t = 0; t < 4; ++t) {
      batches[t] = uniform_batch(3, 5);
      for (auto& s : batches[t].samples)
        for (double& v : s.logits) v = rng.normal(0.0, 2.0);
    }
    const auto base = crpn::seg_loss(batches);
    for (int t = 0; t < 4; ++t) {
      for (std::size_t m = 0; m < batches[t].samples.size(); ++m) {
        for (std::size_t k = 0; k < batches[t].samples[m].logits.size(); ++k) {
          double& v = batches[t].samples[m].logits[k];
          const double saved = v;
          v = saved + 1e-5;
          const double up = crpn::seg_loss(batches).loss;
          v = saved - 1e-5;
          const double down = crpn::seg_loss(batches).loss;
          v = saved;
          const double fd = (up - down) / 2e-5;
          worst = std::max(worst, oracles::rel_err(base.grads[t][m][k], fd));
        }
      }
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("balanced batch: positive and negative gradient mass agree under uniform logits") {
  std::array<SegBatch, 4> batches;
  batches[0] = uniform_batch(8, 8);
  const auto result = crpn::seg_loss(batches);
  double pos_mass = 0.0, neg_mass = 0.0;
  for (std::size_t m = 0; m < batches[0].samples.size(); ++m) {
    double mass = 0.0;
    for (double g : result.grads[0][m]) mass += std::abs(g);
    (batches[0].samples[m].label > 0 ? pos_mass : neg_mass) += mass;
  }
  CHECK(pos_mass == doctest::Approx(neg_mass).epsilon(1e-9));
}

TEST_CASE("cls loss: closed forms and finite differences") {
  CHECK(crpn::cls_loss(1.0 - 1e-12, 1).loss == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(crpn::cls_loss(0.5, 1).loss == doctest::Approx(std::log(2.0)));
  CHECK(crpn::cls_loss(0.5, 0).loss == doctest::Approx(std::log(2.0)));
  CHECK(crpn::cls_loss(1.0, 1).loss == doctest::Approx(0.0).epsilon(1e-9));  // clamped

  crpn::Rng rng(15);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform(0.05, 0.95);
    const int y = rng.below(2) == 0 ? 0 : 1;
    const double grad = crpn::cls_loss(p, y).grad;
    const double fd = oracles::central_diff(
        [&](double q) { return crpn::cls_loss(q, y).loss; }, p);
    worst = std::max(worst, std::abs(grad - fd) / std::max({std::abs(grad), 1.0}));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("smooth L1: closed forms on both branches") {
  CHECK(crpn::smooth_l1(0.0).loss == 0.0);
  CHECK(crpn::smooth_l1(0.5).loss == doctest::Approx(0.125));
  CHECK(crpn::smooth_l1(0.5).grad == doctest::Approx(0.5));
  CHECK(crpn::smooth_l1(2.0).loss == doctest::Approx(1.5));
  CHECK(crpn::smooth_l1(2.0).grad == doctest::Approx(1.0));
  CHECK(crpn::smooth_l1(-2.0).loss == doctest::Approx(1.5));
  CHECK(crpn::smooth_l1(-2.0).grad == doctest::Approx(-1.0));
}

TEST_CASE("target encoding: documented example, identity, decode inverse") {
  // proposal corner (10,10) vs gt corner (12,14), bbox 20x40 -> (-0.1, -0.1)
  const Quad proposal = *Quad::make({10, 10}, {30, 10}, {30, 50}, {10, 50});
  const Quad gt = *Quad::make({12, 14}, {31, 11}, {29, 48}, {11, 49});
  const RegressionTuple t = crpn::encode_targets(proposal, gt);
  CHECK(t[0] == doctest::Approx(-0.1));
  CHECK(t[1] == doctest::Approx(-0.1));

  const RegressionTuple zero = crpn::encode_targets(proposal, proposal);
  for (double v : zero) CHECK(v == doctest::Approx(0.0));

  crpn::Rng rng(16);
  for (int i = 0; i < 100; ++i) {
    const Quad p = oracles::random_quad(rng);
    const Quad g = oracles::random_quad(rng);
    const RegressionTuple enc = crpn::encode_targets(p, g);
    const auto dec = crpn::decode_targets(p, enc);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(dec[k].x - g.vertices()[k].x) <= 1e-9);
      CHECK(std::abs(dec[k].y - g.vertices()[k].y) <= 1e-9);
    }
  }
}

TEST_CASE("loc loss: zero at the target, symmetric, finite differences") {
  RegressionTuple t{};
  t.fill(0.25);
  CHECK(crpn::loc_loss(t, t).loss == 0.0);

  RegressionTuple off = t;
  off[3] += 0.5;
  CHECK(crpn::loc_loss(off, t).loss == doctest::Approx(0.125));
  CHECK(crpn::loc_loss(t, off).loss == doctest::Approx(0.125));

  crpn::Rng rng(17);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    RegressionTuple a{}, b{};
    for (int k = 0; k < 8; ++k) {
      double d;
      do {
        d = rng.normal(0.0, 1.0);
      } while (std::abs(std::abs(d) - 1.0) < 0.01 || std::abs(d) < 1e-3);
      b[k] = rng.normal(0.0, 0.5);
      a[k] = b[k] + d;
    }
    const auto base = crpn::loc_loss(a, b);
    for (int k = 0; k < 8; ++k) {
      const double fd = oracles::central_diff(
          [&](double x) {
            RegressionTuple mod = a;
            mod[k] = x;
            return crpn::loc_loss(mod, b).loss;
          },
          a[k]);
      worst = std::max(worst, oracles::rel_err(base.grad[k], fd));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("total loss combines with the lambda weights") {
  CHECK(crpn::total_loss(1, 2, 3) == doctest::Approx(6.0));
  CHECK(crpn::total_loss(1, 2, 3, {1, 1, 0}) == doctest::Approx(3.0));
  const double scaled = crpn::total_loss(1, 2, 3, {2, 2, 2});
  CHECK(scaled == doctest::Approx(12.0));
}

TEST_CASE("match_gt picks the maximal-IoU ground truth") {
  const Quad p = *Quad::make({0, 0}, {10, 0}, {10, 10}, {0, 10});
  const Quad near = *Quad::make({1, 1}, {11, 1}, {11, 11}, {1, 11});
  const Quad far = *Quad::make({50, 50}, {60, 50}, {60, 60}, {50, 60});

  CHECK_FALSE(crpn::match_gt(p, {}).has_value());
  CHECK(crpn::match_gt(p, {far}).value() == 0);
  CHECK(crpn::match_gt(p, {far, near}).value() == 1);

  crpn::Rng rng(18);
  for (int i = 0; i < 50; ++i) {
    const Quad proposal = oracles::random_quad(rng);
    std::vector<Quad> gts;
    for (int g = 0; g < 6; ++g) gts.push_back(oracles::random_quad(rng));
    std::size_t best = 0;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = crpn::quad_iou(proposal, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    CHECK(crpn::match_gt(proposal, gts).value() == best);
  }
}

TEST_CASE("fill_logits_from_maps copies the per-cell logit vectors") {
  const auto gt = labels_with_positives(10, 8, 8);
  const crpn::CornerScoreMaps maps = crpn::ideal_score_maps(gt, 7.0);
  SegBatch b = crpn::sample_seg_batch(gt, Corner::TopLeft, 8, 3);
  crpn::fill_logits_from_maps(b, maps);
  for (const auto& s : b.samples) {
    REQUIRE(s.logits.size() == 25);
    for (std::size_t c = 0; c < 25; ++c) {
      CHECK(s.logits[c] == maps.map(Corner::TopLeft)
                               .at(c, static_cast<std::size_t>(s.y),
                                   static_cast<std::size_t>(s.x)));
    }
  }
}
