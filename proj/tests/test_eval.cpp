#include <doctest.h>

#include "crpn/eval.hpp"

using crpn::EvalReport;
using crpn::Quad;
using crpn::QuadProposal;

namespace {

Quad box(double x, double y, double w, double h) {
  return *Quad::make({x, y}, {x + w, y}, {x + w, y + h}, {x, y + h});
}

}  // namespace

TEST_CASE("evaluate: exact detections give perfect scores") {
  const std::vector<Quad> gts = {box(0, 0, 50, 20), box(100, 100, 40, 40)};
  const std::vector<QuadProposal> dets = {{gts[0], 0.9}, {gts[1], 0.8}};
  const EvalReport r = crpn::evaluate(dets, gts, 0.5);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.f_measure == doctest::Approx(1.0));
  REQUIRE(r.matches.size() == 2);
}

TEST_CASE("evaluate: degenerate inputs follow the zero conventions") {
  const std::vector<Quad> gts = {box(0, 0, 50, 20)};
  const EvalReport none = crpn::evaluate({}, gts, 0.5);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f_measure == 0.0);

  const EvalReport no_gt = crpn::evaluate({{box(0, 0, 10, 10), 1.0}}, {}, 0.5);
  CHECK(no_gt.recall == 0.0);
  CHECK(no_gt.precision == 0.0);
}

TEST_CASE("evaluate: one-to-one matching caps duplicate detections") {
  const std::vector<Quad> gts = {box(0, 0, 50, 20)};
  const std::vector<QuadProposal> dets = {{gts[0], 0.9}, {gts[0], 0.7}};
  const EvalReport r = crpn::evaluate(dets, gts, 0.5);
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.precision == doctest::Approx(0.5));
  REQUIRE(r.matches.size() == 1);
  CHECK(r.matches[0].det == 0);  // higher score matched first
}

TEST_CASE("evaluate: greedy order prefers higher scores for contested gts") {
  const Quad gt = box(0, 0, 100, 100);
  const QuadProposal strong{box(5, 5, 100, 100), 0.9};
  const QuadProposal weak{box(0, 0, 100, 100), 0.4};
  const EvalReport r = crpn::evaluate({weak, strong}, {gt}, 0.5);
  REQUIRE(r.matches.size() == 1);
  CHECK(r.matches[0].det == 1);  // index of `strong` in the input order
}

TEST_CASE("evaluate: non-matching detections dilute precision, never recall") {
  const std::vector<Quad> gts = {box(0, 0, 50, 20)};
  std::vector<QuadProposal> dets = {{gts[0], 0.9}};
  const EvalReport base = crpn::evaluate(dets, gts, 0.5);
  dets.push_back({box(300, 300, 10, 10), 0.95});
  const EvalReport more = crpn::evaluate(dets, gts, 0.5);
  CHECK(more.precision < base.precision);
  CHECK(more.recall == base.recall);
  // each gt and det matched at most once
  CHECK(more.matches.size() == 1);
}

TEST_CASE("evaluate: matches below the IoU threshold do not count") {
  const std::vector<Quad> gts = {box(0, 0, 100, 100)};
  // ~1/3 IoU: shifted by half its width
  const std::vector<QuadProposal> dets = {{box(50, 0, 100, 100), 0.9}};
  CHECK(crpn::evaluate(dets, gts, 0.5).matches.empty());
  CHECK(crpn::evaluate(dets, gts, 0.3).matches.size() == 1);
}
