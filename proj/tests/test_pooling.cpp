#include <doctest.h>

#include <cmath>

#include "crpn/pooling.hpp"
#include "crpn/rng.hpp"
#include "oracles.hpp"

using crpn::PooledGrid;
using crpn::Quad;
using crpn::RRoI;
using crpn::Tensor;

namespace {

Tensor iota_map_4x4() {
  Tensor t(1, 4, 4);
  for (int i = 0; i < 16; ++i) t.data()[i] = i + 1;
  return t;
}

/// Map with exact four-fold rotation symmetry about its center.
Tensor rot90_symmetric_map(std::size_t n) {
  Tensor t(1, n, n);
  crpn::Rng rng(17);
  Tensor base(1, n, n);
  for (double& v : base.data()) v = rng.uniform(0.0, 10.0);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      // average the 90-degree orbit of (x, y)
      const std::size_t x1 = n - 1 - y, y1 = x;
      const std::size_t x2 = n - 1 - x, y2 = n - 1 - y;
      const std::size_t x3 = y, y3 = n - 1 - x;
      t.at(0, y, x) = 0.25 * (base.at(0, y, x) + base.at(0, y1, x1) +
                              base.at(0, y2, x2) + base.at(0, y3, x3));
    }
  }
  return t;
}

}  // namespace

TEST_CASE("rroi_from_quad scales the enclosing rectangle by the stride") {
  // 80x40 px axis-aligned quad at stride 8 -> w=10, h=5 in map units
  const Quad q = *Quad::make({40, 80}, {120, 80}, {120, 120}, {40, 120});
  const RRoI roi = crpn::rroi_from_quad(q, 8.0);
  CHECK(roi.w == doctest::Approx(10.0));
  CHECK(roi.h == doctest::Approx(5.0));
  CHECK(roi.c == doctest::Approx(10.0));
  CHECK(roi.r == doctest::Approx(12.5));
  CHECK(roi.theta == doctest::Approx(0.0));

  // 45-degree square keeps theta = 45
  const double s = 40.0 * std::numbers::sqrt2;
  const Quad rot = *Quad::make({200, 200 - s / 2}, {200 + s / 2, 200},
                               {200, 200 + s / 2}, {200 - s / 2, 200});
  CHECK(crpn::rroi_from_quad(rot, 8.0).theta == doctest::Approx(45.0));

  crpn::Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    const RRoI r = crpn::rroi_from_quad(oracles::random_quad(rng), 8.0);
    CHECK(r.theta >= 0.0);
    CHECK(r.theta < 90.0);
  }
}

TEST_CASE("rroi_pool: the 4x4 quadrant example") {
  const Tensor f = iota_map_4x4();
  const RRoI roi{1.5, 1.5, 4.0, 4.0, 0.0};
  const PooledGrid g = crpn::rroi_pool(f, roi, 2, 2);
  CHECK(g.roi_overlapped);
  CHECK(g.values.at(0, 0, 0) == doctest::Approx(6.0));
  CHECK(g.values.at(0, 0, 1) == doctest::Approx(8.0));
  CHECK(g.values.at(0, 1, 0) == doctest::Approx(14.0));
  CHECK(g.values.at(0, 1, 1) == doctest::Approx(16.0));
}

TEST_CASE("rroi_pool: constant maps pool to the constant") {
  const Tensor f = Tensor::filled(2, 9, 9, 3.25);
  for (double theta : {0.0, 17.0, 45.0, 89.0}) {
    const RRoI roi{4.0, 4.0, 5.0, 3.0, theta};
    const PooledGrid g = crpn::rroi_pool(f, roi, 3, 3);
    for (double v : g.values.data()) CHECK(v == doctest::Approx(3.25));
  }
}

TEST_CASE("rroi_pool: monotone in the feature values") {
  crpn::Rng rng(29);
  Tensor f(1, 8, 8);
  for (double& v : f.data()) v = rng.uniform(0.0, 5.0);
  const RRoI roi{3.5, 3.5, 5.0, 6.0, 30.0};
  const PooledGrid before = crpn::rroi_pool(f, roi, 3, 3);
  Tensor bumped = f;
  bumped.at(0, 4, 4) += 2.0;
  const PooledGrid after = crpn::rroi_pool(bumped, roi, 3, 3);
  for (std::size_t i = 0; i < before.values.size(); ++i) {
    CHECK(after.values.data()[i] >= before.values.data()[i]);
  }
}

TEST_CASE("rroi_pool: homogeneous under nonnegative scaling") {
  crpn::Rng rng(31);
  Tensor f(2, 10, 10);
  for (double& v : f.data()) v = rng.uniform(-3.0, 7.0);
  // RoI pokes past the border so zero padding participates
  const RRoI roi{2.0, 8.0, 6.0, 7.0, 25.0};
  const double alpha = 2.75;
  Tensor scaled = f;
  for (double& v : scaled.data()) v *= alpha;
  const PooledGrid a = crpn::rroi_pool(f, roi, 4, 4);
  const PooledGrid b = crpn::rroi_pool(scaled, roi, 4, 4);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(b.values.data()[i] == doctest::Approx(alpha * a.values.data()[i]).epsilon(1e-9));
  }
}

TEST_CASE("rroi_pool: 90-degree symmetric map yields a 90-degree symmetric grid") {
  const Tensor f = rot90_symmetric_map(9);
  const RRoI roi{4.0, 4.0, 6.0, 6.0, 0.0};
  const std::size_t n = 4;
  const PooledGrid g = crpn::rroi_pool(f, roi, n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // (i, j) -> rotate the grid by 90 degrees -> (j, n-1-i)
      CHECK(g.values.at(0, i, j) ==
            doctest::Approx(g.values.at(0, j, n - 1 - i)).epsilon(1e-9));
    }
  }
}

TEST_CASE("rroi_pool: non-overlapping RoI returns a flagged zero grid") {
  const Tensor f = Tensor::filled(1, 4, 4, 9.0);
  const RRoI roi{100.0, 100.0, 3.0, 3.0, 0.0};
  const PooledGrid g = crpn::rroi_pool(f, roi, 2, 2);
  CHECK_FALSE(g.roi_overlapped);
  for (double v : g.values.data()) CHECK(v == 0.0);
}

TEST_CASE("rroi_pool: nearest sampling stays on grid values") {
  const Tensor f = iota_map_4x4();
  const RRoI roi{1.5, 1.5, 4.0, 4.0, 0.0};
  const PooledGrid g = crpn::rroi_pool(f, roi, 2, 2, crpn::PoolSampling::Nearest);
  CHECK(g.values.at(0, 1, 1) == doctest::Approx(16.0));
}

TEST_CASE("dual_of: substitution, fixed point, involution") {
  const RRoI roi{10, 20, 6, 12, 30};
  const RRoI d = crpn::dual_of(roi);
  CHECK(d.r == 10);
  CHECK(d.c == 20);
  CHECK(d.h == 12);
  CHECK(d.w == 6);
  CHECK(d.theta == doctest::Approx(60.0));

  const RRoI sq{5, 5, 4, 4, 45};
  const RRoI sd = crpn::dual_of(sq);
  CHECK(sd.h == 4);
  CHECK(sd.w == 4);
  CHECK(sd.theta == doctest::Approx(45.0));

  crpn::Rng rng(37);
  for (int i = 0; i < 1000; ++i) {
    // dyadic fractions of 90 keep 90 - theta representable, so the
    // involution can be checked bit-exactly
    const double theta = 90.0 * (static_cast<double>(rng.below(1 << 20)) / (1 << 20));
    const RRoI r{rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0), rng.uniform(1.0, 20.0),
                 rng.uniform(1.0, 20.0), theta};
    const RRoI dd = crpn::dual_of(crpn::dual_of(r));
    CHECK(dd.r == r.r);
    CHECK(dd.c == r.c);
    CHECK(dd.h == r.h);
    CHECK(dd.w == r.w);
    CHECK(dd.theta == r.theta);
  }
  // for arbitrary angles the round-trip is exact up to one rounding of 90-theta
  for (int i = 0; i < 1000; ++i) {
    const RRoI r{0, 0, 2, 3, rng.uniform(0.0, 90.0)};
    const RRoI dd = crpn::dual_of(crpn::dual_of(r));
    CHECK(dd.theta == doctest::Approx(r.theta).epsilon(1e-12));
  }
}

TEST_CASE("dual pooling: additive fusion and symmetric-map doubling") {
  crpn::Rng rng(41);
  Tensor f(3, 12, 12);
  for (double& v : f.data()) v = rng.uniform(0.0, 4.0);

  SUBCASE("fusion is the sum of the two independent pools") {
    const RRoI roi{5.0, 6.0, 4.0, 9.0, 33.0};
    const PooledGrid fused = crpn::dual_rroi_pool(f, roi, 5, 5);
    const PooledGrid a = crpn::rroi_pool(f, roi, 5, 5);
    const PooledGrid b = crpn::rroi_pool(f, crpn::dual_of(roi), 5, 5);
    for (std::size_t i = 0; i < fused.values.size(); ++i) {
      CHECK(fused.values.data()[i] ==
            doctest::Approx(a.values.data()[i] + b.values.data()[i]));
    }
  }
  SUBCASE("constant map: every fused cell is twice the constant") {
    const Tensor c = Tensor::filled(1, 10, 10, 1.5);
    const PooledGrid fused = crpn::dual_rroi_pool(c, {4.5, 4.5, 4.0, 7.0, 20.0}, 3, 3);
    for (double v : fused.values.data()) CHECK(v == doctest::Approx(3.0));
  }
  SUBCASE("theta=0 square RoI is self-dual: fusion is exactly twice one pool") {
    const Tensor sym = rot90_symmetric_map(9);
    const RRoI roi{4.0, 4.0, 6.0, 6.0, 0.0};
    const PooledGrid fused = crpn::dual_rroi_pool(sym, roi, 3, 3);
    const PooledGrid single = crpn::rroi_pool(sym, roi, 3, 3);
    for (std::size_t i = 0; i < fused.values.size(); ++i) {
      CHECK(fused.values.data()[i] == doctest::Approx(2.0 * single.values.data()[i]));
    }
  }
  SUBCASE("swapping the RoI with its dual fuses to the identical grid") {
    const RRoI roi{5.0, 6.0, 4.0, 9.0, 33.0};
    const PooledGrid ab = crpn::dual_rroi_pool(f, roi, 5, 5);
    const PooledGrid ba = crpn::dual_rroi_pool(f, crpn::dual_of(roi), 5, 5);
    for (std::size_t i = 0; i < ab.values.size(); ++i) {
      CHECK(ab.values.data()[i] == ba.values.data()[i]);
    }
  }
  SUBCASE("non-square grids are rejected") {
    CHECK_THROWS_AS(crpn::dual_rroi_pool(f, {5, 5, 3, 3, 0}, 3, 4), std::invalid_argument);
  }
}
