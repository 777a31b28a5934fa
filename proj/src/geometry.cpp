#include "crpn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace crpn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Signed distance of p from the directed line e1->e2, in pixel units.
/// Positive on the interior side for positively-oriented polygons.
double edge_distance(Point e1, Point e2, Point p) {
  const double len = std::hypot(e2.x - e1.x, e2.y - e1.y);
  return cross(e1, e2, p) / len;
}

double polygon_area(const std::vector<Point>& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return std::abs(s) * 0.5;
}

// Clips `subject` by one directed edge of the clip polygon. On-edge points
// (within kClipEps pixels) count as inside so identical quads survive intact.
constexpr double kClipEps = 1e-9;

std::vector<Point> clip_by_edge(const std::vector<Point>& subject, Point e1, Point e2) {
  std::vector<Point> out;
  out.reserve(subject.size() + 2);
  const std::size_t n = subject.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point cur = subject[i];
    const Point prev = subject[(i + n - 1) % n];
    const double dc = edge_distance(e1, e2, cur);
    const double dp = edge_distance(e1, e2, prev);
    const bool in_c = dc >= -kClipEps;
    const bool in_p = dp >= -kClipEps;
    if (in_c) {
      if (!in_p) {
        const double t = dp / (dp - dc);
        out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
      out.push_back(cur);
    } else if (in_p) {
      const double t = dp / (dp - dc);
      out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
    }
  }
  return out;
}

/// Area of the intersection of two convex polygons, both with positive
/// orientation in image coordinates (tl,tr,br,bl order has positive shoelace
/// sign with y pointing down).
double convex_intersection_area(const std::array<Point, 4>& a,
                                const std::array<Point, 4>& b) {
  std::vector<Point> poly(a.begin(), a.end());
  for (int e = 0; e < 4 && !poly.empty(); ++e) {
    poly = clip_by_edge(poly, b[e], b[(e + 1) % 4]);
  }
  if (poly.size() < 3) return 0.0;
  return polygon_area(poly);
}

}  // namespace

const char* corner_name(Corner c) {
  switch (c) {
    case Corner::TopLeft: return "tl";
    case Corner::TopRight: return "tr";
    case Corner::BotRight: return "br";
    case Corner::BotLeft: return "bl";
  }
  return "?";
}

bool operator<(const Quad& a, const Quad& b) {
  for (int i = 0; i < 4; ++i) {
    if (a.v_[i].x != b.v_[i].x) return a.v_[i].x < b.v_[i].x;
    if (a.v_[i].y != b.v_[i].y) return a.v_[i].y < b.v_[i].y;
  }
  return false;
}

std::optional<Quad> Quad::make(Point tl, Point tr, Point br, Point bl) {
  const std::array<Point, 4> v = {tl, tr, br, bl};
  for (const Point& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
  }
  // Strictly intersecting diagonals <=> simple, strictly convex quad.
  if (!segment_intersection(tl, br, tr, bl)) return std::nullopt;
  return Quad(v);
}

double angle_of(Point p, Point q) {
  if (p == q) throw std::invalid_argument("angle_of: degenerate segment");
  double a = std::atan2(q.y - p.y, q.x - p.x);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

int discretize_direction(Point p, Point q, int bins) {
  if (bins < 2) throw std::invalid_argument("discretize_direction: bins must be >= 2");
  const double theta = angle_of(p, q);
  int bin = static_cast<int>(std::ceil(static_cast<double>(bins) * theta / kTwoPi));
  // theta == 0 falls into bin 0, which is reserved for background.
  bin = std::clamp(bin, 1, bins);
  return bin;
}

int circular_bin_distance(int a, int b, int bins) {
  if (bins < 1) throw std::invalid_argument("circular_bin_distance: bins must be >= 1");
  const int d = std::abs(a - b);
  return std::min(d, bins - d);
}

std::optional<Point> segment_intersection(Point a1, Point a2, Point b1, Point b2) {
  const double d1 = cross(b1, b2, a1);
  const double d2 = cross(b1, b2, a2);
  const double d3 = cross(a1, a2, b1);
  const double d4 = cross(a1, a2, b2);
  // Strict interior crossing only: touching or collinear cases return nullopt.
  if (((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
      ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))) {
    const double t = d1 / (d1 - d2);
    return Point{a1.x + t * (a2.x - a1.x), a1.y + t * (a2.y - a1.y)};
  }
  return std::nullopt;
}

double quad_area(const Quad& q) {
  const auto& v = q.vertices();
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % 4];
    s += a.x * b.y - b.x * a.y;
  }
  return std::abs(s) * 0.5;
}

double quad_iou(const Quad& a, const Quad& b) {
  // Order operands deterministically so iou(a, b) == iou(b, a) bit-exactly.
  const Quad& first = (b < a) ? b : a;
  const Quad& second = (b < a) ? a : b;
  const double inter = convex_intersection_area(first.vertices(), second.vertices());
  if (inter <= 0.0) return 0.0;
  const double uni = quad_area(first) + quad_area(second) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

RotatedRect min_area_rect(const Quad& q) {
  const auto& v = q.vertices();
  // The minimum-area enclosing rectangle of a convex polygon is flush with
  // one of its edges; with four vertices it suffices to test the four edges.
  double best_area = std::numeric_limits<double>::infinity();
  RotatedRect best;
  for (int e = 0; e < 4; ++e) {
    const Point p0 = v[e];
    const Point p1 = v[(e + 1) % 4];
    const double len = std::hypot(p1.x - p0.x, p1.y - p0.y);
    if (len == 0.0) continue;
    const Point dir{(p1.x - p0.x) / len, (p1.y - p0.y) / len};
    const Point perp{-dir.y, dir.x};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double tmin = umin, tmax = -umin;
    for (const Point& p : v) {
      const double u = p.x * dir.x + p.y * dir.y;
      const double t = p.x * perp.x + p.y * perp.y;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
    }
    const double w = umax - umin;
    const double h = tmax - tmin;
    const double area = w * h;
    if (area < best_area) {
      best_area = area;
      const double uc = 0.5 * (umin + umax);
      const double tc = 0.5 * (tmin + tmax);
      const Point center{uc * dir.x + tc * perp.x, uc * dir.y + tc * perp.y};
      double theta = std::atan2(dir.y, dir.x) * 180.0 / std::numbers::pi;
      double rw = w, rh = h;
      // Normalize theta into [0, 180) first, then fold into [0, 90) by
      // swapping the roles of w and h.
      while (theta < 0.0) theta += 180.0;
      while (theta >= 180.0) theta -= 180.0;
      if (theta >= 90.0) {
        theta -= 90.0;
        std::swap(rw, rh);
      }
      best = RotatedRect{center.y, center.x, rh, rw, theta};
    }
  }
  if (!std::isfinite(best_area)) throw std::invalid_argument("min_area_rect: degenerate quad");
  return best;
}

std::array<Point, 4> rect_corners(const RotatedRect& r) {
  const double rad = r.theta * std::numbers::pi / 180.0;
  const Point dir{std::cos(rad), std::sin(rad)};
  const Point perp{-dir.y, dir.x};
  const Point c{r.c, r.r};
  const double hw = 0.5 * r.w;
  const double hh = 0.5 * r.h;
  return {
      Point{c.x - hw * dir.x - hh * perp.x, c.y - hw * dir.y - hh * perp.y},
      Point{c.x + hw * dir.x - hh * perp.x, c.y + hw * dir.y - hh * perp.y},
      Point{c.x + hw * dir.x + hh * perp.x, c.y + hw * dir.y + hh * perp.y},
      Point{c.x - hw * dir.x + hh * perp.x, c.y - hw * dir.y + hh * perp.y},
  };
}

}  // namespace crpn
