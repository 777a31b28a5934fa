#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

namespace crpn {

/// Image coordinates: x grows rightward, y grows downward (pixel convention).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

/// The four corner roles of a text box. Array indices throughout the library
/// follow this order.
enum class Corner : int { TopLeft = 0, TopRight = 1, BotRight = 2, BotLeft = 3 };
inline constexpr int kNumCorners = 4;
inline constexpr std::array<Corner, 4> kAllCorners = {
    Corner::TopLeft, Corner::TopRight, Corner::BotRight, Corner::BotLeft};

const char* corner_name(Corner c);

/// Diagonal partner: tl<->br, tr<->bl.
inline Corner diagonal_partner(Corner c) {
  return static_cast<Corner>((static_cast<int>(c) + 2) % 4);
}

/// Convex quadrilateral with role-labeled vertices in cyclic order
/// (top_left, top_right, bot_right, bot_left). Construction validates that
/// the two diagonals strictly intersect, which for a 4-gon in this vertex
/// order is equivalent to simple + strictly convex.
class Quad {
 public:
  static std::optional<Quad> make(Point tl, Point tr, Point br, Point bl);

  const Point& at(Corner c) const { return v_[static_cast<int>(c)]; }
  const std::array<Point, 4>& vertices() const { return v_; }

  const Point& tl() const { return v_[0]; }
  const Point& tr() const { return v_[1]; }
  const Point& br() const { return v_[2]; }
  const Point& bl() const { return v_[3]; }

  friend bool operator==(const Quad& a, const Quad& b) { return a.v_ == b.v_; }
  /// Lexicographic vertex order; gives quads a deterministic total order.
  friend bool operator<(const Quad& a, const Quad& b);

 private:
  explicit Quad(std::array<Point, 4> v) : v_(v) {}
  std::array<Point, 4> v_;
};

/// Rotated rectangle five-tuple. (r, c) is the center as (row=y, col=x);
/// w extends along direction theta, h perpendicular to it;
/// theta in degrees, normalized to [0, 90).
struct RotatedRect {
  double r = 0.0;
  double c = 0.0;
  double h = 0.0;
  double w = 0.0;
  double theta = 0.0;
};

/// Angle of the vector p->q from the positive x axis, in [0, 2*pi).
/// Throws std::invalid_argument when p == q.
double angle_of(Point p, Point q);

/// Discretizes the direction p->q into one of K bins:
/// bin = ceil(K * angle / (2*pi)), clamped to 1 so that bin 0 stays reserved
/// for the background class. Result in 1..K.
int discretize_direction(Point p, Point q, int bins);

/// min(|a-b|, K-|a-b|): distance between direction bins on the K-cycle.
int circular_bin_distance(int a, int b, int bins);

/// Strict interior intersection of segments a1-a2 and b1-b2. Collinear,
/// touching-at-endpoint and disjoint configurations all return nullopt.
std::optional<Point> segment_intersection(Point a1, Point a2, Point b1, Point b2);

/// Shoelace area of the quad (positive).
double quad_area(const Quad& q);

/// Intersection-over-union of two convex quads via Sutherland-Hodgman
/// clipping. Symmetric bit-exactly (operands are ordered internally).
double quad_iou(const Quad& a, const Quad& b);

/// Smallest-area enclosing rotated rectangle. Exact for convex input: the
/// optimum is flush with one of the four edges. theta normalized to [0, 90)
/// by swapping h and w when needed.
RotatedRect min_area_rect(const Quad& q);

/// Corner points of a rotated rect in tl,tr,br,bl order of its own frame.
std::array<Point, 4> rect_corners(const RotatedRect& r);

}  // namespace crpn
