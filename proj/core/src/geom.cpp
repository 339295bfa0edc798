#include "yoloo/geom.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "yoloo/errors.hpp"

namespace yoloo {

namespace {

// Intersections with area below this are treated as empty.
constexpr double kMinArea = 1e-12;

using Polygon = std::vector<Point2>;

// Cross product sign of (b - a) x (p - a); positive when p is left of a->b.
double side(const Point2& a, const Point2& b, const Point2& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

Point2 intersect(const Point2& p, const Point2& q, const Point2& a,
                 const Point2& b) {
  const double sp = side(a, b, p);
  const double sq = side(a, b, q);
  const double t = sp / (sp - sq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

// Sutherland-Hodgman: clips `subject` against every edge of the convex,
// counter-clockwise `clip` polygon.
Polygon clip_convex(Polygon subject, const std::array<Point2, 4>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    Polygon out;
    out.reserve(subject.size() + 2);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2& cur = subject[i];
      const Point2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const bool cur_in = side(a, b, cur) >= 0.0;
      const bool prev_in = side(a, b, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) out.push_back(intersect(prev, cur, a, b));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(intersect(prev, cur, a, b));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace

double normalize_angle(double radians) {
  if (!std::isfinite(radians)) return radians;
  double a = std::fmod(radians, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

bool Box3D::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
         std::isfinite(yaw) && std::isfinite(l) && std::isfinite(w) &&
         std::isfinite(h) && l > 0.0 && w > 0.0 && h > 0.0;
}

void require_valid(const Box3D& box) {
  if (!box.valid()) {
    throw InvalidBoxError("invalid box: dims (" + std::to_string(box.l) + ", " +
                          std::to_string(box.w) + ", " + std::to_string(box.h) +
                          ") must be positive and all fields finite");
  }
}

GeomCost fgam(const Box3D& det, const Box3D& pred_track) {
  require_valid(det);
  require_valid(pred_track);
  const double dist = std::hypot(det.x - pred_track.x, det.y - pred_track.y);
  const double diag =
      std::min(std::hypot(det.l, det.w), std::hypot(pred_track.l, pred_track.w));
  return {dist / diag};
}

bool is_compatible(GeomCost cost) noexcept { return cost.value <= 1.0; }

double centroid_distance(const Box3D& a, const Box3D& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::array<Point2, 4> bev_corners(const Box3D& box) {
  require_valid(box);
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.l;
  const double hw = 0.5 * box.w;
  // Object-frame offsets: front-left, rear-left, rear-right, front-right.
  const std::array<Point2, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {box.x + c * local[i].x - s * local[i].y,
              box.y + s * local[i].x + c * local[i].y};
  }
  return out;
}

double polygon_area(const Point2* pts, std::size_t n) noexcept {
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = pts[i];
    const Point2& q = pts[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

double bev_iou(const Box3D& a, const Box3D& b) {
  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  const Polygon inter = clip_convex(Polygon(ca.begin(), ca.end()), cb);
  double area = std::abs(polygon_area(inter.data(), inter.size()));
  if (area < kMinArea) return 0.0;
  const double area_a = a.l * a.w;
  const double area_b = b.l * b.w;
  area = std::min(area, std::min(area_a, area_b));
  const double uni = area_a + area_b - area;
  return std::clamp(area / uni, 0.0, 1.0);
}

}  // namespace yoloo
