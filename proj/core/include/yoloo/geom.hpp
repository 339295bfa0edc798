#pragma once

#include <array>

namespace yoloo {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// Oriented 3D box in the tracker's ground frame: x forward, y left, z up.
/// Length runs along the heading, width across it. Yaw is kept in (-pi, pi].
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;
  double yaw = 0.0;

  Box3D() = default;
  Box3D(double x_, double y_, double z_, double l_, double w_, double h_,
        double yaw_)
      : x(x_), y(y_), z(z_), l(l_), w(w_), h(h_), yaw(normalize_angle(yaw_)) {}

  bool valid() const noexcept;

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

/// Throws InvalidBoxError unless all dimensions are positive and finite.
void require_valid(const Box3D& box);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Normalized BEV center distance; dimensionless and non-negative.
struct GeomCost {
  double value = 0.0;
};

/// BEV center distance divided by the smaller of the two BEV footprint
/// diagonals. Symmetric; ignores z, h and yaw.
GeomCost fgam(const Box3D& det, const Box3D& pred_track);

/// A pair is a candidate match unless its cost exceeds 1.
bool is_compatible(GeomCost cost) noexcept;

double centroid_distance(const Box3D& a, const Box3D& b) noexcept;

/// Counter-clockwise footprint corners starting at the front-left corner.
std::array<Point2, 4> bev_corners(const Box3D& box);

/// Intersection-over-union of the two rotated BEV rectangles.
double bev_iou(const Box3D& a, const Box3D& b);

/// Signed shoelace area (positive for counter-clockwise winding).
double polygon_area(const Point2* pts, std::size_t n) noexcept;

}  // namespace yoloo
