#pragma once

// Axis-aligned box arithmetic in image pixel coordinates.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ibtrack {

struct Point
{
  double cx = 0.0;
  double cy = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Box stored as (x_min, y_min, width, height). Width and height are strictly
/// positive and every field is finite; construction throws otherwise.
class BBox
{
public:
  BBox(double x_min, double y_min, double width, double height)
    : x_(x_min), y_(y_min), w_(width), h_(height)
  {
    if (!std::isfinite(x_) || !std::isfinite(y_) || !std::isfinite(w_) || !std::isfinite(h_)) {
      throw std::invalid_argument("bbox fields must be finite");
    }
    if (!(w_ > 0.0) || !(h_ > 0.0)) {
      throw std::invalid_argument("bbox width and height must be positive");
    }
  }

  double x_min() const { return x_; }
  double y_min() const { return y_; }
  double width() const { return w_; }
  double height() const { return h_; }
  double x_max() const { return x_ + w_; }
  double y_max() const { return y_ + h_; }

  friend bool operator==(const BBox&, const BBox&) = default;

private:
  double x_;
  double y_;
  double w_;
  double h_;
};

inline double area(const BBox& b) { return b.width() * b.height(); }

inline Point center(const BBox& b)
{
  return {b.x_min() + b.width() / 2.0, b.y_min() + b.height() / 2.0};
}

inline BBox translate(const BBox& b, double dx, double dy)
{
  return {b.x_min() + dx, b.y_min() + dy, b.width(), b.height()};
}

inline double intersection_area(const BBox& a, const BBox& b)
{
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  return iw * ih;
}

/// Intersection over union; 0 for disjoint boxes, 1 for identical ones.
inline double iou(const BBox& a, const BBox& b)
{
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) {
    return 0.0;
  }
  // Areas from edges, same arithmetic as the intersection, so iou(a, a) == 1 exactly.
  const double area_a = (a.x_max() - a.x_min()) * (a.y_max() - a.y_min());
  const double area_b = (b.x_max() - b.x_min()) * (b.y_max() - b.y_min());
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline double distance(const Point& p, const Point& q)
{
  return std::hypot(p.cx - q.cx, p.cy - q.cy);
}

inline double diagonal(const BBox& b) { return std::hypot(b.width(), b.height()); }

inline std::string to_string(const BBox& b)
{
  return "(" + std::to_string(b.x_min()) + "," + std::to_string(b.y_min()) + "," +
         std::to_string(b.width()) + "," + std::to_string(b.height()) + ")";
}

}  // namespace ibtrack
