// SPDX-License-Identifier: Apache-2.0
#include "geometry.h"

#include <cmath>

namespace geo {

double Distance(const Point& a, const Point& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

bool Contains(const Rect& r, const Point& p) {
  DCHECK_LE(r.left, r.right);
  return p.x >= r.left && p.x <= r.right && p.y >= r.bottom && p.y <= r.top;
}

Rect Intersect(const Rect& a, const Rect& b) {
  VLOG(3) << "intersect " << a.DebugString() << " " << b.DebugString();
  Rect out;
  out.left = std::max(a.left, b.left);
  out.right = std::min(a.right, b.right);
  out.bottom = std::max(a.bottom, b.bottom);
  out.top = std::min(a.top, b.top);
  if (out.left > out.right || out.bottom > out.top) {
    VLOG(2) << "empty intersection";
    return Rect{};
  }
  return out;
}

double PolygonArea(const std::vector<Point>& pts) {
  TRACE_EVENT("geo", "PolygonArea");
  if (pts.size() < 3) {
    LOG(WARNING) << "degenerate polygon with " << pts.size() << " points";
    return 0;
  }
  double area = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const Point& q = pts[(i + 1) % pts.size()];
    area += p.x * q.y - q.x * p.y;
  }
  metrics::Counter("geo/polygons")->Increment();
  return std::fabs(area) / 2;
}

}  // namespace geo
