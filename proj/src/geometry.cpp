#include "trackid/geometry.hpp"

#include <algorithm>
#include <string>

#include "trackid/errors.hpp"

namespace trackid {

double area(const BBox& b) { return b.w * b.h; }

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  // Extents from edges, like the intersection, so iou(a, a) is exactly 1.
  const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
  const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

void require_ratio(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw OutOfRange(std::string(name) + " = " + std::to_string(v) + " is outside [0,1]");
  }
}

}  // namespace

BBox from_normalized(double cx, double cy, double w, double h, double img_w, double img_h) {
  require_ratio(cx, "cx");
  require_ratio(cy, "cy");
  require_ratio(w, "w");
  require_ratio(h, "h");
  if (!(img_w > 0.0) || !(img_h > 0.0)) {
    throw OutOfRange("image dimensions must be positive");
  }
  return BBox{(cx - w / 2.0) * img_w, (cy - h / 2.0) * img_h, w * img_w, h * img_h};
}

NormalizedBox to_normalized(const BBox& b, double img_w, double img_h) {
  return NormalizedBox{(b.x + b.w / 2.0) / img_w, (b.y + b.h / 2.0) / img_h, b.w / img_w,
                       b.h / img_h};
}

}  // namespace trackid
