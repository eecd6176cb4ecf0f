#pragma once

namespace trackid {

/// Axis-aligned box in continuous pixel coordinates, top-left origin.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

double area(const BBox& b);

/// Intersection over union. Two zero-area boxes give 0 rather than NaN.
double iou(const BBox& a, const BBox& b);

/// Darknet label convention: normalized centre and size to pixel box.
/// Throws OutOfRange when a ratio lies outside [0,1] or the image size is not positive.
BBox from_normalized(double cx, double cy, double w, double h, double img_w, double img_h);

struct NormalizedBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Inverse of from_normalized.
NormalizedBox to_normalized(const BBox& b, double img_w, double img_h);

}  // namespace trackid
