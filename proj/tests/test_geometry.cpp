#include <doctest.h>

#include <random>

#include "trackid/errors.hpp"
#include "trackid/geometry.hpp"

using namespace trackid;

TEST_CASE("area") {
  CHECK(area({0, 0, 10, 10}) == 100.0);
  CHECK(area({5, 5, 0, 10}) == 0.0);
  CHECK(area({1.5, 2.5, 3.0, 4.0}) == 12.0);
}

TEST_CASE("iou worked values") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0);
  // intersection 2, union 6
  CHECK(iou({0, 0, 2, 2}, {1, 0, 2, 2}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // intersection 81, union 200 - 81
  CHECK(iou({0, 0, 10, 10}, {1, 1, 10, 10}) == doctest::Approx(81.0 / 119.0).epsilon(1e-15));
  // touching edges do not overlap
  CHECK(iou({0, 0, 10, 10}, {10, 0, 10, 10}) == 0.0);
}

TEST_CASE("iou of degenerate boxes is zero, not NaN") {
  CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
  CHECK(iou({3, 3, 0, 5}, {3, 3, 0, 5}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 5, 0, 0}) == 0.0);
}

TEST_CASE("from_normalized") {
  CHECK(from_normalized(0.5, 0.5, 1.0, 1.0, 1280, 720) == BBox{0, 0, 1280, 720});
  CHECK(from_normalized(0.5, 0.5, 0.1, 0.1, 1280, 720) == BBox{576, 324, 128, 72});
  CHECK_THROWS_AS(from_normalized(1.2, 0.5, 0.1, 0.1, 1280, 720), OutOfRange);
  CHECK_THROWS_AS(from_normalized(0.5, -0.01, 0.1, 0.1, 1280, 720), OutOfRange);
  CHECK_THROWS_AS(from_normalized(0.5, 0.5, 0.1, 0.1, 0, 720), OutOfRange);
}

TEST_CASE("iou properties over random boxes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-50, 150);
  std::uniform_real_distribution<double> size(0, 60);
  std::uniform_real_distribution<double> shift(-1000, 1000);
  for (int i = 0; i < 5000; ++i) {
    const BBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (area(a) > 0) CHECK(iou(a, a) == 1.0);
    const double dx = shift(rng), dy = shift(rng);
    const BBox as{a.x + dx, a.y + dy, a.w, a.h};
    const BBox bs{b.x + dx, b.y + dy, b.w, b.h};
    CHECK(std::abs(iou(as, bs) - v) <= 1e-12);
  }
}

TEST_CASE("normalized round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const double w = u(rng), h = u(rng);
    const double cx = w / 2 + (1 - w) * u(rng);
    const double cy = h / 2 + (1 - h) * u(rng);
    const BBox b = from_normalized(cx, cy, w, h, 1280, 720);
    const NormalizedBox n = to_normalized(b, 1280, 720);
    CHECK(std::abs(n.cx - cx) <= 1e-9);
    CHECK(std::abs(n.cy - cy) <= 1e-9);
    CHECK(std::abs(n.w - w) <= 1e-9);
    CHECK(std::abs(n.h - h) <= 1e-9);
  }
}
