#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "trackid/association.hpp"
#include "trackid/errors.hpp"

using namespace trackid;

namespace {

Detection at(const BBox& b, FrameIndex f = 0) { return Detection{f, b, 1.0, {1.0}}; }

Sequence static_box(int frames, const BBox& b = {10, 10, 20, 20}) {
  Sequence s;
  for (int f = 0; f < frames; ++f) s.frames.push_back(FrameRecord{f, {}, {at(b, f)}, {}, false});
  return s;
}

/// Reference greedy: repeatedly take the globally best remaining pair above theta,
/// scanning candidates in (a, b) order so the first maximum wins ties.
std::vector<MatchPair> brute_force_greedy(const std::vector<Detection>& a,
                                          const std::vector<Detection>& b, double theta) {
  std::vector<bool> ua(a.size()), ub(b.size());
  std::vector<MatchPair> out;
  while (true) {
    double best = -1;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (ua[i]) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (ub[j]) continue;
        const double v = iou(a[i].box, b[j].box);
        if (v > theta && v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    if (best < 0) break;
    ua[bi] = ub[bj] = true;
    out.push_back({bi, bj});
  }
  return out;
}

}  // namespace

TEST_CASE("associate_frames examples") {
  const std::vector<Detection> a1 = {at({0, 0, 10, 10})};
  CHECK(associate_frames(a1, std::vector<Detection>{at({1, 1, 10, 10})}, 0.5) == std::vector<MatchPair>{{0, 0}});
  CHECK(associate_frames(a1, std::vector<Detection>{at({8, 8, 10, 10})}, 0.5).empty());
  const std::vector<Detection> a = {at({0, 0, 10, 10}), at({20, 20, 10, 10})};
  const std::vector<Detection> b = {at({1, 1, 10, 10}), at({19, 19, 10, 10})};
  auto m = associate_frames(a, b, 0.5);
  std::sort(m.begin(), m.end(), [](auto l, auto r) { return l.a < r.a; });
  CHECK(m == std::vector<MatchPair>{{0, 0}, {1, 1}});
  CHECK(associate_frames({}, b, 0.5).empty());
}

TEST_CASE("threshold is strict") {
  // IoU exactly 0.5: boxes (0,0,10,10) and (0,0,10,5)
  const std::vector<Detection> a = {at({0, 0, 10, 10})};
  const std::vector<Detection> b = {at({0, 0, 10, 5})};
  CHECK(associate_frames(a, b, 0.5).empty());
  CHECK(associate_frames(a, b, 0.49).size() == 1);
}

TEST_CASE("IoU ties break toward lower indices") {
  // Two identical candidates in b for one a.
  const std::vector<Detection> a = {at({0, 0, 10, 10})};
  const std::vector<Detection> b = {at({1, 0, 10, 10}), at({-1, 0, 10, 10})};
  CHECK(associate_frames(a, b, 0.5) == std::vector<MatchPair>{{0, 0}});
}

TEST_CASE("greedy matches brute force on random small grids") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pos(0, 40);
  std::uniform_int_distribution<int> n(0, 6);
  std::uniform_int_distribution<int> snap(0, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Detection> a, b;
    // Snapped positions make exact IoU ties common.
    auto box = [&] { return BBox{snap(rng) * 2.0, snap(rng) * 2.0, 10, 10}; };
    auto free_box = [&] { return BBox{pos(rng), pos(rng), 5 + pos(rng) / 2, 5 + pos(rng) / 2}; };
    const bool tie_heavy = trial % 2;
    for (int i = n(rng); i > 0; --i) a.push_back(at(tie_heavy ? box() : free_box()));
    for (int i = n(rng); i > 0; --i) b.push_back(at(tie_heavy ? box() : free_box()));
    const double theta = (trial % 4) * 0.25;
    CHECK(associate_frames(a, b, theta) == brute_force_greedy(a, b, theta));
  }
}

TEST_CASE("build_tracklets examples") {
  Sequence one;
  one.frames.push_back(FrameRecord{0, {}, {at({0, 0, 10, 10}), at({50, 50, 10, 10})}, {}, false});
  const auto singles = build_tracklets(one, {});
  CHECK(singles.size() == 2);

  const auto five = build_tracklets(static_box(5), {5, 1, 0.5});
  REQUIRE(five.size() == 1);
  CHECK(five[0].length() == 5);

  const auto ten = build_tracklets(static_box(10), {5, 1, 0.5});
  REQUIRE(ten.size() == 2);
  CHECK(ten[0].length() == 5);
  CHECK(ten[1].length() == 5);
  CHECK(ten[1].members.front().frame == 5);

  Sequence teleport;
  for (int f = 0; f < 3; ++f) teleport.frames.push_back(FrameRecord{f, {}, {at({f * 100.0, 0, 10, 10}, f)}, {}, false});
  CHECK(build_tracklets(teleport, {}).size() == 3);
}

TEST_CASE("stride, gaps and degenerate parameters") {
  // Stride 2 over frames 0..6: grid frames 0,2,4,6 chain; 1,3,5 stay singletons.
  const auto strided = build_tracklets(static_box(7), {5, 2, 0.5});
  REQUIRE(strided.size() == 4);
  CHECK(strided[0].members == std::vector<DetectionRef>{{0, 0}, {2, 0}, {4, 0}, {6, 0}});
  for (std::size_t i = 1; i < 4; ++i) CHECK(strided[i].length() == 1);

  // A missing frame breaks the chain.
  Sequence gap = static_box(6);
  gap.frames.erase(gap.frames.begin() + 3);
  const auto g = build_tracklets(gap, {10, 1, 0.5});
  REQUIRE(g.size() == 2);
  CHECK(g[0].length() == 3);
  CHECK(g[1].length() == 2);

  CHECK(build_tracklets(static_box(6), {1, 1, 0.5}).size() == 6);
  CHECK(build_tracklets(static_box(6), {5, 1, 1.0}).size() == 6);

  CHECK_THROWS_AS(build_tracklets(static_box(2), {0, 1, 0.5}), ConfigError);
  CHECK_THROWS_AS(build_tracklets(static_box(2), {1, 0, 0.5}), ConfigError);
  CHECK_THROWS_AS(build_tracklets(static_box(2), {1, 1, 1.5}), ConfigError);
}

TEST_CASE("build_tracklets invariants on random sequences") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> jitter(-3, 3);
  std::uniform_int_distribution<int> n(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    Sequence s;
    const int frames = 1 + trial % 15;
    std::vector<BBox> anchors;
    for (int i = 0; i < 6; ++i) anchors.push_back({i * 25.0, (i % 2) * 30.0, 20, 20});
    for (int f = 0; f < frames; ++f) {
      if (trial % 3 == 0 && f % 5 == 4) continue;  // gaps
      FrameRecord r{f, {}, {}, {}, false};
      for (int d = n(rng); d > 0; --d) {
        BBox b = anchors[static_cast<std::size_t>(d)];
        b.x += jitter(rng);
        b.y += jitter(rng);
        r.detections.push_back(at(b, f));
      }
      s.frames.push_back(std::move(r));
    }
    const TrackletParams p{1 + trial % 6, 1 + trial % 3, 0.25 * (trial % 4)};
    const auto tracklets = build_tracklets(s, p);

    std::size_t total = 0;
    std::set<DetectionRef> seen;
    for (const auto& t : tracklets) {
      REQUIRE(t.length() >= 1);
      CHECK(t.length() <= static_cast<std::size_t>(p.max_len));
      total += t.length();
      for (std::size_t i = 0; i < t.members.size(); ++i) {
        CHECK(seen.insert(t.members[i]).second);
        if (i == 0) continue;
        const auto& prev = t.members[i - 1];
        const auto& cur = t.members[i];
        CHECK(cur.frame - prev.frame == p.stride);
        const auto& da = s.frames[*s.find_frame(prev.frame)].detections[prev.index];
        const auto& db = s.frames[*s.find_frame(cur.frame)].detections[cur.index];
        CHECK(iou(da.box, db.box) > p.theta);
      }
    }
    CHECK(total == s.detection_count());
    CHECK(build_tracklets(s, p) == tracklets);
  }
}
