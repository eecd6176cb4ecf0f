#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trackid/model.hpp"

namespace trackid {

struct TrackletParams {
  int max_len = 5;
  int stride = 1;
  /// Pairs associate only when IoU is strictly greater than theta.
  double theta = 0.5;

  /// Throws ConfigError unless max_len >= 1, stride >= 1 and theta in [0,1].
  void validate() const;
};

/// Position of a detection inside a Sequence.
struct DetectionRef {
  FrameIndex frame = 0;
  std::size_t index = 0;

  friend auto operator<=>(const DetectionRef&, const DetectionRef&) = default;
};

struct Tracklet {
  /// Ordered by frame; consecutive members are exactly `stride` frames apart.
  std::vector<DetectionRef> members;

  std::size_t length() const { return members.size(); }
  friend bool operator==(const Tracklet&, const Tracklet&) = default;
};

struct MatchPair {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Greedy unique matching by descending IoU. A pair is accepted when IoU > theta and
/// neither side is taken yet. IoU ties resolve by lower `a`, then lower `b`.
/// Result is in acceptance order.
std::vector<MatchPair> associate_frames(std::span<const Detection> dets_a,
                                        std::span<const Detection> dets_b, double theta);

/// Chain detections across frames exactly `stride` apart, starting from the first frame
/// of the sequence. Frames off the stride grid, and frames whose partner frame is absent,
/// yield singletons. A chain that reaches max_len is closed; a later match onto it starts
/// a new chain. Every detection lands in exactly one tracklet.
/// Output is ordered by (first member frame, first member index).
std::vector<Tracklet> build_tracklets(const Sequence& s, const TrackletParams& p);

/// Debug dump: header `tracklet_id,frame,det_index`, then one line per member.
void write_tracklet_dump(const std::vector<Tracklet>& tracklets, std::ostream& out);

}  // namespace trackid
