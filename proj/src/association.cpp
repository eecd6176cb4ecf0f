#include "trackid/association.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "trackid/errors.hpp"

namespace trackid {

void TrackletParams::validate() const {
  if (max_len < 1) throw ConfigError("max-len must be >= 1, got " + std::to_string(max_len));
  if (stride < 1) throw ConfigError("stride must be >= 1, got " + std::to_string(stride));
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("theta must lie in [0,1], got " + std::to_string(theta));
  }
}

std::vector<MatchPair> associate_frames(std::span<const Detection> dets_a,
                                        std::span<const Detection> dets_b, double theta) {
  struct Candidate {
    double iou;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < dets_a.size(); ++i) {
    for (std::size_t j = 0; j < dets_b.size(); ++j) {
      const double v = iou(dets_a[i].box, dets_b[j].box);
      if (v > theta) candidates.push_back({v, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    if (l.iou != r.iou) return l.iou > r.iou;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  std::vector<bool> used_a(dets_a.size(), false);
  std::vector<bool> used_b(dets_b.size(), false);
  std::vector<MatchPair> out;
  for (const auto& c : candidates) {
    if (used_a[c.a] || used_b[c.b]) continue;
    used_a[c.a] = used_b[c.b] = true;
    out.push_back({c.a, c.b});
  }
  return out;
}

std::vector<Tracklet> build_tracklets(const Sequence& s, const TrackletParams& p) {
  p.validate();
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

  std::vector<Tracklet> tracklets;
  std::vector<std::vector<std::size_t>> owner(s.frames.size());
  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    owner[fi].assign(s.frames[fi].detections.size(), kUnassigned);
  }
  if (s.frames.empty()) return tracklets;

  const FrameIndex anchor = s.frames.front().index;
  const auto max_len = static_cast<std::size_t>(p.max_len);

  auto start_chain = [&](std::size_t fi, std::size_t di) {
    owner[fi][di] = tracklets.size();
    tracklets.push_back(Tracklet{{DetectionRef{s.frames[fi].index, di}}});
  };

  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    const FrameRecord& frame = s.frames[fi];
    for (std::size_t di = 0; di < frame.detections.size(); ++di) {
      if (owner[fi][di] == kUnassigned) start_chain(fi, di);
    }
    if ((frame.index - anchor) % p.stride != 0) continue;
    const auto partner = s.find_frame(frame.index + p.stride);
    if (!partner) continue;

    const auto& next = s.frames[*partner];
    for (const MatchPair& m : associate_frames(frame.detections, next.detections, p.theta)) {
      const std::size_t tid = owner[fi][m.a];
      if (tracklets[tid].length() < max_len) {
        owner[*partner][m.b] = tid;
        tracklets[tid].members.push_back(DetectionRef{next.index, m.b});
      } else {
        start_chain(*partner, m.b);
      }
    }
  }

  std::sort(tracklets.begin(), tracklets.end(), [](const Tracklet& l, const Tracklet& r) {
    return l.members.front() < r.members.front();
  });
  return tracklets;
}

void write_tracklet_dump(const std::vector<Tracklet>& tracklets, std::ostream& out) {
  out << "tracklet_id,frame,det_index\n";
  for (std::size_t t = 0; t < tracklets.size(); ++t) {
    for (const auto& m : tracklets[t].members) out << t << ',' << m.frame << ',' << m.index << '\n';
  }
}

}  // namespace trackid
