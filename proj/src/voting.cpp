#include "trackid/voting.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "trackid/errors.hpp"
#include "trackid/ingest.hpp"

namespace trackid {

std::string_view to_string(VoteScheme scheme) {
  return scheme == VoteScheme::Average ? "average" : "maximum";
}

VoteScheme parse_vote_scheme(std::string_view text) {
  if (text == "avg" || text == "average") return VoteScheme::Average;
  if (text == "max" || text == "maximum") return VoteScheme::Maximum;
  throw ConfigError("unknown vote scheme '" + std::string(text) + "' (expected avg or max)");
}

namespace {

const Detection& resolve(const Sequence& s, const DetectionRef& ref) {
  const auto fi = s.find_frame(ref.frame);
  if (!fi || ref.index >= s.frames[*fi].detections.size()) {
    throw DanglingReference("tracklet member (frame " + std::to_string(ref.frame) + ", index " +
                            std::to_string(ref.index) + ") is not in the sequence");
  }
  return s.frames[*fi].detections[ref.index];
}

}  // namespace

VotedIdentity vote(const Tracklet& t, const Sequence& s, VoteScheme scheme) {
  if (t.members.empty()) throw DanglingReference("tracklet has no members");

  if (scheme == VoteScheme::Maximum) {
    // Scan members in (frame, index) order so ties across members do not depend on
    // member order; across classes the lowest index wins.
    std::vector<DetectionRef> order = t.members;
    std::sort(order.begin(), order.end());
    ClassScore best{0, -std::numeric_limits<double>::infinity()};
    for (const auto& ref : order) {
      const ClassScore c = top_class(resolve(s, ref));
      if (c.score > best.score || (c.score == best.score && c.class_index < best.class_index)) {
        best = c;
      }
    }
    return VotedIdentity{best.class_index, best.score};
  }

  std::vector<double> sum;
  std::vector<DetectionRef> order = t.members;
  std::sort(order.begin(), order.end());
  for (const auto& ref : order) {
    const Detection& d = resolve(s, ref);
    if (d.scores.empty()) throw EmptyScores();
    if (sum.empty()) sum.assign(d.scores.size(), 0.0);
    if (d.scores.size() != sum.size()) {
      throw DanglingReference("tracklet members disagree on score-vector length");
    }
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += d.scores[c];
  }
  const double n = static_cast<double>(order.size());
  for (double& v : sum) v /= n;
  const ClassScore c = argmax(sum);
  return VotedIdentity{c.class_index, c.score};
}

std::vector<LabeledDetection> relabel(const Sequence& s, const std::vector<Tracklet>& tracklets,
                                      VoteScheme scheme) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> owner(s.frames.size());
  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    owner[fi].assign(s.frames[fi].detections.size(), kNone);
  }
  for (std::size_t t = 0; t < tracklets.size(); ++t) {
    for (const auto& ref : tracklets[t].members) {
      const auto fi = s.find_frame(ref.frame);
      if (!fi || ref.index >= owner[*fi].size()) {
        throw PartitionError("tracklet " + std::to_string(t) + " references missing detection (frame " +
                             std::to_string(ref.frame) + ", index " + std::to_string(ref.index) + ")");
      }
      if (owner[*fi][ref.index] != kNone) {
        throw PartitionError("detection (frame " + std::to_string(ref.frame) + ", index " +
                             std::to_string(ref.index) + ") belongs to two tracklets");
      }
      owner[*fi][ref.index] = t;
    }
  }

  std::vector<VotedIdentity> votes;
  votes.reserve(tracklets.size());
  for (const auto& t : tracklets) votes.push_back(vote(t, s, scheme));

  std::vector<LabeledDetection> out;
  out.reserve(s.detection_count());
  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    const FrameRecord& f = s.frames[fi];
    for (std::size_t di = 0; di < f.detections.size(); ++di) {
      const std::size_t t = owner[fi][di];
      if (t == kNone) {
        throw PartitionError("detection (frame " + std::to_string(f.index) + ", index " +
                             std::to_string(di) + ") is not covered by any tracklet");
      }
      const Detection& d = f.detections[di];
      out.push_back(LabeledDetection{d, di, votes[t].class_index, d.objectness * votes[t].vote_score});
    }
  }
  return out;
}

std::vector<LabeledDetection> label_single_frame(const Sequence& s) {
  std::vector<LabeledDetection> out;
  out.reserve(s.detection_count());
  for (const auto& f : s.frames) {
    for (std::size_t di = 0; di < f.detections.size(); ++di) {
      const Detection& d = f.detections[di];
      const ClassScore c = top_class(d);
      out.push_back(LabeledDetection{d, di, c.class_index, d.objectness * c.score});
    }
  }
  return out;
}

void serialize_labeled_stream(const std::vector<LabeledDetection>& labeled, std::ostream& out) {
  for (const auto& l : labeled) {
    std::string rec = detection_record(l.detection);
    rec.pop_back();
    rec += ",\"voted_class\":" + std::to_string(l.voted_class);
    rec += ",\"rank_score\":" + format_double(l.rank_score) + "}";
    out << rec << '\n';
  }
}

std::vector<LabeledDetection> parse_labeled_stream(std::istream& in) {
  std::vector<LabeledDetection> out;
  std::string line;
  std::size_t line_no = 0;
  FrameIndex last_frame = -1;
  std::size_t index_in_frame = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("voted_class") || !obj.contains("rank_score")) {
      throw ParseError(line_no, "labeled record needs 'voted_class' and 'rank_score'");
    }
    const auto& vc = obj["voted_class"];
    const auto& rs = obj["rank_score"];
    if (!vc.is_number_integer() || !rs.is_number()) {
      throw ParseError(line_no, "'voted_class' must be an integer and 'rank_score' a number");
    }
    LabeledDetection l;
    l.voted_class = vc.get<int>();
    l.rank_score = rs.get<double>();
    obj.erase("voted_class");
    obj.erase("rank_score");
    std::istringstream one(obj.dump());
    Sequence s;
    try {
      s = parse_detection_dump(one);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    l.detection = s.frames.at(0).detections.at(0);
    if (l.detection.frame != last_frame) {
      last_frame = l.detection.frame;
      index_in_frame = 0;
    }
    l.index = index_in_frame++;
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace trackid
