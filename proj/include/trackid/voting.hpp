#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trackid/association.hpp"
#include "trackid/model.hpp"

namespace trackid {

enum class VoteScheme { Average, Maximum };

std::string_view to_string(VoteScheme scheme);
/// Accepts "avg"/"average" and "max"/"maximum". Throws ConfigError otherwise.
VoteScheme parse_vote_scheme(std::string_view text);

struct VotedIdentity {
  int class_index = 0;
  double vote_score = 0.0;
  friend bool operator==(const VotedIdentity&, const VotedIdentity&) = default;
};

/// Maximum: class of the single highest score over all members.
/// Average: argmax of the elementwise mean score vector.
/// Throws DanglingReference when a member does not resolve in `s`.
VotedIdentity vote(const Tracklet& t, const Sequence& s, VoteScheme scheme);

/// A detection with the identity assigned by its tracklet.
struct LabeledDetection {
  Detection detection;
  /// Position of the detection within its frame.
  std::size_t index = 0;
  int voted_class = 0;
  /// objectness x vote_score; orders predictions for AP.
  double rank_score = 0.0;

  friend bool operator==(const LabeledDetection&, const LabeledDetection&) = default;
};

/// Label every detection of `s` with its tracklet's vote. Output sorted by frame, then
/// detection index. Throws PartitionError when the tracklets do not cover each
/// detection exactly once.
std::vector<LabeledDetection> relabel(const Sequence& s, const std::vector<Tracklet>& tracklets,
                                      VoteScheme scheme);

/// Single-frame labelling: top_class per detection, rank = objectness x top score.
std::vector<LabeledDetection> label_single_frame(const Sequence& s);

/// Detection dump records extended with `voted_class` and `rank_score`.
void serialize_labeled_stream(const std::vector<LabeledDetection>& labeled, std::ostream& out);
std::vector<LabeledDetection> parse_labeled_stream(std::istream& in);

}  // namespace trackid
