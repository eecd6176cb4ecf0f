#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackid/geometry.hpp"

namespace trackid {

using FrameIndex = std::int64_t;

/// Ordered set of identity labels; a label's position is its class index.
class ClassRegistry {
 public:
  ClassRegistry() = default;
  /// Throws ConfigError on empty or duplicate names.
  explicit ClassRegistry(std::vector<std::string> names);

  /// Registry of `count` placeholder names "class_0", "class_1", ...
  static ClassRegistry anonymous(std::size_t count);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(int class_index) const {
    return class_index >= 0 && static_cast<std::size_t>(class_index) < names_.size();
  }

 private:
  std::vector<std::string> names_;
};

struct Detection {
  FrameIndex frame = 0;
  BBox box;
  double objectness = 0.0;
  /// Independent per-class confidences; not required to sum to one.
  std::vector<double> scores;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Annotation {
  FrameIndex frame = 0;
  BBox box;
  int class_index = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct FrameRecord {
  FrameIndex index = 0;
  std::optional<ImageSize> image;
  std::vector<Detection> detections;
  std::vector<Annotation> annotations;
  /// True when ground truth exists for this frame, even if it lists no boxes.
  /// Unannotated frames feed tracklets but are never scored.
  bool annotated = false;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// One video segment. Frame indices are strictly increasing.
struct Sequence {
  std::vector<FrameRecord> frames;

  std::size_t detection_count() const;
  std::size_t annotation_count() const;
  bool has_annotations() const;
  /// Position of the frame with the given index, if present.
  std::optional<std::size_t> find_frame(FrameIndex index) const;

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

struct ClassScore {
  int class_index = 0;
  double score = 0.0;
  friend bool operator==(const ClassScore&, const ClassScore&) = default;
};

/// Argmax of a score vector; ties go to the lowest index. Throws EmptyScores.
ClassScore argmax(const std::vector<double>& scores);
ClassScore top_class(const Detection& d);

struct Violation {
  enum class Kind { FrameOrder, FrameMismatch, ScoreLength, ScoreRange, BadBox, BadClass };
  Kind kind;
  FrameIndex frame = 0;
  /// Position of the offending detection/annotation within its frame, or -1.
  int item = -1;
  std::string message;
};

/// All invariant violations found in `s`; empty when the sequence is valid.
std::vector<Violation> validate_sequence(const Sequence& s, const ClassRegistry& registry);

/// Combine frames from two sequences. Detections come from `detections`; annotations,
/// image sizes and the annotated flag from `ground_truth`.
Sequence merge_sequences(const Sequence& detections, const Sequence& ground_truth);

}  // namespace trackid
