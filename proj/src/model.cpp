#include "trackid/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "trackid/errors.hpp"

namespace trackid {

ClassRegistry::ClassRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("class names must be non-empty");
    if (!seen.insert(n).second) throw ConfigError("duplicate class name '" + n + "'");
  }
}

ClassRegistry ClassRegistry::anonymous(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back("class_" + std::to_string(i));
  return ClassRegistry(std::move(names));
}

std::optional<std::size_t> ClassRegistry::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Sequence::detection_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.detections.size();
  return n;
}

std::size_t Sequence::annotation_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.annotations.size();
  return n;
}

bool Sequence::has_annotations() const {
  return std::any_of(frames.begin(), frames.end(), [](const FrameRecord& f) { return f.annotated; });
}

std::optional<std::size_t> Sequence::find_frame(FrameIndex index) const {
  auto it = std::lower_bound(frames.begin(), frames.end(), index,
                             [](const FrameRecord& f, FrameIndex i) { return f.index < i; });
  if (it == frames.end() || it->index != index) return std::nullopt;
  return static_cast<std::size_t>(it - frames.begin());
}

ClassScore argmax(const std::vector<double>& scores) {
  if (scores.empty()) throw EmptyScores();
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return ClassScore{static_cast<int>(best), scores[best]};
}

ClassScore top_class(const Detection& d) { return argmax(d.scores); }

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

bool valid_box(const BBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) &&
         b.w >= 0.0 && b.h >= 0.0;
}

std::string where(FrameIndex frame, const char* what, std::size_t item) {
  std::ostringstream os;
  os << "frame " << frame << ", " << what << " " << item << ": ";
  return os.str();
}

}  // namespace

std::vector<Violation> validate_sequence(const Sequence& s, const ClassRegistry& registry) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  const std::size_t c = registry.size();
  for (std::size_t fi = 0; fi < s.frames.size(); ++fi) {
    const FrameRecord& f = s.frames[fi];
    if (fi > 0 && f.index <= s.frames[fi - 1].index) {
      out.push_back({Kind::FrameOrder, f.index, -1,
                     "frame " + std::to_string(f.index) + " follows frame " +
                         std::to_string(s.frames[fi - 1].index)});
    }
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      const Detection& d = f.detections[i];
      const int item = static_cast<int>(i);
      if (d.frame != f.index) {
        out.push_back({Kind::FrameMismatch, f.index, item,
                       where(f.index, "detection", i) + "records frame " + std::to_string(d.frame)});
      }
      if (d.scores.size() != c) {
        out.push_back({Kind::ScoreLength, f.index, item,
                       where(f.index, "detection", i) + "has " + std::to_string(d.scores.size()) +
                           " scores, expected " + std::to_string(c)});
      }
      const bool scores_ok = std::all_of(d.scores.begin(), d.scores.end(), in_unit);
      if (!scores_ok || !in_unit(d.objectness)) {
        out.push_back({Kind::ScoreRange, f.index, item,
                       where(f.index, "detection", i) + "has a score outside [0,1]"});
      }
      if (!valid_box(d.box)) {
        out.push_back({Kind::BadBox, f.index, item,
                       where(f.index, "detection", i) + "has a negative or non-finite box"});
      }
    }
    for (std::size_t i = 0; i < f.annotations.size(); ++i) {
      const Annotation& a = f.annotations[i];
      const int item = static_cast<int>(i);
      if (a.frame != f.index) {
        out.push_back({Kind::FrameMismatch, f.index, item,
                       where(f.index, "annotation", i) + "records frame " + std::to_string(a.frame)});
      }
      if (!registry.contains(a.class_index)) {
        out.push_back({Kind::BadClass, f.index, item,
                       where(f.index, "annotation", i) + "class " + std::to_string(a.class_index) +
                           " not in registry of " + std::to_string(c)});
      }
      if (!valid_box(a.box)) {
        out.push_back({Kind::BadBox, f.index, item,
                       where(f.index, "annotation", i) + "has a negative or non-finite box"});
      }
    }
  }
  return out;
}

Sequence merge_sequences(const Sequence& detections, const Sequence& ground_truth) {
  Sequence out;
  auto di = detections.frames.begin();
  auto gi = ground_truth.frames.begin();
  while (di != detections.frames.end() || gi != ground_truth.frames.end()) {
    FrameRecord rec;
    if (gi == ground_truth.frames.end() ||
        (di != detections.frames.end() && di->index < gi->index)) {
      rec.index = di->index;
      rec.image = di->image;
      rec.detections = di->detections;
      ++di;
    } else if (di == detections.frames.end() || gi->index < di->index) {
      rec.index = gi->index;
      rec.image = gi->image;
      rec.annotations = gi->annotations;
      rec.annotated = gi->annotated;
      ++gi;
    } else {
      rec.index = di->index;
      rec.image = gi->image ? gi->image : di->image;
      rec.detections = di->detections;
      rec.annotations = gi->annotations;
      rec.annotated = gi->annotated;
      ++di;
      ++gi;
    }
    out.frames.push_back(std::move(rec));
  }
  return out;
}

}  // namespace trackid
