#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackid/model.hpp"

namespace trackid {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Parse one Darknet label file: `<class_id> <cx> <cy> <w> <h>` per line, normalized.
/// Blank lines and `#` comments are skipped. Boxes are not rounded.
std::vector<Annotation> parse_annotation_text(std::string_view text, const ClassRegistry& registry,
                                              double img_w, double img_h, FrameIndex frame);

/// Inverse of parse_annotation_text for one frame.
std::string serialize_annotation_text(const std::vector<Annotation>& annotations, double img_w,
                                      double img_h);

/// Line-delimited detection records with keys frame, x, y, w, h, objectness, scores.
/// Frames come out sorted ascending; detection order within a frame follows the file.
Sequence parse_detection_dump(std::istream& in);
Sequence parse_detection_dump_text(std::string_view text);

/// Inverse of parse_detection_dump. Key order and float text are byte-stable.
void serialize_detection_dump(const Sequence& s, std::ostream& out);
std::string serialize_detection_dump(const Sequence& s);

/// Single record line (no trailing newline).
std::string detection_record(const Detection& d);

struct ManifestEntry {
  FrameIndex frame = 0;
  int image_w = 0;
  int image_h = 0;
  /// Empty optional is written as `-`: the frame is annotated and has no boxes.
  std::optional<std::string> annotation_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// `<frame>\t<img_w>\t<img_h>\t<annotation_path-or-dash>` per line.
Manifest parse_manifest(std::string_view text);
std::string serialize_manifest(const Manifest& m);

/// Read the manifest and every label file it names (relative paths resolve against the
/// manifest's directory). Returns a ground-truth sequence with every listed frame annotated.
Sequence load_ground_truth(const std::filesystem::path& manifest_path, const ClassRegistry& registry);

/// One name per line; blank lines and comments skipped.
ClassRegistry parse_class_names(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Side length below which a box is "small" on both axes.
inline constexpr double kSmallBoxSide = 32.0;

struct ClassStats {
  std::size_t count = 0;
  std::size_t small_count = 0;
  /// small_count / count, 0 when count is 0.
  double small_fraction = 0.0;
  double mean_area = 0.0;
};

struct DatasetStats {
  std::vector<ClassStats> per_class;
  std::size_t total = 0;
  std::size_t total_small = 0;
  double small_fraction = 0.0;
  double mean_area = 0.0;
};

/// Per-class counts, fraction of boxes with w < 32 and h < 32, and mean area.
/// Annotations with class indices outside the registry are ignored.
DatasetStats dataset_stats(const std::vector<Annotation>& annotations, const ClassRegistry& registry);

std::vector<Annotation> all_annotations(const Sequence& s);

}  // namespace trackid
