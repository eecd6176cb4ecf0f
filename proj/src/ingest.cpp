#include "trackid/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "trackid/errors.hpp"

namespace trackid {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

/// Calls fn(line_number, line) for every line of `text`, numbering from 1.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    fn(++line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format floating-point value");
  return std::string(buf, ptr);
}

std::vector<Annotation> parse_annotation_text(std::string_view text, const ClassRegistry& registry,
                                              double img_w, double img_h, FrameIndex frame) {
  if (!(img_w > 0.0) || !(img_h > 0.0)) throw OutOfRange("image dimensions must be positive");
  std::vector<Annotation> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (skippable(line)) return;
    const auto fields = split_ws(trim(line));
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 fields `<class_id> <cx> <cy> <w> <h>`, got " +
                                    std::to_string(fields.size()));
    }
    int cls = 0;
    if (!parse_number(fields[0], cls)) {
      throw ParseError(line_no, "class id '" + std::string(fields[0]) + "' is not an integer");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_number(fields[i + 1], v[i])) {
        throw ParseError(line_no, "field '" + std::string(fields[i + 1]) + "' is not a number");
      }
    }
    if (!registry.contains(cls)) {
      throw OutOfRange("class id " + std::to_string(cls) + " outside registry of " +
                           std::to_string(registry.size()) + " classes",
                       line_no);
    }
    BBox box;
    try {
      box = from_normalized(v[0], v[1], v[2], v[3], img_w, img_h);
    } catch (const OutOfRange& e) {
      throw OutOfRange(e.what(), line_no);
    }
    out.push_back(Annotation{frame, box, cls});
  });
  return out;
}

std::string serialize_annotation_text(const std::vector<Annotation>& annotations, double img_w,
                                      double img_h) {
  std::string out;
  for (const auto& a : annotations) {
    const NormalizedBox n = to_normalized(a.box, img_w, img_h);
    out += std::to_string(a.class_index);
    for (double v : {n.cx, n.cy, n.w, n.h}) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

double json_number(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(line_no, std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

Detection parse_detection_record(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed record: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "record must be an object");
  static constexpr const char* kKeys[] = {"frame", "x", "y", "w", "h", "objectness", "scores"};
  for (const char* k : kKeys) {
    if (!obj.contains(k)) throw ParseError(line_no, std::string("missing key '") + k + "'");
  }
  if (obj.size() != std::size(kKeys)) throw ParseError(line_no, "record has unexpected keys");

  Detection d;
  const auto& frame = obj.at("frame");
  if (frame.is_number_unsigned()) {
    d.frame = static_cast<FrameIndex>(frame.get<std::uint64_t>());
  } else if (frame.is_number_integer() && frame.get<std::int64_t>() >= 0) {
    d.frame = frame.get<std::int64_t>();
  } else {
    throw ParseError(line_no, "key 'frame' must be a non-negative integer");
  }
  d.box = BBox{json_number(obj, "x", line_no), json_number(obj, "y", line_no),
               json_number(obj, "w", line_no), json_number(obj, "h", line_no)};
  d.objectness = json_number(obj, "objectness", line_no);
  const auto& scores = obj.at("scores");
  if (!scores.is_array()) throw ParseError(line_no, "key 'scores' must be an array");
  d.scores.reserve(scores.size());
  for (const auto& s : scores) {
    if (!s.is_number()) throw ParseError(line_no, "scores must be numbers");
    d.scores.push_back(s.get<double>());
  }
  return d;
}

}  // namespace

Sequence parse_detection_dump(std::istream& in) {
  std::map<FrameIndex, FrameRecord> frames;
  std::optional<std::size_t> num_classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    Detection d = parse_detection_record(trim(line), line_no);
    if (!num_classes) {
      num_classes = d.scores.size();
    } else if (*num_classes != d.scores.size()) {
      throw SchemaError(line_no, "record has " + std::to_string(d.scores.size()) +
                                     " scores, earlier records have " +
                                     std::to_string(*num_classes));
    }
    FrameRecord& rec = frames[d.frame];
    rec.index = d.frame;
    rec.detections.push_back(std::move(d));
  }
  Sequence s;
  s.frames.reserve(frames.size());
  for (auto& [_, rec] : frames) s.frames.push_back(std::move(rec));
  return s;
}

Sequence parse_detection_dump_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_detection_dump(in);
}

std::string detection_record(const Detection& d) {
  std::string out = "{\"frame\":" + std::to_string(d.frame);
  out += ",\"x\":" + format_double(d.box.x);
  out += ",\"y\":" + format_double(d.box.y);
  out += ",\"w\":" + format_double(d.box.w);
  out += ",\"h\":" + format_double(d.box.h);
  out += ",\"objectness\":" + format_double(d.objectness);
  out += ",\"scores\":[";
  for (std::size_t i = 0; i < d.scores.size(); ++i) {
    if (i) out += ',';
    out += format_double(d.scores[i]);
  }
  out += "]}";
  return out;
}

void serialize_detection_dump(const Sequence& s, std::ostream& out) {
  for (const auto& f : s.frames) {
    for (const auto& d : f.detections) out << detection_record(d) << '\n';
  }
}

std::string serialize_detection_dump(const Sequence& s) {
  std::ostringstream os;
  serialize_detection_dump(s, os);
  return os.str();
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (skippable(line)) return;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    ManifestEntry e;
    if (!parse_number(trim(fields[0]), e.frame) || e.frame < 0) {
      throw ParseError(line_no, "frame index must be a non-negative integer");
    }
    if (!parse_number(trim(fields[1]), e.image_w) || !parse_number(trim(fields[2]), e.image_h)) {
      throw ParseError(line_no, "image dimensions must be integers");
    }
    if (e.image_w <= 0 || e.image_h <= 0) {
      throw OutOfRange("image dimensions must be positive", line_no);
    }
    const std::string_view path = trim(fields[3]);
    if (path.empty()) throw ParseError(line_no, "annotation path is empty (use '-' for none)");
    if (path != "-") e.annotation_path = std::string(path);
    if (!m.entries.empty() && e.frame <= m.entries.back().frame) {
      throw ParseError(line_no, "frame indices must be strictly increasing");
    }
    m.entries.push_back(std::move(e));
  });
  return m;
}

std::string serialize_manifest(const Manifest& m) {
  std::string out;
  for (const auto& e : m.entries) {
    out += std::to_string(e.frame) + '\t' + std::to_string(e.image_w) + '\t' +
           std::to_string(e.image_h) + '\t' + e.annotation_path.value_or("-") + '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Sequence load_ground_truth(const std::filesystem::path& manifest_path,
                           const ClassRegistry& registry) {
  const Manifest m = parse_manifest(read_file(manifest_path));
  const auto base = manifest_path.parent_path();
  Sequence s;
  s.frames.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    FrameRecord rec;
    rec.index = e.frame;
    rec.image = ImageSize{e.image_w, e.image_h};
    rec.annotated = true;
    if (e.annotation_path) {
      std::filesystem::path p = *e.annotation_path;
      if (p.is_relative()) p = base / p;
      try {
        rec.annotations = parse_annotation_text(read_file(p), registry, e.image_w, e.image_h, e.frame);
      } catch (const ParseError& err) {
        throw ParseError(0, p.string() + ": " + err.what());
      } catch (const OutOfRange& err) {
        throw OutOfRange(p.string() + ": " + err.what());
      }
    }
    s.frames.push_back(std::move(rec));
  }
  return s;
}

ClassRegistry parse_class_names(std::string_view text) {
  std::vector<std::string> names;
  for_each_line(text, [&](std::size_t, std::string_view line) {
    if (skippable(line)) return;
    names.emplace_back(trim(line));
  });
  return ClassRegistry(std::move(names));
}

DatasetStats dataset_stats(const std::vector<Annotation>& annotations,
                           const ClassRegistry& registry) {
  DatasetStats st;
  st.per_class.resize(registry.size());
  std::vector<double> area_sum(registry.size(), 0.0);
  double total_area = 0.0;
  for (const auto& a : annotations) {
    if (!registry.contains(a.class_index)) continue;
    const auto c = static_cast<std::size_t>(a.class_index);
    const bool small = a.box.w < kSmallBoxSide && a.box.h < kSmallBoxSide;
    ++st.per_class[c].count;
    ++st.total;
    if (small) {
      ++st.per_class[c].small_count;
      ++st.total_small;
    }
    area_sum[c] += area(a.box);
    total_area += area(a.box);
  }
  for (std::size_t c = 0; c < st.per_class.size(); ++c) {
    ClassStats& cs = st.per_class[c];
    if (cs.count) {
      cs.small_fraction = static_cast<double>(cs.small_count) / cs.count;
      cs.mean_area = area_sum[c] / cs.count;
    }
  }
  if (st.total) {
    st.small_fraction = static_cast<double>(st.total_small) / st.total;
    st.mean_area = total_area / st.total;
  }
  return st;
}

std::vector<Annotation> all_annotations(const Sequence& s) {
  std::vector<Annotation> out;
  for (const auto& f : s.frames) out.insert(out.end(), f.annotations.begin(), f.annotations.end());
  return out;
}

}  // namespace trackid
