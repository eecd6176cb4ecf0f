#include "trackid/report.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace trackid {

std::string report_key_values(const MetricsReport& r, const ClassRegistry& registry) {
  std::ostringstream os;
  os << "map=" << format_double(r.map) << '\n'
     << "map_std=" << format_double(r.map_std) << '\n'
     << "precision=" << format_double(r.precision) << '\n'
     << "precision_std=" << format_double(r.precision_std) << '\n'
     << "recall=" << format_double(r.recall) << '\n'
     << "recall_std=" << format_double(r.recall_std) << '\n'
     << "micro_precision=" << format_double(r.micro_precision) << '\n'
     << "micro_recall=" << format_double(r.micro_recall) << '\n'
     << "evaluated_classes=" << r.evaluated_classes << '\n';
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    const std::string prefix =
        "class." + (c < registry.size() ? registry.name(c) : std::to_string(c)) + ".";
    os << prefix << "ap=" << format_double(m.ap) << '\n'
       << prefix << "precision=" << format_double(m.precision) << '\n'
       << prefix << "recall=" << format_double(m.recall) << '\n'
       << prefix << "gt=" << m.gt_count << '\n'
       << prefix << "tp=" << m.true_positives << '\n'
       << prefix << "fp=" << m.false_positives << '\n'
       << prefix << "evaluated=" << (m.evaluated ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string report_json(const MetricsReport& r, const ClassRegistry& registry) {
  nlohmann::ordered_json j;
  j["map"] = r.map;
  j["map_std"] = r.map_std;
  j["precision"] = r.precision;
  j["precision_std"] = r.precision_std;
  j["recall"] = r.recall;
  j["recall_std"] = r.recall_std;
  j["micro_precision"] = r.micro_precision;
  j["micro_recall"] = r.micro_recall;
  j["evaluated_classes"] = r.evaluated_classes;
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    nlohmann::ordered_json e;
    e["class"] = c < registry.size() ? registry.name(c) : std::to_string(c);
    e["ap"] = m.ap;
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["gt"] = m.gt_count;
    e["tp"] = m.true_positives;
    e["fp"] = m.false_positives;
    e["evaluated"] = m.evaluated;
    classes.push_back(std::move(e));
  }
  j["classes"] = std::move(classes);
  return j.dump(2) + "\n";
}

std::string percent_with_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (± %.1f)", 100.0 * mean, 100.0 * std);
  return buf;
}

namespace {

void pad(std::ostream& out, const std::string& s, std::size_t width) {
  out << s;
  // "±" is two bytes but one column.
  std::size_t cols = 0;
  for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
  for (std::size_t i = cols; i < width; ++i) out << ' ';
}

}  // namespace

void render_metrics_table(const std::vector<ReportRow>& rows, std::ostream& out) {
  pad(out, "Detection", 12);
  pad(out, "mAP", 16);
  pad(out, "Precision", 16);
  out << "Recall\n";
  for (const auto& row : rows) {
    pad(out, row.label, 12);
    pad(out, percent_with_std(row.report.map, row.report.map_std), 16);
    pad(out, percent_with_std(row.report.precision, row.report.precision_std), 16);
    out << percent_with_std(row.report.recall, row.report.recall_std) << '\n';
  }
}

void render_class_table(const MetricsReport& r, const ClassRegistry& registry, std::ostream& out) {
  pad(out, "Class", 14);
  pad(out, "AP", 8);
  pad(out, "Precision", 11);
  pad(out, "Recall", 8);
  out << "GT\n";
  char buf[32];
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    pad(out, c < registry.size() ? registry.name(c) : std::to_string(c), 14);
    if (!m.evaluated) {
      out << "-       -          -       0\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * m.ap);
    pad(out, buf, 8);
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * m.precision);
    pad(out, buf, 11);
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * m.recall);
    pad(out, buf, 8);
    out << m.gt_count << '\n';
  }
}

void render_stats(const DatasetStats& stats, const ClassRegistry& registry, std::ostream& out) {
  pad(out, "Class", 14);
  pad(out, "Count", 8);
  pad(out, "<32x32", 8);
  pad(out, "Fraction", 10);
  out << "MeanArea\n";
  char buf[64];
  auto row = [&](const std::string& name, std::size_t count, std::size_t small, double frac,
                 double mean_area) {
    pad(out, name, 14);
    pad(out, std::to_string(count), 8);
    pad(out, std::to_string(small), 8);
    std::snprintf(buf, sizeof buf, "%.4f", frac);
    pad(out, buf, 10);
    std::snprintf(buf, sizeof buf, "%.1f", mean_area);
    out << buf << '\n';
  };
  for (std::size_t c = 0; c < stats.per_class.size(); ++c) {
    const ClassStats& s = stats.per_class[c];
    row(registry.name(c), s.count, s.small_count, s.small_fraction, s.mean_area);
  }
  row("Total", stats.total, stats.total_small, stats.small_fraction, stats.mean_area);
}

}  // namespace trackid
