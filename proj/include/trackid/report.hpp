#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trackid/eval.hpp"
#include "trackid/ingest.hpp"
#include "trackid/model.hpp"

namespace trackid {

/// Flat `key=value` lines, one metric per line, per-class keys prefixed `class.<name>.`.
std::string report_key_values(const MetricsReport& r, const ClassRegistry& registry);

/// Machine-readable record (JSON object).
std::string report_json(const MetricsReport& r, const ClassRegistry& registry);

/// `92.1 (± 8.0)` style cell, values in percent.
std::string percent_with_std(double mean, double std);

struct ReportRow {
  std::string label;
  MetricsReport report;
};

/// Table with columns Detection, mAP, Precision, Recall.
void render_metrics_table(const std::vector<ReportRow>& rows, std::ostream& out);

/// Per-class AP, precision and recall for one report.
void render_class_table(const MetricsReport& r, const ClassRegistry& registry, std::ostream& out);

void render_stats(const DatasetStats& stats, const ClassRegistry& registry, std::ostream& out);

}  // namespace trackid
