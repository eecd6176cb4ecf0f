#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trackid/association.hpp"
#include "trackid/model.hpp"
#include "trackid/voting.hpp"

namespace trackid {

inline constexpr double kDefaultIouThreshold = 0.5;
inline constexpr double kDefaultOperatingConfidence = 0.25;

enum class Interpolation { AllPoint, ElevenPoint };

/// Interpolation used by summarize(); swap to ElevenPoint for VOC2007-style numbers.
inline constexpr Interpolation kApInterpolation = Interpolation::AllPoint;

struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
  friend bool operator==(const ScoredOutcome&, const ScoredOutcome&) = default;
};

struct ClassMatches {
  /// Ordered by descending score, ties by frame then detection index.
  std::vector<ScoredOutcome> outcomes;
  std::size_t gt_count = 0;
  std::size_t false_negatives = 0;

  std::size_t true_positives() const;
  friend bool operator==(const ClassMatches&, const ClassMatches&) = default;
};

struct MatchResult {
  std::vector<ClassMatches> per_class;
  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Class-aware greedy matching. Within each frame, predictions in descending rank order
/// claim the unclaimed same-class ground truth with the highest IoU >= iou_thresh.
/// Predictions with a class outside [0, num_classes) are dropped.
MatchResult match(std::span<const LabeledDetection> preds, std::span<const Annotation> gts,
                  std::size_t num_classes, double iou_thresh);

/// Area under the interpolated precision/recall curve. Outcomes are ranked by descending
/// score; equal scores keep their input order. Returns 0 when gt_count is 0.
double average_precision(std::span<const ScoredOutcome> outcomes, std::size_t gt_count,
                         Interpolation interpolation = kApInterpolation);

struct ClassMetrics {
  double ap = 0.0;
  /// Counted over predictions with rank >= the operating confidence.
  double precision = 0.0;
  double recall = 0.0;
  std::size_t gt_count = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  /// Classes without ground truth are reported but excluded from every summary.
  bool evaluated = false;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double map = 0.0;
  /// Population standard deviations across evaluated classes.
  double map_std = 0.0;
  double precision = 0.0;
  double precision_std = 0.0;
  double recall = 0.0;
  double recall_std = 0.0;
  /// Pooled over all evaluated classes.
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  std::size_t evaluated_classes = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport summarize(const MatchResult& m, double operating_conf);

/// Detections restricted to annotated frames, paired with those frames' ground truth.
struct ScoringSet {
  std::vector<LabeledDetection> predictions;
  std::vector<Annotation> ground_truth;
};
ScoringSet scoring_set(const Sequence& s, const std::vector<LabeledDetection>& labeled);

/// Throws NoAnnotations when no frame of `s` is annotated.
MetricsReport evaluate_single_frame(const Sequence& s, std::size_t num_classes, double iou_thresh,
                                    double operating_conf);

MetricsReport evaluate_multi_frame(const Sequence& s, std::size_t num_classes,
                                   const TrackletParams& p, VoteScheme scheme, double iou_thresh,
                                   double operating_conf);

MetricsReport evaluate_labeled(const Sequence& s, std::size_t num_classes,
                               const std::vector<LabeledDetection>& labeled, double iou_thresh,
                               double operating_conf);

/// Field-wise mean over folds. Throws ConfigError on an empty list or
/// mismatched class counts.
MetricsReport stratified_eval_folds(std::span<const MetricsReport> reports);

struct IdentityAccuracy {
  std::size_t correct = 0;
  /// Detections on annotated frames whose best-overlapping ground truth has IoU >= threshold.
  std::size_t total = 0;
  double value() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

/// Fraction of localized detections whose label equals the class of the ground truth
/// they overlap most.
IdentityAccuracy identity_accuracy(const Sequence& s, const std::vector<LabeledDetection>& labeled,
                                   double iou_thresh);

}  // namespace trackid
