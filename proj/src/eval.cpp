#include "trackid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "trackid/errors.hpp"

namespace trackid {

std::size_t ClassMatches::true_positives() const {
  return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(),
                                                [](const ScoredOutcome& o) { return o.true_positive; }));
}

namespace {

struct RankedOutcome {
  double score;
  FrameIndex frame;
  std::size_t index;
  bool tp;
};

bool ranks_before(double ls, FrameIndex lf, std::size_t li, double rs, FrameIndex rf, std::size_t ri) {
  if (ls != rs) return ls > rs;
  if (lf != rf) return lf < rf;
  return li < ri;
}

}  // namespace

MatchResult match(std::span<const LabeledDetection> preds, std::span<const Annotation> gts,
                  std::size_t num_classes, double iou_thresh) {
  // (frame, class) -> indices into preds / gts
  std::map<std::pair<FrameIndex, int>, std::vector<std::size_t>> pred_groups;
  std::map<std::pair<FrameIndex, int>, std::vector<std::size_t>> gt_groups;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int c = preds[i].voted_class;
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) continue;
    pred_groups[{preds[i].detection.frame, c}].push_back(i);
  }
  MatchResult result;
  result.per_class.resize(num_classes);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const int c = gts[i].class_index;
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) continue;
    gt_groups[{gts[i].frame, c}].push_back(i);
    ++result.per_class[static_cast<std::size_t>(c)].gt_count;
  }

  std::vector<std::vector<RankedOutcome>> ranked(num_classes);
  std::vector<std::size_t> claimed_per_class(num_classes, 0);
  for (auto& [key, members] : pred_groups) {
    const auto c = static_cast<std::size_t>(key.second);
    std::sort(members.begin(), members.end(), [&](std::size_t l, std::size_t r) {
      return ranks_before(preds[l].rank_score, preds[l].detection.frame, preds[l].index,
                          preds[r].rank_score, preds[r].detection.frame, preds[r].index);
    });
    const auto git = gt_groups.find(key);
    const std::vector<std::size_t> empty;
    const std::vector<std::size_t>& candidates = git == gt_groups.end() ? empty : git->second;
    std::vector<bool> claimed(candidates.size(), false);
    for (std::size_t pi : members) {
      const LabeledDetection& p = preds[pi];
      double best = -1.0;
      std::size_t best_gt = candidates.size();
      for (std::size_t g = 0; g < candidates.size(); ++g) {
        if (claimed[g]) continue;
        const double v = iou(p.detection.box, gts[candidates[g]].box);
        if (v >= iou_thresh && v > best) {
          best = v;
          best_gt = g;
        }
      }
      const bool tp = best_gt < candidates.size();
      if (tp) {
        claimed[best_gt] = true;
        ++claimed_per_class[c];
      }
      ranked[c].push_back({p.rank_score, p.detection.frame, p.index, tp});
    }
  }

  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& r = ranked[c];
    std::sort(r.begin(), r.end(), [](const RankedOutcome& l, const RankedOutcome& o) {
      return ranks_before(l.score, l.frame, l.index, o.score, o.frame, o.index);
    });
    ClassMatches& cm = result.per_class[c];
    cm.outcomes.reserve(r.size());
    for (const auto& o : r) cm.outcomes.push_back({o.score, o.tp});
    cm.false_negatives = cm.gt_count - claimed_per_class[c];
  }
  return result;
}

double average_precision(std::span<const ScoredOutcome> outcomes, std::size_t gt_count,
                         Interpolation interpolation) {
  if (gt_count == 0) return 0.0;
  std::vector<ScoredOutcome> sorted(outcomes.begin(), outcomes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredOutcome& l, const ScoredOutcome& r) { return l.score > r.score; });

  const std::size_t n = sorted.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }
  // Precision envelope: best precision at this rank or any later one.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  if (interpolation == Interpolation::ElevenPoint) {
    double sum = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      const auto it = std::find_if(recall.begin(), recall.end(),
                                   [&](double r) { return r >= level - 1e-12; });
      if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / 11.0;
  }

  // Each true positive raises recall by 1/gt_count; the area is the mean envelope
  // precision at those steps. Extended precision keeps e.g. (1 + 2/3) / 2 at exactly 5/6
  // after the final rounding.
  std::vector<long double> env(n);
  tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i].true_positive) ++tp;
    env[i] = static_cast<long double>(tp) / static_cast<long double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) env[i - 1] = std::max(env[i - 1], env[i]);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i].true_positive) sum += env[i];
  }
  return static_cast<double>(sum / static_cast<long double>(gt_count));
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

MetricsReport summarize(const MatchResult& m, double operating_conf) {
  MetricsReport r;
  r.per_class.resize(m.per_class.size());
  std::vector<double> aps, precisions, recalls;
  std::size_t pooled_tp = 0, pooled_fp = 0, pooled_gt = 0;
  for (std::size_t c = 0; c < m.per_class.size(); ++c) {
    const ClassMatches& cm = m.per_class[c];
    ClassMetrics& out = r.per_class[c];
    out.gt_count = cm.gt_count;
    out.evaluated = cm.gt_count > 0;
    out.ap = average_precision(cm.outcomes, cm.gt_count);
    for (const auto& o : cm.outcomes) {
      if (o.score < operating_conf) continue;
      (o.true_positive ? out.true_positives : out.false_positives)++;
    }
    const std::size_t retained = out.true_positives + out.false_positives;
    out.precision = retained ? static_cast<double>(out.true_positives) / retained : 0.0;
    out.recall = cm.gt_count ? static_cast<double>(out.true_positives) / cm.gt_count : 0.0;
    if (!out.evaluated) continue;
    aps.push_back(out.ap);
    precisions.push_back(out.precision);
    recalls.push_back(out.recall);
    pooled_tp += out.true_positives;
    pooled_fp += out.false_positives;
    pooled_gt += out.gt_count;
  }
  r.evaluated_classes = aps.size();
  const auto ap = population_mean_std(aps);
  const auto pr = population_mean_std(precisions);
  const auto rc = population_mean_std(recalls);
  r.map = ap.mean;
  r.map_std = ap.std;
  r.precision = pr.mean;
  r.precision_std = pr.std;
  r.recall = rc.mean;
  r.recall_std = rc.std;
  r.micro_precision =
      pooled_tp + pooled_fp ? static_cast<double>(pooled_tp) / (pooled_tp + pooled_fp) : 0.0;
  r.micro_recall = pooled_gt ? static_cast<double>(pooled_tp) / pooled_gt : 0.0;
  return r;
}

ScoringSet scoring_set(const Sequence& s, const std::vector<LabeledDetection>& labeled) {
  ScoringSet out;
  for (const auto& f : s.frames) {
    if (f.annotated) out.ground_truth.insert(out.ground_truth.end(), f.annotations.begin(), f.annotations.end());
  }
  for (const auto& l : labeled) {
    const auto fi = s.find_frame(l.detection.frame);
    if (fi && s.frames[*fi].annotated) out.predictions.push_back(l);
  }
  return out;
}

MetricsReport evaluate_labeled(const Sequence& s, std::size_t num_classes,
                               const std::vector<LabeledDetection>& labeled, double iou_thresh,
                               double operating_conf) {
  if (!s.has_annotations()) throw NoAnnotations();
  const ScoringSet set = scoring_set(s, labeled);
  return summarize(match(set.predictions, set.ground_truth, num_classes, iou_thresh), operating_conf);
}

MetricsReport evaluate_single_frame(const Sequence& s, std::size_t num_classes, double iou_thresh,
                                    double operating_conf) {
  if (!s.has_annotations()) throw NoAnnotations();
  return evaluate_labeled(s, num_classes, label_single_frame(s), iou_thresh, operating_conf);
}

MetricsReport evaluate_multi_frame(const Sequence& s, std::size_t num_classes,
                                   const TrackletParams& p, VoteScheme scheme, double iou_thresh,
                                   double operating_conf) {
  if (!s.has_annotations()) throw NoAnnotations();
  const auto tracklets = build_tracklets(s, p);
  return evaluate_labeled(s, num_classes, relabel(s, tracklets, scheme), iou_thresh, operating_conf);
}

MetricsReport stratified_eval_folds(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw ConfigError("fold aggregation needs at least one report");
  const std::size_t classes = reports.front().per_class.size();
  for (const auto& r : reports) {
    if (r.per_class.size() != classes) throw ConfigError("fold reports disagree on class count");
  }
  const double n = static_cast<double>(reports.size());
  // Shifted by the first fold so that identical folds reproduce their values exactly.
  auto mean_of = [&](auto field) {
    const double first = field(reports.front());
    double sum = 0.0;
    for (const auto& r : reports) sum += field(r) - first;
    return first + sum / n;
  };
  auto mean_count = [](double sum, double count) {
    return static_cast<std::size_t>(std::llround(sum / count));
  };

  MetricsReport out;
  out.map = mean_of([](const MetricsReport& r) { return r.map; });
  out.map_std = mean_of([](const MetricsReport& r) { return r.map_std; });
  out.precision = mean_of([](const MetricsReport& r) { return r.precision; });
  out.precision_std = mean_of([](const MetricsReport& r) { return r.precision_std; });
  out.recall = mean_of([](const MetricsReport& r) { return r.recall; });
  out.recall_std = mean_of([](const MetricsReport& r) { return r.recall_std; });
  out.micro_precision = mean_of([](const MetricsReport& r) { return r.micro_precision; });
  out.micro_recall = mean_of([](const MetricsReport& r) { return r.micro_recall; });
  out.evaluated_classes = mean_count(
      mean_of([](const MetricsReport& r) { return static_cast<double>(r.evaluated_classes); }), 1.0);

  out.per_class.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    // Per-class means run over the folds in which the class had ground truth.
    const ClassMetrics* ref = nullptr;
    for (const auto& r : reports) {
      if (r.per_class[c].evaluated) {
        ref = &r.per_class[c];
        break;
      }
    }
    if (!ref) continue;
    double ap = 0, pr = 0, rc = 0, gt = 0, tp = 0, fp = 0, folds = 0;
    for (const auto& r : reports) {
      const ClassMetrics& m = r.per_class[c];
      if (!m.evaluated) continue;
      ap += m.ap - ref->ap;
      pr += m.precision - ref->precision;
      rc += m.recall - ref->recall;
      gt += static_cast<double>(m.gt_count);
      tp += static_cast<double>(m.true_positives);
      fp += static_cast<double>(m.false_positives);
      folds += 1;
    }
    ClassMetrics& m = out.per_class[c];
    m.evaluated = true;
    m.ap = ref->ap + ap / folds;
    m.precision = ref->precision + pr / folds;
    m.recall = ref->recall + rc / folds;
    m.gt_count = mean_count(gt, folds);
    m.true_positives = mean_count(tp, folds);
    m.false_positives = mean_count(fp, folds);
  }
  return out;
}

IdentityAccuracy identity_accuracy(const Sequence& s, const std::vector<LabeledDetection>& labeled,
                                   double iou_thresh) {
  IdentityAccuracy acc;
  for (const auto& l : labeled) {
    const auto fi = s.find_frame(l.detection.frame);
    if (!fi || !s.frames[*fi].annotated) continue;
    const auto& gts = s.frames[*fi].annotations;
    double best = -1.0;
    const Annotation* best_gt = nullptr;
    for (const auto& g : gts) {
      const double v = iou(l.detection.box, g.box);
      if (v >= iou_thresh && v > best) {
        best = v;
        best_gt = &g;
      }
    }
    if (!best_gt) continue;
    ++acc.total;
    if (best_gt->class_index == l.voted_class) ++acc.correct;
  }
  return acc;
}

}  // namespace trackid
