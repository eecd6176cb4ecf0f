#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trackid/model.hpp"
#include "trackid/voting.hpp"

namespace trackid {

struct SimConfig {
  int num_classes = 7;
  int num_tracks = 20;
  int frames = 50;
  int image_w = 1280;
  int image_h = 720;
  double per_frame_top1_accuracy = 0.85;
  double correct_score_mean = 0.8;
  double wrong_score_mean = 0.2;
  double score_sigma = 0.1;
  double objectness_mean = 0.9;
  double detection_dropout = 0.0;
  double jitter_sigma = 0.0;
  /// Upper bound on per-axis speed in pixels per frame.
  double max_speed = 0.5;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any invariant violation.
  void validate() const;
};

/// Flat `key=value` text; `#` comments and blank lines allowed. Unknown keys are errors.
SimConfig parse_sim_config(std::string_view text, SimConfig base = {});
std::string serialize_sim_config(const SimConfig& c);
/// Apply one `key=value` assignment.
void set_sim_config_value(SimConfig& c, std::string_view key, std::string_view value);

struct SimOutput {
  /// Every frame annotated, one box per track.
  Sequence ground_truth;
  /// Noisy detections; frames with no surviving detection are omitted.
  Sequence detections;
  ClassRegistry registry;
};

/// Tracks move linearly with wraparound inside their own grid cell, so distinct tracks
/// never overlap. Deterministic per seed.
SimOutput generate(const SimConfig& c);

/// Score model shared by the generator and the oracle. The winning class is the true class
/// with probability `per_frame_top1_accuracy`, otherwise a uniformly chosen other class.
/// A correct winner scores around correct_score_mean; all other scores, including a wrong
/// winner's, are drawn around wrong_score_mean, and a wrong winner takes the largest of
/// those draws. Draws are clipped Gaussians with `score_sigma`; the winner is the strict argmax.
std::vector<double> draw_scores(std::mt19937_64& rng, int true_class, const SimConfig& c);

/// Monte Carlo accuracy of the voted identity for a tracklet of `tracklet_len` independent
/// detections under draw_scores. Independent of the tracking and voting code.
double vote_accuracy_oracle(double per_frame_top1_accuracy, int tracklet_len, int num_classes,
                            VoteScheme scheme, int trials, std::uint64_t seed,
                            const SimConfig& score_model = {});

}  // namespace trackid
