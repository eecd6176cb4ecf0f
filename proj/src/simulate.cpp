#include "trackid/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "trackid/errors.hpp"
#include "trackid/ingest.hpp"

namespace trackid {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

struct Grid {
  int cols = 1;
  int rows = 1;
  double cell_w = 0.0;
  double cell_h = 0.0;
  double side = 0.0;
};

Grid layout(const SimConfig& c) {
  Grid g;
  const double aspect = static_cast<double>(c.image_w) / c.image_h;
  g.cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(c.num_tracks * aspect))));
  g.rows = (c.num_tracks + g.cols - 1) / g.cols;
  g.cell_w = static_cast<double>(c.image_w) / g.cols;
  g.cell_h = static_cast<double>(c.image_h) / g.rows;
  g.side = 0.5 * std::min(g.cell_w, g.cell_h);
  return g;
}

}  // namespace

void SimConfig::validate() const {
  if (num_classes < 1) throw ConfigError("num_classes must be positive");
  if (num_tracks < 1) throw ConfigError("num_tracks must be positive");
  if (frames < 1) throw ConfigError("frames must be positive");
  if (image_w < 1 || image_h < 1) throw ConfigError("image dimensions must be positive");
  if (!unit(per_frame_top1_accuracy)) throw ConfigError("per_frame_top1_accuracy must lie in [0,1]");
  if (!unit(correct_score_mean)) throw ConfigError("correct_score_mean must lie in [0,1]");
  if (!unit(wrong_score_mean)) throw ConfigError("wrong_score_mean must lie in [0,1]");
  if (!unit(objectness_mean)) throw ConfigError("objectness_mean must lie in [0,1]");
  if (!unit(detection_dropout)) throw ConfigError("detection_dropout must lie in [0,1]");
  if (!(score_sigma >= 0.0)) throw ConfigError("score_sigma must be non-negative");
  if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be non-negative");
  if (!(max_speed >= 0.0)) throw ConfigError("max_speed must be non-negative");
  if (num_classes == 1 && per_frame_top1_accuracy < 1.0) {
    throw ConfigError("a single class cannot be misclassified; per_frame_top1_accuracy must be 1");
  }
  if (layout(*this).side < 2.0) throw ConfigError("too many tracks for the image size");
}

void set_sim_config_value(SimConfig& c, std::string_view key, std::string_view value) {
  auto as_int = [&](int& out) {
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
    }
  };
  auto as_double = [&](double& out) {
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
    }
  };
  if (key == "num_classes") as_int(c.num_classes);
  else if (key == "num_tracks") as_int(c.num_tracks);
  else if (key == "frames") as_int(c.frames);
  else if (key == "image_w") as_int(c.image_w);
  else if (key == "image_h") as_int(c.image_h);
  else if (key == "per_frame_top1_accuracy") as_double(c.per_frame_top1_accuracy);
  else if (key == "correct_score_mean") as_double(c.correct_score_mean);
  else if (key == "wrong_score_mean") as_double(c.wrong_score_mean);
  else if (key == "score_sigma") as_double(c.score_sigma);
  else if (key == "objectness_mean") as_double(c.objectness_mean);
  else if (key == "detection_dropout") as_double(c.detection_dropout);
  else if (key == "jitter_sigma") as_double(c.jitter_sigma);
  else if (key == "max_speed") as_double(c.max_speed);
  else if (key == "seed") {
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), c.seed);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw ConfigError("'seed' expects a non-negative integer, got '" + std::string(value) + "'");
    }
  } else {
    throw ConfigError("unknown simulation key '" + std::string(key) + "'");
  }
}

SimConfig parse_sim_config(std::string_view text, SimConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      set_sim_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return base;
}

std::string serialize_sim_config(const SimConfig& c) {
  std::ostringstream os;
  os << "num_classes=" << c.num_classes << '\n'
     << "num_tracks=" << c.num_tracks << '\n'
     << "frames=" << c.frames << '\n'
     << "image_w=" << c.image_w << '\n'
     << "image_h=" << c.image_h << '\n'
     << "per_frame_top1_accuracy=" << format_double(c.per_frame_top1_accuracy) << '\n'
     << "correct_score_mean=" << format_double(c.correct_score_mean) << '\n'
     << "wrong_score_mean=" << format_double(c.wrong_score_mean) << '\n'
     << "score_sigma=" << format_double(c.score_sigma) << '\n'
     << "objectness_mean=" << format_double(c.objectness_mean) << '\n'
     << "detection_dropout=" << format_double(c.detection_dropout) << '\n'
     << "jitter_sigma=" << format_double(c.jitter_sigma) << '\n'
     << "max_speed=" << format_double(c.max_speed) << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

namespace {

double clipped_normal(std::mt19937_64& rng, double mean, double sigma) {
  if (sigma <= 0.0) return std::clamp(mean, 0.0, 1.0);
  std::normal_distribution<double> n(mean, sigma);
  return std::clamp(n(rng), 0.0, 1.0);
}

}  // namespace

std::vector<double> draw_scores(std::mt19937_64& rng, int true_class, const SimConfig& c) {
  const auto classes = static_cast<std::size_t>(c.num_classes);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::size_t winner = static_cast<std::size_t>(true_class);
  const bool correct = classes == 1 || u01(rng) < c.per_frame_top1_accuracy;
  if (!correct) {
    std::uniform_int_distribution<std::size_t> pick(0, classes - 2);
    winner = pick(rng);
    if (winner >= static_cast<std::size_t>(true_class)) ++winner;
  }

  std::vector<double> scores(classes);
  for (auto& s : scores) s = clipped_normal(rng, c.wrong_score_mean, c.score_sigma);
  if (correct) {
    scores[winner] = clipped_normal(rng, c.correct_score_mean, c.score_sigma);
  } else {
    std::swap(scores[winner], *std::max_element(scores.begin(), scores.end()));
  }

  // The winner must be the strict argmax.
  double& w = scores[winner];
  if (w <= 0.0) w = 1e-6;
  for (std::size_t k = 0; k < classes; ++k) {
    if (k == winner) continue;
    for (int attempt = 0; attempt < 16 && scores[k] >= w; ++attempt) {
      scores[k] = clipped_normal(rng, c.wrong_score_mean, c.score_sigma);
    }
    if (scores[k] >= w) scores[k] = w * u01(rng);
  }
  return scores;
}

SimOutput generate(const SimConfig& c) {
  c.validate();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Grid g = layout(c);
  const double range_x = g.cell_w - g.side;
  const double range_y = g.cell_h - g.side;

  struct Track {
    int true_class;
    double origin_x, origin_y;
    double start_x, start_y;
    double vx, vy;
  };

  // Start so that the whole run fits without wrapping whenever the travel allows it.
  auto start_for = [&](double v, double range) {
    const double travel = std::abs(v) * (c.frames - 1);
    if (travel <= range) {
      const double s = (range - travel) * u01(rng);
      return v < 0 ? s + travel : s;
    }
    return range * u01(rng);
  };

  std::vector<Track> tracks(static_cast<std::size_t>(c.num_tracks));
  for (int i = 0; i < c.num_tracks; ++i) {
    Track& t = tracks[static_cast<std::size_t>(i)];
    t.true_class = i % c.num_classes;
    t.origin_x = (i % g.cols) * g.cell_w;
    t.origin_y = (i / g.cols) * g.cell_h;
    t.vx = (2.0 * u01(rng) - 1.0) * c.max_speed;
    t.vy = (2.0 * u01(rng) - 1.0) * c.max_speed;
    t.start_x = start_for(t.vx, range_x);
    t.start_y = start_for(t.vy, range_y);
  }

  auto wrap = [](double v, double range) {
    double r = std::fmod(v, range);
    return r < 0 ? r + range : r;
  };

  SimOutput out;
  out.registry = ClassRegistry::anonymous(static_cast<std::size_t>(c.num_classes));
  std::normal_distribution<double> jitter(0.0, c.jitter_sigma > 0 ? c.jitter_sigma : 1.0);
  for (int f = 0; f < c.frames; ++f) {
    FrameRecord gt;
    gt.index = f;
    gt.image = ImageSize{c.image_w, c.image_h};
    gt.annotated = true;
    FrameRecord det;
    det.index = f;
    det.image = gt.image;
    for (const Track& t : tracks) {
      const BBox box{t.origin_x + wrap(t.start_x + t.vx * f, range_x),
                     t.origin_y + wrap(t.start_y + t.vy * f, range_y), g.side, g.side};
      gt.annotations.push_back(Annotation{f, box, t.true_class});
      if (u01(rng) < c.detection_dropout) continue;
      Detection d;
      d.frame = f;
      d.box = box;
      if (c.jitter_sigma > 0.0) {
        d.box.x += jitter(rng);
        d.box.y += jitter(rng);
        d.box.w = std::max(1.0, d.box.w + jitter(rng));
        d.box.h = std::max(1.0, d.box.h + jitter(rng));
      }
      d.objectness = clipped_normal(rng, c.objectness_mean, 0.05);
      d.scores = draw_scores(rng, t.true_class, c);
      det.detections.push_back(std::move(d));
    }
    out.ground_truth.frames.push_back(std::move(gt));
    if (!det.detections.empty()) out.detections.frames.push_back(std::move(det));
  }
  return out;
}

double vote_accuracy_oracle(double per_frame_top1_accuracy, int tracklet_len, int num_classes,
                            VoteScheme scheme, int trials, std::uint64_t seed,
                            const SimConfig& score_model) {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (tracklet_len < 1) throw ConfigError("tracklet length must be at least 1");
  SimConfig model = score_model;
  model.per_frame_top1_accuracy = per_frame_top1_accuracy;
  model.num_classes = num_classes;
  if (num_classes < 1 || !unit(per_frame_top1_accuracy)) {
    throw ConfigError("oracle needs num_classes >= 1 and accuracy in [0,1]");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_class(0, num_classes - 1);
  const auto classes = static_cast<std::size_t>(num_classes);
  std::vector<double> sum(classes);
  long correct = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const int truth = pick_class(rng);
    std::fill(sum.begin(), sum.end(), 0.0);
    double best = -1.0;
    std::size_t best_class = 0;
    for (int m = 0; m < tracklet_len; ++m) {
      const std::vector<double> s = draw_scores(rng, truth, model);
      for (std::size_t k = 0; k < classes; ++k) {
        sum[k] += s[k];
        if (s[k] > best || (s[k] == best && k < best_class)) {
          best = s[k];
          best_class = k;
        }
      }
    }
    std::size_t voted = best_class;
    if (scheme == VoteScheme::Average) {
      voted = static_cast<std::size_t>(std::max_element(sum.begin(), sum.end()) - sum.begin());
    }
    if (voted == static_cast<std::size_t>(truth)) ++correct;
  }
  return static_cast<double>(correct) / trials;
}

}  // namespace trackid
