#include "trackid/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trackid/association.hpp"
#include "trackid/errors.hpp"
#include "trackid/eval.hpp"
#include "trackid/ingest.hpp"
#include "trackid/partition.hpp"
#include "trackid/report.hpp"
#include "trackid/simulate.hpp"
#include "trackid/voting.hpp"

namespace trackid::cli {

namespace fs = std::filesystem;

namespace {

/// Bad flag values discovered after CLI11 parsing; reported like a parse error.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct InputFlags {
  std::string detections;
  std::string annotations;
  std::string classes;
};

struct PipelineFlags {
  int max_len = 5;
  int stride = 1;
  double theta = 0.5;
  std::string scheme = "max";
  double iou_thresh = kDefaultIouThreshold;
  double conf = kDefaultOperatingConfidence;
};

struct OutputFlags {
  std::string out;
};

void add_inputs(CLI::App* app, InputFlags& f, bool need_detections, bool need_annotations) {
  auto* d = app->add_option("--detections", f.detections, "Detection dump (one record per line)");
  if (need_detections) d->required();
  auto* a = app->add_option("--annotations", f.annotations, "Manifest of annotated frames");
  if (need_annotations) a->required();
  app->add_option("--classes", f.classes, "Class names, one per line");
}

void add_tracklet_flags(CLI::App* app, PipelineFlags& f) {
  app->add_option("--max-len", f.max_len, "Maximum tracklet length in frames")->capture_default_str();
  app->add_option("--stride", f.stride, "Frame gap between associated detections")->capture_default_str();
  app->add_option("--theta", f.theta, "IoU association threshold (strict >)")->capture_default_str();
}

void add_eval_flags(CLI::App* app, PipelineFlags& f) {
  app->add_option("--iou-thresh", f.iou_thresh, "IoU needed to match ground truth")->capture_default_str();
  app->add_option("--conf", f.conf, "Operating confidence for precision/recall")->capture_default_str();
}

void check_ratio(double v, const char* flag) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw UsageError(std::string(flag) + " must lie in [0,1], got " + format_double(v));
  }
}

TrackletParams tracklet_params(const PipelineFlags& f) {
  TrackletParams p{f.max_len, f.stride, f.theta};
  if (p.max_len < 1) throw UsageError("--max-len must be >= 1");
  if (p.stride < 1) throw UsageError("--stride must be >= 1");
  check_ratio(p.theta, "--theta");
  return p;
}

VoteScheme scheme_flag(const std::string& s) {
  try {
    return parse_vote_scheme(s);
  } catch (const ConfigError&) {
    throw UsageError("--scheme must be avg or max, got '" + s + "'");
  }
}

void check_eval_flags(const PipelineFlags& f) {
  check_ratio(f.iou_thresh, "--iou-thresh");
  check_ratio(f.conf, "--conf");
}

Sequence read_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open detections '" + path + "'");
  try {
    return parse_detection_dump(in);
  } catch (const SchemaError& e) {
    throw SchemaError(0, path + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

ClassRegistry resolve_registry(const InputFlags& f, const Sequence* detections) {
  if (!f.classes.empty()) return parse_class_names(read_file(f.classes));
  if (detections) {
    for (const auto& fr : detections->frames) {
      if (!fr.detections.empty()) return ClassRegistry::anonymous(fr.detections.front().scores.size());
    }
  }
  throw UsageError("--classes is required when it cannot be inferred from detections");
}

void require_valid(const Sequence& s, const ClassRegistry& registry) {
  const auto violations = validate_sequence(s, registry);
  if (violations.empty()) return;
  std::string msg = std::to_string(violations.size()) + " invalid record(s):";
  for (std::size_t i = 0; i < violations.size() && i < 10; ++i) msg += "\n  " + violations[i].message;
  throw ConfigError(msg);
}

struct Loaded {
  ClassRegistry registry;
  Sequence sequence;
};

Loaded load_inputs(const InputFlags& f) {
  Loaded l;
  Sequence dets = read_detections(f.detections);
  l.registry = resolve_registry(f, &dets);
  Sequence gt;
  if (!f.annotations.empty()) gt = load_ground_truth(f.annotations, l.registry);
  l.sequence = merge_sequences(dets, gt);
  require_valid(l.sequence, l.registry);
  return l;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

/// JSON for `.json` paths, key=value lines otherwise.
void write_report(const std::string& path, const MetricsReport& r, const ClassRegistry& registry) {
  if (path.empty()) return;
  const bool json = fs::path(path).extension() == ".json";
  write_text(path, json ? report_json(r, registry) : report_key_values(r, registry));
}

std::string row_label(VoteScheme s) { return s == VoteScheme::Average ? "Average" : "Maximum"; }

/// Items for split/kfold: `<id>\t<class>` lines, or one item per annotated frame
/// labelled with the frame's most frequent class (ties to the lower index).
std::vector<LabeledItem> read_items(const std::string& items_path, const InputFlags& f) {
  std::vector<LabeledItem> items;
  if (!items_path.empty()) {
    std::optional<ClassRegistry> registry;
    if (!f.classes.empty()) registry = parse_class_names(read_file(f.classes));
    std::istringstream in(read_file(items_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      std::istringstream fields(line);
      std::string id, cls;
      if (!(fields >> id >> cls)) throw ParseError(line_no, items_path + ": expected `<id> <class>`");
      LabeledItem item{id, 0};
      if (registry && registry->index_of(cls)) {
        item.class_index = static_cast<int>(*registry->index_of(cls));
      } else {
        try {
          std::size_t used = 0;
          item.class_index = std::stoi(cls, &used);
          if (used != cls.size()) throw std::invalid_argument(cls);
        } catch (const std::exception&) {
          throw ParseError(line_no, items_path + ": unknown class '" + cls + "'");
        }
      }
      items.push_back(std::move(item));
    }
    return items;
  }
  const ClassRegistry registry = resolve_registry(f, nullptr);
  const Sequence gt = load_ground_truth(f.annotations, registry);
  for (const auto& fr : gt.frames) {
    if (fr.annotations.empty()) continue;
    std::vector<int> counts(registry.size(), 0);
    for (const auto& a : fr.annotations) ++counts[static_cast<std::size_t>(a.class_index)];
    const int cls = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    items.push_back(LabeledItem{std::to_string(fr.index), cls});
  }
  return items;
}

void write_ids(const fs::path& path, const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + '\n';
  write_text(path.string(), text);
}

void print_warnings(const std::vector<DegenerateClass>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w.message << '\n';
}

const std::vector<std::string>& sim_keys() {
  static const std::vector<std::string> keys = {
      "num_classes",     "num_tracks",        "frames",       "image_w",
      "image_h",         "per_frame_top1_accuracy", "correct_score_mean", "wrong_score_mean",
      "score_sigma",     "objectness_mean",   "detection_dropout", "jitter_sigma",
      "max_speed"};
  return keys;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"trackid: tracklet identity voting and detection evaluation", "trackid"};
  app.require_subcommand(1);

  InputFlags in;
  PipelineFlags pipe;
  OutputFlags outf;
  std::uint64_t seed = kDefaultSeed;
  std::string items_path;
  std::string out_dir = ".";
  double fraction = 0.2;
  int k = 5;
  std::string sim_config_path;
  std::vector<std::string> sim_sets;
  std::map<std::string, std::string> sim_flags;
  for (const auto& key : sim_keys()) sim_flags[key];

  auto* eval_single = app.add_subcommand("eval-single", "Evaluate per-frame identification");
  add_inputs(eval_single, in, true, true);
  add_eval_flags(eval_single, pipe);
  eval_single->add_option("--out", outf.out, "Write the report (.json or key=value)");

  auto* eval_multi = app.add_subcommand("eval-multi", "Evaluate tracklet-voted identification");
  add_inputs(eval_multi, in, true, true);
  add_tracklet_flags(eval_multi, pipe);
  eval_multi->add_option("--scheme", pipe.scheme, "Vote scheme: avg or max")->capture_default_str();
  add_eval_flags(eval_multi, pipe);
  eval_multi->add_option("--out", outf.out, "Write the report (.json or key=value)");

  auto* track = app.add_subcommand("track", "Build tracklets and dump their members");
  add_inputs(track, in, true, false);
  add_tracklet_flags(track, pipe);
  track->add_option("--out", outf.out, "Tracklet dump path (default: stdout)");

  auto* vote_cmd = app.add_subcommand("vote", "Label detections with their tracklet's identity");
  add_inputs(vote_cmd, in, true, false);
  add_tracklet_flags(vote_cmd, pipe);
  vote_cmd->add_option("--scheme", pipe.scheme, "Vote scheme: avg or max")->capture_default_str();
  vote_cmd->add_option("--out", outf.out, "Labeled stream path (default: stdout)");

  auto* ablate = app.add_subcommand("ablate", "Sweep tracklet length, stride and threshold");
  add_inputs(ablate, in, true, true);
  add_eval_flags(ablate, pipe);
  ablate->add_option("--out", outf.out, "Write the grid as JSON");

  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold evaluation over annotated frames");
  add_inputs(crossval, in, true, true);
  add_tracklet_flags(crossval, pipe);
  add_eval_flags(crossval, pipe);
  crossval->add_option("--k", k, "Number of folds")->capture_default_str();
  crossval->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  crossval->add_option("--out", outf.out, "Write the fold means as JSON");

  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("--items", items_path, "Item list: `<id> <class>` per line");
  split->add_option("--annotations", in.annotations, "Manifest; one item per annotated frame");
  split->add_option("--classes", in.classes, "Class names, one per line");
  split->add_option("--fraction", fraction, "Test fraction")->capture_default_str();
  split->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out-dir", out_dir, "Directory for train.txt and test.txt")->capture_default_str();

  auto* kfold = app.add_subcommand("kfold", "Stratified k-fold partition");
  kfold->add_option("--items", items_path, "Item list: `<id> <class>` per line");
  kfold->add_option("--annotations", in.annotations, "Manifest; one item per annotated frame");
  kfold->add_option("--classes", in.classes, "Class names, one per line");
  kfold->add_option("--k", k, "Number of folds")->capture_default_str();
  kfold->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  kfold->add_option("--out-dir", out_dir, "Directory for fold_<i>.txt")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic annotated detection stream");
  simulate->add_option("--config", sim_config_path, "key=value configuration file");
  simulate->add_option("--set", sim_sets, "Override one key: --set key=value");
  for (const auto& key : sim_keys()) simulate->add_option(flag_name(key), sim_flags[key], "Config key " + key);
  auto* sim_seed = simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* stats = app.add_subcommand("stats", "Per-class box counts and small-box fractions");
  stats->add_option("--annotations", in.annotations, "Manifest of annotated frames")->required();
  stats->add_option("--classes", in.classes, "Class names, one per line")->required();
  stats->add_option("--out", outf.out, "Write the statistics as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitParse;
  }

  try {
    if (eval_single->parsed()) {
      check_eval_flags(pipe);
      const Loaded l = load_inputs(in);
      const MetricsReport r = evaluate_single_frame(l.sequence, l.registry.size(), pipe.iou_thresh, pipe.conf);
      render_metrics_table({{"Single", r}}, out);
      out << '\n';
      render_class_table(r, l.registry, out);
      write_report(outf.out, r, l.registry);
    } else if (eval_multi->parsed()) {
      const TrackletParams p = tracklet_params(pipe);
      const VoteScheme scheme = scheme_flag(pipe.scheme);
      check_eval_flags(pipe);
      const Loaded l = load_inputs(in);
      const MetricsReport r = evaluate_multi_frame(l.sequence, l.registry.size(), p, scheme,
                                                   pipe.iou_thresh, pipe.conf);
      render_metrics_table({{row_label(scheme), r}}, out);
      out << '\n';
      render_class_table(r, l.registry, out);
      write_report(outf.out, r, l.registry);
    } else if (track->parsed()) {
      const TrackletParams p = tracklet_params(pipe);
      const Loaded l = load_inputs(in);
      const auto tracklets = build_tracklets(l.sequence, p);
      if (outf.out.empty()) {
        write_tracklet_dump(tracklets, out);
      } else {
        std::ostringstream os;
        write_tracklet_dump(tracklets, os);
        write_text(outf.out, os.str());
      }
    } else if (vote_cmd->parsed()) {
      const TrackletParams p = tracklet_params(pipe);
      const VoteScheme scheme = scheme_flag(pipe.scheme);
      const Loaded l = load_inputs(in);
      const auto labeled = relabel(l.sequence, build_tracklets(l.sequence, p), scheme);
      std::ostringstream os;
      serialize_labeled_stream(labeled, os);
      if (outf.out.empty()) out << os.str();
      else write_text(outf.out, os.str());
    } else if (ablate->parsed()) {
      check_eval_flags(pipe);
      const Loaded l = load_inputs(in);
      const std::size_t c = l.registry.size();
      const MetricsReport single = evaluate_single_frame(l.sequence, c, pipe.iou_thresh, pipe.conf);
      out << "Single frame: mAP " << percent_with_std(single.map, single.map_std) << "\n\n";

      struct Block {
        const char* title;
        const char* key;
        std::vector<TrackletParams> params;
        std::vector<std::string> labels;
      };
      const std::vector<Block> blocks = {
          {"Tracklet Length", "max_len", {{3, 1, 0.5}, {5, 1, 0.5}, {10, 1, 0.5}}, {"3 frames", "5 frames", "10 frames"}},
          {"Tracklet Stride", "stride", {{5, 1, 0.5}, {5, 3, 0.5}, {5, 5, 0.5}}, {"1 frame", "3 frames", "5 frames"}},
          {"Association Threshold", "theta", {{5, 1, 0.25}, {5, 1, 0.5}, {5, 1, 0.75}}, {"IoU>0.25", "IoU>0.5", "IoU>0.75"}},
      };
      nlohmann::ordered_json grid = nlohmann::ordered_json::array();
      for (const Block& b : blocks) {
        std::string line = b.title;
        line.resize(std::max<std::size_t>(line.size() + 2, 24), ' ');
        for (const auto& lbl : b.labels) {
          std::string cell = lbl;
          cell.resize(18, ' ');
          line += cell;
        }
        out << line << '\n';
        for (VoteScheme scheme : {VoteScheme::Average, VoteScheme::Maximum}) {
          std::string row = row_label(scheme);
          row.resize(std::max<std::size_t>(std::string(b.title).size() + 2, 24), ' ');
          out << row;
          for (std::size_t i = 0; i < b.params.size(); ++i) {
            const TrackletParams& p = b.params[i];
            const MetricsReport r = evaluate_multi_frame(l.sequence, c, p, scheme, pipe.iou_thresh, pipe.conf);
            std::string cell = percent_with_std(r.map, r.map_std);
            out << cell;
            // "±" occupies two bytes.
            for (std::size_t pad = cell.size() - 1; pad < 18; ++pad) out << ' ';
            nlohmann::ordered_json e;
            e["block"] = b.key;
            e["max_len"] = p.max_len;
            e["stride"] = p.stride;
            e["theta"] = p.theta;
            e["scheme"] = std::string(to_string(scheme));
            e["map"] = r.map;
            e["map_std"] = r.map_std;
            e["precision"] = r.precision;
            e["recall"] = r.recall;
            grid.push_back(std::move(e));
          }
          out << '\n';
        }
        out << '\n';
      }
      if (!outf.out.empty()) {
        nlohmann::ordered_json j;
        j["single_map"] = single.map;
        j["single_map_std"] = single.map_std;
        j["grid"] = std::move(grid);
        write_text(outf.out, j.dump(2) + "\n");
      }
    } else if (crossval->parsed()) {
      const TrackletParams p = tracklet_params(pipe);
      check_eval_flags(pipe);
      if (k < 2) throw UsageError("--k must be >= 2");
      const Loaded l = load_inputs(in);
      std::vector<LabeledItem> items;
      for (const auto& fr : l.sequence.frames) {
        if (!fr.annotated || fr.annotations.empty()) continue;
        std::vector<int> counts(l.registry.size(), 0);
        for (const auto& a : fr.annotations) ++counts[static_cast<std::size_t>(a.class_index)];
        const int cls = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        items.push_back(LabeledItem{std::to_string(fr.index), cls});
      }
      const FoldResult folds = stratified_kfold(items, k, seed);
      print_warnings(folds.warnings, err);
      std::vector<MetricsReport> single, average, maximum;
      for (const auto& fold : folds.folds) {
        const std::set<std::string> members(fold.begin(), fold.end());
        Sequence s = l.sequence;
        for (auto& fr : s.frames) fr.annotated = fr.annotated && members.count(std::to_string(fr.index));
        if (!s.has_annotations()) continue;
        const std::size_t c = l.registry.size();
        single.push_back(evaluate_single_frame(s, c, pipe.iou_thresh, pipe.conf));
        average.push_back(evaluate_multi_frame(s, c, p, VoteScheme::Average, pipe.iou_thresh, pipe.conf));
        maximum.push_back(evaluate_multi_frame(s, c, p, VoteScheme::Maximum, pipe.iou_thresh, pipe.conf));
      }
      if (single.empty()) throw NoAnnotations();
      const MetricsReport ms = stratified_eval_folds(single);
      const MetricsReport ma = stratified_eval_folds(average);
      const MetricsReport mm = stratified_eval_folds(maximum);
      out << single.size() << "-fold means\n";
      render_metrics_table({{"Single", ms}, {"Average", ma}, {"Maximum", mm}}, out);
      if (!outf.out.empty()) {
        nlohmann::ordered_json j;
        j["folds"] = single.size();
        j["single"] = nlohmann::ordered_json::parse(report_json(ms, l.registry));
        j["average"] = nlohmann::ordered_json::parse(report_json(ma, l.registry));
        j["maximum"] = nlohmann::ordered_json::parse(report_json(mm, l.registry));
        write_text(outf.out, j.dump(2) + "\n");
      }
    } else if (split->parsed()) {
      if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("--fraction must lie strictly between 0 and 1");
      if (items_path.empty() == in.annotations.empty()) {
        throw UsageError("give exactly one of --items or --annotations");
      }
      const SplitResult r = stratified_split(read_items(items_path, in), fraction, seed);
      print_warnings(r.warnings, err);
      fs::create_directories(out_dir);
      write_ids(fs::path(out_dir) / "train.txt", r.train);
      write_ids(fs::path(out_dir) / "test.txt", r.test);
      out << "train " << r.train.size() << "\ntest " << r.test.size() << '\n';
    } else if (kfold->parsed()) {
      if (k < 2) throw UsageError("--k must be >= 2");
      if (items_path.empty() == in.annotations.empty()) {
        throw UsageError("give exactly one of --items or --annotations");
      }
      const FoldResult r = stratified_kfold(read_items(items_path, in), k, seed);
      print_warnings(r.warnings, err);
      fs::create_directories(out_dir);
      for (std::size_t i = 0; i < r.folds.size(); ++i) {
        write_ids(fs::path(out_dir) / ("fold_" + std::to_string(i) + ".txt"), r.folds[i]);
        out << "fold_" << i << ' ' << r.folds[i].size() << '\n';
      }
    } else if (simulate->parsed()) {
      SimConfig cfg;
      cfg.seed = kDefaultSeed;
      if (!sim_config_path.empty()) cfg = parse_sim_config(read_file(sim_config_path), cfg);
      try {
        for (const auto& [key, value] : sim_flags) {
          if (!value.empty()) set_sim_config_value(cfg, key, value);
        }
        for (const auto& s : sim_sets) {
          const auto eq = s.find('=');
          if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
          set_sim_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      if (sim_seed->count()) cfg.seed = seed;
      cfg.validate();
      const SimOutput sim = generate(cfg);
      const fs::path dir = out_dir;
      fs::create_directories(dir / "labels");
      std::string names;
      for (const auto& n : sim.registry.names()) names += n + '\n';
      write_text((dir / "classes.txt").string(), names);
      write_text((dir / "detections.jsonl").string(), serialize_detection_dump(sim.detections));
      write_text((dir / "sim.cfg").string(), serialize_sim_config(cfg));
      Manifest manifest;
      for (const auto& fr : sim.ground_truth.frames) {
        char name[32];
        std::snprintf(name, sizeof name, "labels/%06lld.txt", static_cast<long long>(fr.index));
        write_text((dir / name).string(),
                   serialize_annotation_text(fr.annotations, cfg.image_w, cfg.image_h));
        manifest.entries.push_back({fr.index, cfg.image_w, cfg.image_h, std::string(name)});
      }
      write_text((dir / "manifest.tsv").string(), serialize_manifest(manifest));
      out << "frames " << sim.ground_truth.frames.size() << "\nannotations "
          << sim.ground_truth.annotation_count() << "\ndetections " << sim.detections.detection_count()
          << '\n';
    } else if (stats->parsed()) {
      const ClassRegistry registry = parse_class_names(read_file(in.classes));
      const Sequence gt = load_ground_truth(in.annotations, registry);
      const DatasetStats st = dataset_stats(all_annotations(gt), registry);
      render_stats(st, registry, out);
      if (!outf.out.empty()) {
        nlohmann::ordered_json j;
        j["total"] = st.total;
        j["small"] = st.total_small;
        j["small_fraction"] = st.small_fraction;
        j["mean_area"] = st.mean_area;
        auto arr = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < st.per_class.size(); ++c) {
          nlohmann::ordered_json e;
          e["class"] = registry.name(c);
          e["count"] = st.per_class[c].count;
          e["small"] = st.per_class[c].small_count;
          e["small_fraction"] = st.per_class[c].small_fraction;
          e["mean_area"] = st.per_class[c].mean_area;
          arr.push_back(std::move(e));
        }
        j["classes"] = std::move(arr);
        write_text(outf.out, j.dump(2) + "\n");
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace trackid::cli
