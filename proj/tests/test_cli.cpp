#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trackid/cli.hpp"
#include "trackid/eval.hpp"
#include "trackid/ingest.hpp"
#include "trackid/report.hpp"

using namespace trackid;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trackid_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// A small simulated fixture on disk.
fs::path fixture() {
  static const fs::path dir = [] {
    const fs::path d = scratch("fixture");
    const Result r = run({"simulate", "--out-dir", d.string(), "--num-tracks", "14", "--frames", "30",
                          "--per-frame-top1-accuracy", "0.7", "--jitter-sigma", "0.5",
                          "--detection-dropout", "0.05"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> io_flags() {
  const fs::path d = fixture();
  return {"--detections", (d / "detections.jsonl").string(), "--annotations", (d / "manifest.tsv").string(),
          "--classes", (d / "classes.txt").string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const fs::path& p) { return read_file(p); }

/// Table output without the first column, so rows from different schemes compare.
std::string strip_labels(const std::string& table) {
  std::istringstream in(table);
  std::string line, out;
  while (std::getline(in, line)) out += (line.size() > 12 ? line.substr(12) : line) + "\n";
  return out;
}

}  // namespace

TEST_CASE("simulate writes the standard formats") {
  const fs::path d = fixture();
  for (const char* f : {"detections.jsonl", "manifest.tsv", "classes.txt", "sim.cfg", "labels/000000.txt"}) {
    CHECK(fs::exists(d / f));
  }
  const ClassRegistry reg = parse_class_names(slurp(d / "classes.txt"));
  CHECK(reg.size() == 7);
  CHECK(load_ground_truth(d / "manifest.tsv", reg).annotation_count() == 14 * 30);

  // Omitting --seed uses the fixed default: same bytes twice.
  const fs::path again = scratch("again");
  REQUIRE(run({"simulate", "--out-dir", again.string(), "--num-tracks", "14", "--frames", "30",
               "--per-frame-top1-accuracy", "0.7", "--jitter-sigma", "0.5", "--detection-dropout", "0.05"})
              .code == 0);
  CHECK(slurp(again / "detections.jsonl") == slurp(d / "detections.jsonl"));

  // A config file reproduces the run.
  const fs::path from_cfg = scratch("from_cfg");
  REQUIRE(run({"simulate", "--out-dir", from_cfg.string(), "--config", (d / "sim.cfg").string()}).code == 0);
  CHECK(slurp(from_cfg / "detections.jsonl") == slurp(d / "detections.jsonl"));
}

TEST_CASE("eval-multi with max-len 1 equals eval-single") {
  const fs::path d = scratch("degenerate");
  const Result single = run(concat({"eval-single", "--out", (d / "single.txt").string()}, io_flags()));
  REQUIRE(single.code == 0);
  for (const char* scheme : {"avg", "max"}) {
    const Result multi = run(concat({"eval-multi", "--max-len", "1", "--scheme", scheme, "--out",
                                     (d / "multi.txt").string()}, io_flags()));
    REQUIRE(multi.code == 0);
    CHECK(slurp(d / "multi.txt") == slurp(d / "single.txt"));
    CHECK(strip_labels(multi.out) == strip_labels(single.out));
  }
}

TEST_CASE("subcommands are thin wrappers over the library") {
  const fs::path d = scratch("wrapper");
  REQUIRE(run(concat({"eval-multi", "--scheme", "avg", "--max-len", "3", "--out", (d / "r.json").string()}, io_flags())).code == 0);

  const ClassRegistry reg = parse_class_names(slurp(fixture() / "classes.txt"));
  const Sequence dets = parse_detection_dump_text(slurp(fixture() / "detections.jsonl"));
  const Sequence s = merge_sequences(dets, load_ground_truth(fixture() / "manifest.tsv", reg));
  const MetricsReport direct = evaluate_multi_frame(s, reg.size(), {3, 1, 0.5}, VoteScheme::Average, 0.5, 0.25);
  CHECK(slurp(d / "r.json") == report_json(direct, reg));
}

TEST_CASE("usage errors exit 2 and name the flag") {
  Result r = run(concat({"eval-single", "--bogus"}, io_flags()));
  CHECK(r.code == cli::kExitParse);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);

  r = run(concat({"eval-multi", "--theta", "1.5"}, io_flags()));
  CHECK(r.code == cli::kExitParse);
  CHECK(r.err.find("--theta") != std::string::npos);

  r = run(concat({"eval-multi", "--scheme", "median"}, io_flags()));
  CHECK(r.code == cli::kExitParse);
  CHECK(r.err.find("--scheme") != std::string::npos);

  CHECK(run({}).code == cli::kExitParse);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("bad inputs: parse errors exit 2, validation errors exit 1") {
  const fs::path d = scratch("bad");
  std::ofstream(d / "bad.jsonl") << "{\"frame\":0,\"x\":1}\n";
  std::ofstream(d / "classes.txt") << "a\nb\n";
  std::ofstream(d / "manifest.tsv") << "0\t100\t100\tlabels.txt\n";
  std::ofstream(d / "labels.txt") << "5 0.5 0.5 0.1 0.1\n";
  std::ofstream(d / "good.jsonl") << R"({"frame":0,"x":1,"y":1,"w":5,"h":5,"objectness":0.5,"scores":[0.5,0.5]})" << "\n";
  std::ofstream(d / "wide.jsonl") << R"({"frame":0,"x":1,"y":1,"w":5,"h":5,"objectness":0.5,"scores":[0.5,0.5,0.1]})" << "\n";

  const std::string cls = (d / "classes.txt").string();
  const std::string man = (d / "manifest.tsv").string();
  Result r = run({"eval-single", "--detections", (d / "bad.jsonl").string(), "--annotations", man, "--classes", cls});
  CHECK(r.code == cli::kExitParse);
  r = run({"eval-single", "--detections", (d / "good.jsonl").string(), "--annotations", man, "--classes", cls});
  CHECK(r.code == cli::kExitValidation);
  std::ofstream(d / "labels.txt", std::ios::trunc) << "1 0.5 0.5 0.1 0.1\n";
  r = run({"eval-single", "--detections", (d / "wide.jsonl").string(), "--annotations", man, "--classes", cls});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("scores") != std::string::npos);
  r = run({"eval-single", "--detections", (d / "good.jsonl").string(), "--annotations", man, "--classes", cls});
  CHECK(r.code == 0);
}

TEST_CASE("ablate emits the three sweep blocks") {
  const fs::path d = scratch("ablate");
  const Result r = run(concat({"ablate", "--out", (d / "grid.json").string()}, io_flags()));
  REQUIRE(r.code == 0);
  for (const char* s : {"Tracklet Length", "Tracklet Stride", "Association Threshold", "3 frames", "10 frames", "IoU>0.75"}) {
    CHECK(r.out.find(s) != std::string::npos);
  }
  std::size_t rows = 0;
  for (std::size_t p = r.out.find("Average"); p != std::string::npos; p = r.out.find("Average", p + 1)) ++rows;
  CHECK(rows == 3);
  const std::string json = slurp(d / "grid.json");
  std::size_t entries = 0;
  for (std::size_t p = json.find("\"block\""); p != std::string::npos; p = json.find("\"block\"", p + 1)) ++entries;
  CHECK(entries == 18);
}

TEST_CASE("track and vote dump their outputs") {
  const fs::path d = fixture();
  const Result t = run({"track", "--detections", (d / "detections.jsonl").string()});
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("tracklet_id,frame,det_index\n", 0) == 0);
  const Result v = run({"vote", "--detections", (d / "detections.jsonl").string(), "--scheme", "avg"});
  REQUIRE(v.code == 0);
  CHECK(v.out.find("\"voted_class\"") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : v.out) lines += ch == '\n';
  CHECK(lines == parse_detection_dump_text(slurp(d / "detections.jsonl")).detection_count());
}

TEST_CASE("split, kfold and crossval") {
  const fs::path d = scratch("split");
  std::ofstream items(d / "items.txt");
  for (int i = 0; i < 771; ++i) items << "img" << i << "\t0\n";
  for (int i = 0; i < 615; ++i) items << "b" << i << "\t1\n";
  items.close();
  Result r = run({"split", "--items", (d / "items.txt").string(), "--out-dir", d.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "train 1109\ntest 277\n");  // 154 + 123 test
  r = run({"kfold", "--items", (d / "items.txt").string(), "--k", "5", "--out-dir", d.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d / "fold_4.txt"));
  CHECK(run({"kfold", "--items", (d / "items.txt").string(), "--k", "1"}).code == cli::kExitParse);

  r = run({"kfold", "--annotations", (fixture() / "manifest.tsv").string(), "--classes",
           (fixture() / "classes.txt").string(), "--out-dir", d.string()});
  CHECK(r.code == 0);

  r = run(concat({"crossval", "--k", "3"}, io_flags()));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("3-fold means") != std::string::npos);
  CHECK(r.out.find("Maximum") != std::string::npos);
}

TEST_CASE("stats reports the small-box fraction") {
  const fs::path d = scratch("stats");
  std::ofstream(d / "classes.txt") << "Ayana\n";
  std::ofstream(d / "a.txt") << "0 0.5 0.5 0.01 0.01\n0 0.5 0.5 0.5 0.5\n";
  std::ofstream(d / "m.tsv") << "0\t1000\t1000\ta.txt\n";
  const Result r = run({"stats", "--annotations", (d / "m.tsv").string(), "--classes", (d / "classes.txt").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0.5000") != std::string::npos);
}

TEST_CASE("the executable maps exit codes") {
  const std::string bin = TRACKID_CLI_PATH;
  const int status = std::system((bin + " eval-single --nope >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
