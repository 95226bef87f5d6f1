#include "depthtrack/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace depthtrack;

namespace {

// Two 20x20 actors walking right at 3 px/frame on separate rows. They share
// one size and depth on purpose: in a blob-free frame the mean-area cut keeps
// only regions strictly above the mean, so unequal movers would lose the
// smaller one. Equal areas tie at the mean and the largest-region guard keeps
// both. Optional third actor that never moves, optional per-frame noise
// patches small enough for the area filter to eat.
SceneSpec mover_spec(int frames, bool with_static, bool with_blobs) {
  SceneSpec s;
  s.frames = frames;
  s.width = 128;
  s.height = 112;
  s.background_depth = 8000;
  ActorSpec a;
  a.x = 8;
  a.y = 8;
  a.w = 20;
  a.h = 20;
  a.depth = 1500;
  a.vx = 3;
  ActorSpec b = a;
  b.y = 80;
  s.actors = {a, b};
  if (with_static) {
    ActorSpec c;
    c.x = 96;
    c.y = 44;
    c.w = 20;
    c.h = 20;
    c.depth = 2000;
    s.actors.push_back(c);
  }
  if (with_blobs) {
    s.noise.blob_count = 4;
    s.noise.blob_area_min = 100;
    s.noise.blob_area_max = 144;
  }
  return s;
}

std::filesystem::path write_scene(const SyntheticScene& scene,
                                  const testutil::TempDir& dir,
                                  const std::string& leaf) {
  const std::filesystem::path root = dir.str(leaf);
  std::filesystem::create_directories(root);
  std::string manifest = "gt: gt.txt\n";
  for (size_t t = 0; t < scene.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.pgm", t);
    save_depth_frame(scene.frames[t], root / name);
    manifest += name;
    manifest += "\n";
  }
  save_ground_truth(scene.gt, root / "gt.txt");
  testutil::write_file(root / "manifest.txt", manifest);
  return root / "manifest.txt";
}

std::vector<const Region*> closed_regions(const RegionSet& rs) {
  std::vector<const Region*> out;
  for (const Region& r : rs.regions) {
    if (r.category != RegionCategory::Background) out.push_back(&r);
  }
  return out;
}

bool box_within(const Box& got, const Box& want, int slack) {
  return std::abs(got.x - want.x) <= slack &&
         std::abs(got.y - want.y) <= slack &&
         std::abs(got.right() - want.right()) <= slack &&
         std::abs(got.bottom() - want.bottom()) <= slack;
}

// best ground-truth box for a detection, by overlap
const Box* best_truth(const Box& got, const std::vector<GroundTruthEntry>& gt) {
  const Box* best = nullptr;
  double best_r = 0;
  for (const GroundTruthEntry& e : gt) {
    const double r = overlap_ratio(got, e.box);
    if (r > best_r) {
      best_r = r;
      best = &e.box;
    }
  }
  return best;
}

std::string serialize(const std::vector<TrackRecord>& records) {
  std::string s;
  for (const TrackRecord& r : records) s += format_track_record(r) + "\n";
  return s;
}

}  // namespace

TEST_CASE("process_frame recovers clean actors as closed regions") {
  const SyntheticScene scene = synthesize_scene(mover_spec(1, false, false), 3);
  PipelineConfig cfg;
  const RegionSet rs = process_frame(scene.frames[0], cfg);

  const std::vector<const Region*> closed = closed_regions(rs);
  REQUIRE(closed.size() == 2);
  for (int32_t v : rs.labels) CHECK(v != 0);

  const std::vector<GroundTruthEntry>& truth = scene.gt.frames.at(0);
  REQUIRE(truth.size() == 2);
  for (const Region* r : closed) {
    const Box* want = best_truth(r->bbox, truth);
    REQUIRE(want != nullptr);
    CHECK_MESSAGE(box_within(r->bbox, *want, 1),
                  "bbox " << r->bbox.x << "," << r->bbox.y << " " << r->bbox.w
                          << "x" << r->bbox.h);
  }
}

TEST_CASE("process_frame drops injected noise patches") {
  // patches are capped at 144 px, far below the 400 px actors, so the mean
  // area cut removes every one of them
  const SceneSpec spec = mover_spec(1, true, true);
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    CAPTURE(seed);
    const SyntheticScene scene = synthesize_scene(spec, seed);
    PipelineConfig cfg;
    const RegionSet rs = process_frame(scene.frames[0], cfg);
    const std::vector<const Region*> closed = closed_regions(rs);
    REQUIRE(closed.size() == 3);
    REQUIRE(rs.tau.has_value());
    for (const Region* r : closed) CHECK(r->area > *rs.tau);
  }
}

TEST_CASE("run_detection scores a clean moving pair perfectly") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(12, false, false), 3);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "clean"));
  PipelineConfig cfg;

  const DetectionRun run = run_detection(seq, cfg);
  // the window fills at frame k-1 and reports every frame from there on
  REQUIRE(run.frames.size() == 8);
  for (const FrameDetections& fd : run.frames) {
    CHECK(fd.boxes.size() == 2);
    const std::vector<GroundTruthEntry>& truth = scene.gt.frames.at(fd.frame);
    for (const Box& b : fd.boxes) {
      const Box* want = best_truth(b, truth);
      REQUIRE(want != nullptr);
      CHECK(box_within(b, *want, 1));
    }
  }
  REQUIRE(run.counts.has_value());
  CHECK(run.counts->tp == 16);
  CHECK(run.counts->fp == 0);
  CHECK(run.counts->fn == 0);
  CHECK(run.scores->f1 == doctest::Approx(1.0));
}

TEST_CASE("run_detection ignores noise and leaves static actors out") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(12, true, true), 9);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "noisy"));
  PipelineConfig cfg;

  const DetectionRun run = run_detection(seq, cfg);
  REQUIRE(run.frames.size() == 8);
  // only the two walkers accumulate displacement; the parked actor and the
  // one-frame noise patches never form a qualifying lineage
  for (const FrameDetections& fd : run.frames) CHECK(fd.boxes.size() == 2);
  REQUIRE(run.counts.has_value());
  CHECK(run.counts->tp == 16);
  CHECK(run.counts->fp == 0);
  CHECK(run.counts->fn == 8);  // the parked actor is annotated every frame
  CHECK(run.scores->precision == doctest::Approx(1.0));
  CHECK(run.scores->recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("run_detection needs a full window of frames") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(3, false, false), 1);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "short"));
  PipelineConfig cfg;
  CHECK_THROWS_AS(run_detection(seq, cfg), std::invalid_argument);
}

TEST_CASE("run_tracking follows two movers with full success") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(24, false, false), 3);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "walk"));
  PipelineConfig cfg;

  const TrackingRun run = run_tracking(seq, cfg);
  CHECK(run.width == 128);
  CHECK(run.height == 112);
  // tracking starts after the k+1 frame warm-up and never loses the walkers
  REQUIRE(run.records.size() == 19 * 2);
  for (const TrackRecord& r : run.records) {
    CHECK(r.status == TrackStatus::Active);
    CHECK(r.frame >= 5);
  }
  REQUIRE(run.sr.has_value());
  CHECK(*run.sr == doctest::Approx(1.0));
  REQUIRE(run.curve.size() == 9);
  CHECK(run.curve.front().sr == doctest::Approx(1.0));
  for (size_t i = 1; i < run.curve.size(); ++i) {
    CHECK(run.curve[i].sr <= run.curve[i - 1].sr);
  }
}

TEST_CASE("run_tracking needs the warm-up plus one frame") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(5, false, false), 1);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "short"));
  PipelineConfig cfg;
  CHECK_THROWS_AS(run_tracking(seq, cfg), std::invalid_argument);
}

TEST_CASE("the candidate search optimization changes no output") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(24, false, false), 3);
  SequenceReader seq = load_sequence(write_scene(scene, tmp, "opt"));
  PipelineConfig tuned;
  tuned.optimize = true;
  PipelineConfig plain;
  plain.optimize = false;

  const TrackingRun a = run_tracking(seq, tuned);
  const TrackingRun b = run_tracking(seq, plain);
  CHECK(serialize(a.records) == serialize(b.records));
  CHECK(a.reports.size() == b.reports.size());
  // only the tuned run may ever look at fewer candidates
  for (const CandidateStats& s : a.candidate_stats) CHECK(s.pruned <= s.full);
  for (const CandidateStats& s : b.candidate_stats) CHECK(s.pruned == s.full);
}

TEST_CASE("cmd_track writes deterministic reports that re-read cleanly") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(24, false, false), 3);
  const std::filesystem::path manifest = write_scene(scene, tmp, "seq");

  PipelineConfig cfg;
  cfg.manifest = manifest;
  cfg.overlays = true;
  cfg.out_dir = tmp.str("run_a");
  REQUIRE(cmd_track(cfg) == 0);
  cfg.out_dir = tmp.str("run_b");
  REQUIRE(cmd_track(cfg) == 0);

  for (const char* name : {"tracks.txt", "occlusions.txt", "metrics.txt"}) {
    CAPTURE(name);
    const std::string a = testutil::read_file(tmp.str("run_a") + "/" + name);
    CHECK(a == testutil::read_file(tmp.str("run_b") + "/" + name));
    CHECK(a.rfind("# config ", 0) == 0);
  }
  for (int f = 0; f < 24; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "/overlays/%06d.ppm", f);
    const std::string a = testutil::read_file(tmp.str("run_a") + name);
    CHECK(a == testutil::read_file(tmp.str("run_b") + name));
    CHECK(a.rfind("P6\n", 0) == 0);
  }

  // the track report round trips through the ground-truth reader, so scoring
  // a run against its own output is exact
  const GroundTruth loaded =
      load_ground_truth(tmp.str("run_a") + "/tracks.txt");
  SequenceReader seq = load_sequence(manifest);
  PipelineConfig plain;
  const TrackingRun run = run_tracking(seq, plain);
  CHECK(success_rate(run.records, loaded, 0.99) == doctest::Approx(1.0));
  CHECK(loaded.frames.size() == 19);

  const std::string metrics = testutil::read_file(tmp.str("run_a") + "/metrics.txt");
  CHECK(metrics.find("\nsr seq 1\n") != std::string::npos);
}

TEST_CASE("cmd_detect echoes the configuration into its reports") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(12, false, false), 3);
  PipelineConfig cfg;
  cfg.manifest = write_scene(scene, tmp, "det");
  cfg.out_dir = tmp.str("out");
  REQUIRE(cmd_detect(cfg) == 0);

  const std::string det = testutil::read_file(tmp.str("out") + "/detections.txt");
  CHECK(det.rfind("# config sigma=1 ", 0) == 0);
  CHECK(det.find(" k=5 ") != std::string::npos);
  CHECK(det.find(" optimize=on ") != std::string::npos);
  CHECK(det.find("# manifest ") != std::string::npos);

  const std::string metrics = testutil::read_file(tmp.str("out") + "/metrics.txt");
  CHECK(metrics.find("f1 det 1\n") != std::string::npos);
  CHECK(metrics.find("tp det 16\n") != std::string::npos);
}

TEST_CASE("cmd_bench reports agreeing modes") {
  testutil::TempDir tmp;
  const SyntheticScene scene = synthesize_scene(mover_spec(16, false, false), 3);
  PipelineConfig cfg;
  cfg.manifest = write_scene(scene, tmp, "bench");
  cfg.out_dir = tmp.str("out");
  REQUIRE(cmd_bench(cfg) == 0);

  const std::string b = testutil::read_file(tmp.str("out") + "/bench.txt");
  CHECK(b.find("frames 16\n") != std::string::npos);
  CHECK(b.find("mode unoptimized mean_ms ") != std::string::npos);
  CHECK(b.find("mode optimized mean_ms ") != std::string::npos);
  CHECK(b.find("identical_tracks yes\n") != std::string::npos);

  SequenceReader seq = load_sequence(cfg.manifest);
  const BenchRun run = run_bench(seq, cfg);
  CHECK(run.frames == 16);
  CHECK(run.identical_tracks);
  CHECK(run.mean_pruned_candidates <= run.mean_full_candidates);
}

TEST_CASE("cmd_synth output feeds straight back into the reader") {
  testutil::TempDir tmp;
  const std::string spec_json = R"({
    "frames": 8, "width": 64, "height": 48, "background_depth": 6000,
    "actors": [
      {"shape": "rect", "x": 6, "y": 10, "w": 12, "h": 12, "depth": 1500, "vx": 2},
      {"shape": "disc", "x": 44.0, "y": 30.0, "radius": 5.5, "depth": 2500}
    ],
    "noise": {"hole_prob": 0.01}
  })";
  testutil::write_file(tmp.str("scene.json"), spec_json);

  REQUIRE(cmd_synth(tmp.str("scene.json"), 11, tmp.str("a")) == 0);
  REQUIRE(cmd_synth(tmp.str("scene.json"), 11, tmp.str("b")) == 0);

  const std::string manifest = testutil::read_file(tmp.str("a") + "/manifest.txt");
  CHECK(manifest.rfind("gt: gt.txt\n", 0) == 0);

  SequenceReader seq = load_sequence(tmp.str("a") + "/manifest.txt");
  REQUIRE(seq.size() == 8);
  REQUIRE(seq.ground_truth().has_value());
  CHECK(seq.ground_truth()->frames.at(0).size() == 2);
  const DepthMap f3 = seq.frame(3);
  CHECK(f3.width == 64);
  CHECK(f3.height == 48);
  CHECK(f3.frame_index == 3);

  // same spec and seed, byte-identical frames
  CHECK(testutil::read_file(tmp.str("a") + "/000003.pgm") ==
        testutil::read_file(tmp.str("b") + "/000003.pgm"));
  CHECK(testutil::read_file(tmp.str("a") + "/gt.txt") ==
        testutil::read_file(tmp.str("b") + "/gt.txt"));
}
