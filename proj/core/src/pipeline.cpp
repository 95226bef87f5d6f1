#include "depthtrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "io_util.hpp"

namespace depthtrack {

void PipelineConfig::validate() const {
  if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
  if (border_points < 1) {
    throw std::invalid_argument("border-points must be at least 1");
  }
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (delta < 0) throw std::invalid_argument("delta must be non-negative");
  if (roi_threshold < 0) {
    throw std::invalid_argument("roi-threshold must be non-negative");
  }
  if (!(iota > 0)) throw std::invalid_argument("iota must be positive");
  if (!(r_min > 0) || r_min > 1.0) {
    throw std::invalid_argument("r-min must be in (0, 1]");
  }
}

TrackerParams PipelineConfig::tracker_params() const {
  TrackerParams p;
  p.k = k;
  p.delta = delta;
  p.roi_threshold = roi_threshold;
  p.iota = iota;
  p.optimize = optimize;
  return p;
}

std::string PipelineConfig::echo() const {
  std::ostringstream ss;
  ss << "sigma=" << sigma << " border_points=" << border_points << " k=" << k
     << " delta=" << delta << " roi_threshold=" << roi_threshold
     << " iota=" << iota << " r_min=" << r_min
     << " optimize=" << (optimize ? "on" : "off") << " seed=" << seed;
  return ss.str();
}

RegionSet process_frame(const DepthMap& frame, const PipelineConfig& cfg) {
  const DepthMap smoothed = gaussian_smooth(frame, cfg.sigma);
  const RegionLabelMap basins = watershed_segment(smoothed);
  return suppress_noise(merge_enclosed(
      categorize_regions(basins, cfg.border_points)));
}

namespace {

std::optional<GroundTruth> resolve_gt(const SequenceReader& seq,
                                      const PipelineConfig& cfg) {
  if (!cfg.gt_path.empty()) return load_ground_truth(cfg.gt_path);
  return seq.ground_truth();
}

std::vector<OverlayShape> track_shapes(const std::vector<RoiTrack>& tracks) {
  std::vector<OverlayShape> shapes;
  for (const RoiTrack& t : tracks) {
    if (t.status == TrackStatus::Lost) continue;
    shapes.push_back({t.id, t.box, t.mask});
  }
  return shapes;
}

std::string report_header(const PipelineConfig& cfg) {
  std::string h = "# config " + cfg.echo() + "\n";
  if (!cfg.manifest.empty()) {
    h += "# manifest " + cfg.manifest.string() + "\n";
  }
  if (!cfg.gt_path.empty()) {
    h += "# gt " + cfg.gt_path.string() + "\n";
  }
  return h;
}

std::string sequence_name(const PipelineConfig& cfg) {
  if (cfg.manifest.empty()) return "sequence";
  std::string stem = cfg.manifest.stem().string();
  // the manifest file itself is usually named manifest.txt; the directory
  // carries the sequence identity then
  if (stem == "manifest" && cfg.manifest.has_parent_path()) {
    std::string dir = cfg.manifest.parent_path().filename().string();
    if (!dir.empty()) return dir;
  }
  return stem.empty() ? "sequence" : stem;
}

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

DetectionRun run_detection(SequenceReader& seq, const PipelineConfig& cfg,
                           const OverlaySink* sink) {
  cfg.validate();
  if (seq.size() < static_cast<size_t>(cfg.k)) {
    throw std::invalid_argument("sequence shorter than the detection window");
  }
  const std::optional<GroundTruth> gt = resolve_gt(seq, cfg);

  DetectionRun run;
  DetectionCounts counts;
  std::vector<RegionSet> window;
  std::vector<RegionMapping> mappings;
  for (size_t i = 0; i < seq.size(); ++i) {
    const DepthMap raw = seq.frame(i);
    RegionSet rs = process_frame(raw, cfg);
    if (!window.empty()) {
      mappings.push_back(map_regions(window.back(), rs, cfg.delta));
    }
    window.push_back(std::move(rs));
    if (window.size() > static_cast<size_t>(cfg.k)) {
      window.erase(window.begin());
      mappings.erase(mappings.begin());
    }
    if (window.size() < static_cast<size_t>(cfg.k)) {
      if (sink) (*sink)(raw, {});
      continue;
    }

    const std::vector<RoiCandidate> cands =
        detect_rois(window, mappings, cfg.roi_threshold);
    const int last_step = static_cast<int>(window.size()) - 1;
    FrameDetections fd;
    fd.frame = static_cast<int>(i);
    for (const RoiCandidate& c : cands) {
      if (!c.is_roi || c.last_step() != last_step) continue;
      fd.boxes.push_back(window.back().find(c.last_region())->bbox);
    }
    if (gt) {
      std::vector<Box> truth;
      if (const auto* entries = gt->at_frame(fd.frame)) {
        for (const GroundTruthEntry& e : *entries) truth.push_back(e.box);
      }
      counts += match_detections(fd.boxes, truth, cfg.r_min);
    }
    if (sink) {
      std::vector<OverlayShape> shapes;
      for (size_t b = 0; b < fd.boxes.size(); ++b) {
        shapes.push_back({static_cast<int>(b), fd.boxes[b], {}});
      }
      (*sink)(raw, shapes);
    }
    run.frames.push_back(std::move(fd));
  }
  if (gt) {
    run.counts = counts;
    run.scores = f1_score(counts);
  }
  return run;
}

TrackingRun run_tracking(SequenceReader& seq, const PipelineConfig& cfg,
                         const OverlaySink* sink) {
  cfg.validate();
  if (seq.size() < static_cast<size_t>(cfg.k) + 1) {
    throw std::invalid_argument(
        "sequence shorter than the tracker warm-up (k+1 frames)");
  }
  const std::optional<GroundTruth> gt = resolve_gt(seq, cfg);

  TrackingRun run;
  std::vector<RegionSet> warmup;
  std::vector<DepthMap> warmup_raw;
  for (size_t i = 0; i <= static_cast<size_t>(cfg.k); ++i) {
    DepthMap raw = seq.frame(i);
    warmup.push_back(process_frame(raw, cfg));
    if (sink) warmup_raw.push_back(std::move(raw));
  }
  run.width = warmup.front().width;
  run.height = warmup.front().height;

  Tracker tracker(warmup, cfg.tracker_params());
  if (sink) {
    for (size_t i = 0; i < static_cast<size_t>(cfg.k); ++i) {
      (*sink)(warmup_raw[i], {});  // nothing is tracked during warm-up
    }
    (*sink)(warmup_raw.back(), track_shapes(tracker.tracks()));
  }
  for (size_t i = static_cast<size_t>(cfg.k) + 1; i < seq.size(); ++i) {
    const DepthMap raw = seq.frame(i);
    tracker.step(process_frame(raw, cfg));
    if (sink) (*sink)(raw, track_shapes(tracker.tracks()));
  }

  run.records = tracker.records();
  run.reports = tracker.occlusion_reports();
  run.candidate_stats = tracker.candidate_stats();
  if (gt && !gt->empty()) {
    run.sr = success_rate(run.records, *gt, cfg.r_min);
    run.curve = sr_curve(run.records, *gt,
                         {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  }
  return run;
}

BenchRun run_bench(SequenceReader& seq, const PipelineConfig& cfg) {
  cfg.validate();
  if (seq.size() < static_cast<size_t>(cfg.k) + 1) {
    throw std::invalid_argument(
        "sequence shorter than the tracker warm-up (k+1 frames)");
  }
  // keep file reads out of the timed section
  std::vector<DepthMap> frames;
  frames.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) frames.push_back(seq.frame(i));

  struct ModeResult {
    double ms_per_frame = 0;
    std::vector<TrackRecord> records;
    std::vector<CandidateStats> stats;
  };
  auto run_mode = [&](bool optimize) {
    PipelineConfig mode_cfg = cfg;
    mode_cfg.optimize = optimize;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RegionSet> warmup;
    for (size_t i = 0; i <= static_cast<size_t>(cfg.k); ++i) {
      warmup.push_back(process_frame(frames[i], mode_cfg));
    }
    Tracker tracker(warmup, mode_cfg.tracker_params());
    for (size_t i = static_cast<size_t>(cfg.k) + 1; i < frames.size(); ++i) {
      tracker.step(process_frame(frames[i], mode_cfg));
    }
    const auto t1 = std::chrono::steady_clock::now();
    ModeResult r;
    r.ms_per_frame = std::chrono::duration<double, std::milli>(t1 - t0).count() /
                     static_cast<double>(frames.size());
    r.records = tracker.records();
    r.stats = tracker.candidate_stats();
    return r;
  };

  const ModeResult plain = run_mode(false);
  const ModeResult tuned = run_mode(true);

  BenchRun out;
  out.frames = frames.size();
  out.unoptimized_ms = plain.ms_per_frame;
  out.optimized_ms = tuned.ms_per_frame;

  long long full_sum = 0;
  long long pruned_sum = 0;
  for (const CandidateStats& s : tuned.stats) {
    if (s.pruned > s.full) {
      throw std::logic_error("pruned candidate set exceeds the full set");
    }
    full_sum += static_cast<long long>(s.full);
    pruned_sum += static_cast<long long>(s.pruned);
  }
  if (!tuned.stats.empty()) {
    out.mean_full_candidates =
        static_cast<double>(full_sum) / static_cast<double>(tuned.stats.size());
    out.mean_pruned_candidates = static_cast<double>(pruned_sum) /
                                 static_cast<double>(tuned.stats.size());
  }
  out.identical_tracks = plain.records.size() == tuned.records.size();
  if (out.identical_tracks) {
    for (size_t i = 0; i < plain.records.size(); ++i) {
      if (format_track_record(plain.records[i]) !=
          format_track_record(tuned.records[i])) {
        out.identical_tracks = false;
        break;
      }
    }
  }
  return out;
}

std::string format_track_record(const TrackRecord& r) {
  std::string s = std::to_string(r.frame) + " " + std::to_string(r.track_id);
  if (r.status == TrackStatus::Occluded) {
    s += " occluded:" + std::to_string(r.occluder);
  } else {
    s += " active";
  }
  s += " " + std::to_string(r.box.x) + " " + std::to_string(r.box.y) + " " +
       std::to_string(r.box.w) + " " + std::to_string(r.box.h);
  return s;
}

namespace {

std::filesystem::path overlay_dir(const PipelineConfig& cfg) {
  return cfg.out_dir / "overlays";
}

OverlaySink make_overlay_sink(const PipelineConfig& cfg) {
  const std::filesystem::path dir = overlay_dir(cfg);
  std::filesystem::create_directories(dir);
  return [dir](const DepthMap& frame, const std::vector<OverlayShape>& shapes) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", frame.frame_index);
    write_overlay(frame, shapes, dir / name);
  };
}

}  // namespace

int cmd_detect(const PipelineConfig& cfg) {
  cfg.validate();
  SequenceReader seq = load_sequence(cfg.manifest);
  std::filesystem::create_directories(cfg.out_dir);
  OverlaySink sink;
  if (cfg.overlays) sink = make_overlay_sink(cfg);
  const DetectionRun run =
      run_detection(seq, cfg, cfg.overlays ? &sink : nullptr);

  std::string det = report_header(cfg);
  for (const FrameDetections& fd : run.frames) {
    for (size_t b = 0; b < fd.boxes.size(); ++b) {
      const Box& box = fd.boxes[b];
      det += std::to_string(fd.frame) + " " + std::to_string(b) + " " +
             std::to_string(box.x) + " " + std::to_string(box.y) + " " +
             std::to_string(box.w) + " " + std::to_string(box.h) + "\n";
    }
  }
  write_text_atomic(cfg.out_dir / "detections.txt", det);

  if (run.counts) {
    const std::string name = sequence_name(cfg);
    std::string m = report_header(cfg);
    m += "tp " + name + " " + std::to_string(run.counts->tp) + "\n";
    m += "fp " + name + " " + std::to_string(run.counts->fp) + "\n";
    m += "fn " + name + " " + std::to_string(run.counts->fn) + "\n";
    m += "precision " + name + " " + fmt_double(run.scores->precision) + "\n";
    m += "recall " + name + " " + fmt_double(run.scores->recall) + "\n";
    m += "f1 " + name + " " + fmt_double(run.scores->f1) + "\n";
    write_text_atomic(cfg.out_dir / "metrics.txt", m);
  }
  return 0;
}

int cmd_track(const PipelineConfig& cfg) {
  cfg.validate();
  SequenceReader seq = load_sequence(cfg.manifest);
  std::filesystem::create_directories(cfg.out_dir);
  OverlaySink sink;
  if (cfg.overlays) sink = make_overlay_sink(cfg);
  const TrackingRun run =
      run_tracking(seq, cfg, cfg.overlays ? &sink : nullptr);

  std::string tracks = report_header(cfg);
  for (const TrackRecord& r : run.records) {
    tracks += format_track_record(r) + "\n";
  }
  write_text_atomic(cfg.out_dir / "tracks.txt", tracks);

  std::string occ = report_header(cfg);
  occ += "# frame occludee occluder gap area_delta od\n";
  for (const OcclusionReport& r : run.reports) {
    if (!r.flagged) continue;
    occ += std::to_string(r.frame) + " " + std::to_string(r.occludee) + " " +
           std::to_string(r.occluder) + " " + fmt_double(r.gap) + " " +
           std::to_string(r.area_delta) + " " + fmt_double(r.od) + "\n";
  }
  write_text_atomic(cfg.out_dir / "occlusions.txt", occ);

  if (run.sr) {
    const std::string name = sequence_name(cfg);
    std::string m = report_header(cfg);
    m += "sr " + name + " " + fmt_double(*run.sr) + "\n";
    for (const SrPoint& p : run.curve) {
      m += "sr@" + fmt_double(p.threshold) + " " + name + " " +
           fmt_double(p.sr) + "\n";
    }
    write_text_atomic(cfg.out_dir / "metrics.txt", m);
  }
  return 0;
}

int cmd_bench(const PipelineConfig& cfg) {
  cfg.validate();
  SequenceReader seq = load_sequence(cfg.manifest);
  std::filesystem::create_directories(cfg.out_dir);
  const BenchRun run = run_bench(seq, cfg);

  std::string b = report_header(cfg);
  b += "frames " + std::to_string(run.frames) + "\n";
  b += "mode unoptimized mean_ms " + fmt_double(run.unoptimized_ms) + "\n";
  b += "mode optimized mean_ms " + fmt_double(run.optimized_ms) + "\n";
  if (run.optimized_ms > 0) {
    b += "speedup " + fmt_double(run.unoptimized_ms / run.optimized_ms) + "\n";
  }
  b += "mean_full_candidates " + fmt_double(run.mean_full_candidates) + "\n";
  b += "mean_pruned_candidates " + fmt_double(run.mean_pruned_candidates) +
       "\n";
  b += std::string("identical_tracks ") +
       (run.identical_tracks ? "yes" : "no") + "\n";
  write_text_atomic(cfg.out_dir / "bench.txt", b);
  return 0;
}

int cmd_synth(const std::filesystem::path& spec_path, uint64_t seed,
              const std::filesystem::path& out_dir) {
  const SceneSpec spec = load_scene_spec(spec_path);
  const SyntheticScene scene = synthesize_scene(spec, seed);
  std::filesystem::create_directories(out_dir);

  std::string manifest = "gt: gt.txt\n";
  for (size_t t = 0; t < scene.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.pgm", t);
    save_depth_frame(scene.frames[t], out_dir / name);
    manifest += name;
    manifest += "\n";
  }
  save_ground_truth(scene.gt, out_dir / "gt.txt");
  write_text_atomic(out_dir / "manifest.txt", manifest);
  return 0;
}

}  // namespace depthtrack
