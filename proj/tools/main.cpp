#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "depthtrack/pipeline.hpp"

namespace {

void add_pipeline_options(CLI::App* cmd, depthtrack::PipelineConfig& cfg) {
  cmd->add_option("--sigma", cfg.sigma, "Smoothing kernel sigma, pixels");
  cmd->add_option("--border-points", cfg.border_points,
                  "Border pixels that make a region background");
  cmd->add_option("--k", cfg.k,
                  "Frames per detection window (also the refresh interval)");
  cmd->add_option("--delta", cfg.delta,
                  "Per-step displacement above which a region is moving");
  cmd->add_option("--roi-threshold", cfg.roi_threshold,
                  "Accumulated displacement above which a region is an ROI");
  cmd->add_option("--iota", cfg.iota, "Occlusion flag cutoff");
  cmd->add_option("--r-min", cfg.r_min, "Overlap ratio for a correct box");
  cmd->add_flag("--optimize,!--no-optimize", cfg.optimize,
                "Prune candidate regions by travel direction");
  cmd->add_option("--seed", cfg.seed, "Random seed (synthetic data only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-object detection and tracking in depth video"};
  app.require_subcommand(1);

  depthtrack::PipelineConfig cfg;
  std::string manifest, gt, out;
  bool overlays = false;

  CLI::App* detect =
      app.add_subcommand("detect", "Report moving regions per frame");
  detect->add_option("--manifest", manifest, "Sequence manifest")->required();
  detect->add_option("--gt", gt, "Ground truth boxes (overrides the manifest)");
  detect->add_option("--out", out, "Output directory")->required();
  detect->add_flag("--overlays", overlays, "Write per-frame overlay images");
  add_pipeline_options(detect, cfg);

  CLI::App* track =
      app.add_subcommand("track", "Track moving regions across the sequence");
  track->add_option("--manifest", manifest, "Sequence manifest")->required();
  track->add_option("--gt", gt, "Ground truth boxes (overrides the manifest)");
  track->add_option("--out", out, "Output directory")->required();
  track->add_flag("--overlays", overlays, "Write per-frame overlay images");
  add_pipeline_options(track, cfg);

  CLI::App* bench = app.add_subcommand(
      "bench", "Time the pipeline with and without candidate pruning");
  bench->add_option("--manifest", manifest, "Sequence manifest")->required();
  bench->add_option("--out", out, "Output directory")->required();
  add_pipeline_options(bench, cfg);

  std::string scene_spec, synth_out;
  uint64_t synth_seed = 0;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic depth sequence");
  synth->add_option("--spec", scene_spec, "Scene description (json)")
      ->required();
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  cfg.manifest = manifest;
  cfg.gt_path = gt;
  cfg.out_dir = out;
  cfg.overlays = overlays;

  try {
    if (detect->parsed()) return depthtrack::cmd_detect(cfg);
    if (track->parsed()) return depthtrack::cmd_track(cfg);
    if (bench->parsed()) return depthtrack::cmd_bench(cfg);
    if (synth->parsed()) {
      return depthtrack::cmd_synth(scene_spec, synth_seed, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
