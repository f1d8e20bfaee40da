#include <iostream>

#include "CLI11.hpp"
#include "sharp/commands.hpp"

namespace {

using namespace sharp;

void add_metric_flags(CLI::App* app, cmd::ScoreOptions& o) {
  app->add_option("--k", o.track1.k, "decay rate of exp(-k d)")->capture_default_str();
  app->add_option("--sharp-threshold", o.track1.sharp_threshold, "ground-truth sharpness threshold (radians)")
      ->capture_default_str();
  app->add_option("--budget", o.track1.budget, "edge sampling budget per edge set")->capture_default_str();
  app->add_option("--min-per-edge", o.track1.min_per_edge, "minimum samples per edge")->capture_default_str();
  app->add_flag("--pre-normalize", o.track1.pre_normalize, "scale both edge sets by the gt sample diagonal");
  app->add_flag("--average-all-types", o.seg.average_all_types, "average type IoU over the whole vocabulary");
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::detail::write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan-to-CAD evaluation toolkit"};
  app.set_version_flag("--version", std::string(cmd::kToolVersion));
  app.require_subcommand(1);

  cmd::ScoreOptions score;
  score.jobs = cmd::default_jobs();
  std::string report_path, pred_clouds, gt_clouds;
  auto* sc = app.add_subcommand("score", "score a prediction directory against ground truth");
  sc->add_option("--track", score.track, "track 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  sc->add_option("--pred", score.pred_dir, "prediction directory")->required();
  sc->add_option("--gt", score.gt_dir, "ground-truth directory")->required();
  sc->add_option("--report", report_path, "write the JSON report here (default: stdout)");
  sc->add_option("--pred-clouds", pred_clouds, "clouds of the predictions, for label transfer");
  sc->add_option("--gt-clouds", gt_clouds, "clouds of the ground truth, for label transfer");
  sc->add_flag("--lenient", score.lenient, "score failed samples as 0 instead of aborting");
  sc->add_option("--seed", score.seed, "random seed")->capture_default_str();
  sc->add_option("--jobs", score.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_metric_flags(sc, score);

  int v_track = 1;
  std::string v_pred, v_gt;
  auto* vc = app.add_subcommand("validate", "check a submission bundle");
  vc->add_option("--track", v_track, "track 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  vc->add_option("--pred", v_pred, "prediction directory")->required();
  vc->add_option("--gt", v_gt, "ground-truth directory")->required();

  cmd::FitEdgesOptions fit;
  fit.jobs = cmd::default_jobs();
  std::string sharp_dir;
  double bandwidth_fraction = fit.fit.bandwidth_fraction;
  auto* fc = app.add_subcommand("fit-edges", "fit parametric edges to point clouds");
  fc->add_option("--clouds", fit.cloud_dir, "directory of .xyz/.txt/.bin clouds")->required();
  fc->add_option("--out", fit.out_dir, "output directory for edge files")->required();
  fc->add_option("--sharp-labels", sharp_dir, "directory of <stem>.sharp per-point 0/1 files");
  fc->add_option("--neighborhood", fit.fit.neighborhood, "k of the covariance neighbourhood")->capture_default_str();
  fc->add_option("--variation-threshold", fit.fit.variation_threshold, "surface-variation threshold")
      ->capture_default_str();
  fc->add_option("--bandwidth", bandwidth_fraction, "mean-shift bandwidth as a fraction of the bbox diagonal")
      ->capture_default_str();
  fc->add_option("--max-points", fit.fit.max_points, "downsample larger clouds (0 disables)")->capture_default_str();
  fc->add_option("--seed", fit.fit.seed, "downsampling seed")->capture_default_str();
  fc->add_option("--jobs", fit.jobs, "worker threads")->check(CLI::PositiveNumber);

  int s_track = 1;
  std::string s_dir;
  std::size_t s_bins = 12;
  auto* stc = app.add_subcommand("stats", "dataset statistics of an annotation directory");
  stc->add_option("--track", s_track, "track 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  stc->add_option("--dir", s_dir, "annotation directory")->required();
  stc->add_option("--bins", s_bins, "sharpness histogram bins")->capture_default_str()->check(CLI::PositiveNumber);

  int c_track = 2;
  std::string c_dir;
  auto* cc = app.add_subcommand("consistency", "membership/type consistency of label files");
  cc->add_option("--track", c_track, "track 2 or 3")->required()->check(CLI::Range(2, 3));
  cc->add_option("--dir", c_dir, "label directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc->parsed()) {
      if (!pred_clouds.empty()) score.pred_clouds = pred_clouds;
      if (!gt_clouds.empty()) score.gt_clouds = gt_clouds;
      const auto report = cmd::run_score(score);
      if (!report.samples.empty()) write_output(cmd::report_to_json(report), report_path);
      std::cerr << cmd::report_to_text(report);
      return report.exit_code();
    }
    if (vc->parsed()) {
      const auto report = io::validate_submission(v_pred, v_gt, v_track);
      std::cout << cmd::validation_to_text(report);
      return report.all_pass() ? 0 : 1;
    }
    if (fc->parsed()) {
      if (!sharp_dir.empty()) fit.sharp_dir = sharp_dir;
      fit.fit.bandwidth_fraction = bandwidth_fraction;
      const auto result = cmd::run_fit_edges(fit);
      for (const auto& f : result.files) {
        if (f.ok)
          std::cout << f.stem << "  " << f.n_edges << " edges\n";
        else
          std::cout << f.stem << "  FAILED  " << f.message << "\n";
      }
      return result.exit_code();
    }
    if (stc->parsed()) {
      std::cout << cmd::stats_to_text(cmd::run_stats(s_dir, s_track, s_bins));
      return 0;
    }
    if (cc->parsed()) {
      std::cout << cmd::consistency_to_text(cmd::run_consistency(c_dir, c_track));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
