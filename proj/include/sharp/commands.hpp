#pragma once

// Batch front-end operations behind the sharp_eval subcommands. Each returns
// a result struct; rendering to JSON or text is separate so the command
// logic stays testable without a process boundary.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sharp/baseline_fit.hpp"
#include "sharp/io_formats.hpp"
#include "sharp/metrics_segmentation.hpp"
#include "sharp/metrics_track1.hpp"

namespace sharp::cmd {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "sharp_eval";
inline constexpr const char* kToolVersion = "1.0.0";

/// Runs task(i) for i in [0, n) on `jobs` threads. Results must be written by
/// index; completion order never matters.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// score

struct ScoreOptions {
  int track = 1;
  fs::path pred_dir;
  fs::path gt_dir;
  /// Optional clouds paired with the label files; when both are given, a
  /// prediction on a different point set is carried onto the gt points by
  /// nearest-neighbour label transfer.
  std::optional<fs::path> pred_clouds;
  std::optional<fs::path> gt_clouds;
  Track1Config track1;
  SegOptions seg;
  bool lenient = false;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct SampleScore {
  std::string stem;
  io::Reason reason = io::Reason::ok;
  std::string message;
  /// Named sub-scores in report order, final last.
  std::vector<std::pair<std::string, double>> scores;
  double final = 0.0;
  /// Distinct membership ids on each side (tracks 2 and 3). Predicted faces
  /// beyond the gt count only dilute overlaps; this makes them visible.
  std::optional<std::pair<std::size_t, std::size_t>> groups;  // (predicted, gt)
};

struct ScoreReport {
  ScoreOptions options;
  std::vector<SampleScore> samples;  // sorted by stem
  io::ValidationReport validation;
  bool completed = false;  // false when validation failed without --lenient
  double aggregate = 0.0;

  int exit_code() const { return completed ? 0 : 1; }
};

inline std::vector<std::string> subscore_names(int track) {
  switch (track) {
    case 1: return {"edge_recovery", "length", "sharpness", "final"};
    case 2: return {"membership", "type", "final"};
    default: return {"step", "type", "final"};
  }
}

namespace detail {

inline std::optional<fs::path> find_cloud(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".bin", ".xyz", ".txt"}) {
    const fs::path p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

inline SampleScore score_one(const ScoreOptions& opt, const std::string& stem) {
  SampleScore s;
  s.stem = stem;
  const std::string ext = io::annotation_extension(opt.track);
  const fs::path pred_file = opt.pred_dir / (stem + ext);
  const fs::path gt_file = opt.gt_dir / (stem + ext);
  const auto names = subscore_names(opt.track);
  try {
    std::vector<double> values;
    if (opt.track == 1) {
      const auto gt = io::load_edges(gt_file, io::EdgeRole::ground_truth);
      const auto pred = io::load_edges(pred_file, io::EdgeRole::prediction);
      const auto r = score_track1(pred, gt, opt.track1);
      values = {r.edge_recovery, r.length, r.sharpness, r.final};
    } else {
      const auto gt = io::load_labels(gt_file, opt.track);
      auto pred = io::load_labels(pred_file, opt.track);
      if (pred.size() != gt.size()) {
        const auto pc = opt.pred_clouds ? find_cloud(*opt.pred_clouds, stem) : std::nullopt;
        const auto gc = opt.gt_clouds ? find_cloud(*opt.gt_clouds, stem) : std::nullopt;
        if (!pc || !gc) {
          s.reason = io::Reason::count_mismatch;
          s.message = "prediction has " + std::to_string(pred.size()) + " points, ground truth " + std::to_string(gt.size());
        } else {
          const auto pred_cloud = io::load_point_cloud(*pc);
          const auto gt_cloud = io::load_point_cloud(*gc);
          if (gt_cloud.size() != gt.size()) throw ValidationError("ground-truth cloud and labels differ in size");
          pred = transfer_labels_nn(pred_cloud, pred, gt_cloud);
        }
      }
      if (s.reason == io::Reason::ok) {
        const auto r = opt.track == 2 ? score_track2(pred, gt, opt.seg) : score_track3(pred, gt, opt.seg);
        values = {r.membership_score, r.type_score, r.final};
        const auto ov = membership_overlap(pred, gt);
        s.groups = {ov.n_pred, ov.n_gt};
      }
    }
    if (s.reason == io::Reason::ok) {
      for (std::size_t i = 0; i < names.size(); ++i) s.scores.emplace_back(names[i], values[i]);
      s.final = values.back();
      return s;
    }
  } catch (const ParseError& e) {
    s.reason = io::Reason::parse_error;
    s.message = e.what();
  } catch (const Error& e) {
    s.reason = io::Reason::validation_error;
    s.message = e.what();
  }
  for (const auto& n : names) s.scores.emplace_back(n, 0.0);
  s.final = 0.0;
  return s;
}

}  // namespace detail

/// Scores every ground-truth sample. Without `lenient`, any validation
/// failure stops before scoring; with it, failed samples score 0.
inline ScoreReport run_score(const ScoreOptions& opt) {
  if (opt.track < 1 || opt.track > 3) throw DomainError("track must be 1, 2 or 3");
  opt.track1.validate();
  ScoreReport report;
  report.options = opt;
  report.validation = io::validate_submission(opt.pred_dir, opt.gt_dir, opt.track);

  // Count mismatches are recoverable when clouds allow label transfer.
  const bool can_transfer = opt.pred_clouds && opt.gt_clouds;
  const bool blocking = std::any_of(report.validation.samples.begin(), report.validation.samples.end(), [&](const auto& c) {
    return !c.pass() && !(can_transfer && c.reason == io::Reason::count_mismatch);
  });
  if (blocking && !opt.lenient) return report;

  std::vector<std::string> stems;
  for (const auto& c : report.validation.samples)
    if (c.reason != io::Reason::unmatched_prediction) stems.push_back(c.stem);
  report.samples.resize(stems.size());
  parallel_for(stems.size(), opt.jobs, [&](std::size_t i) {
    const auto& check = *std::find_if(report.validation.samples.begin(), report.validation.samples.end(),
                                      [&](const auto& c) { return c.stem == stems[i]; });
    if (check.reason == io::Reason::missing_sample) {
      SampleScore s;
      s.stem = stems[i];
      s.reason = check.reason;
      s.message = check.message;
      for (const auto& n : subscore_names(opt.track)) s.scores.emplace_back(n, 0.0);
      report.samples[i] = std::move(s);
    } else {
      report.samples[i] = detail::score_one(opt, stems[i]);
    }
  });

  double sum = 0.0;
  for (const auto& s : report.samples) sum += s.final;
  report.aggregate = report.samples.empty() ? 0.0 : sum / static_cast<double>(report.samples.size());
  const bool all_ok = std::all_of(report.samples.begin(), report.samples.end(),
                                  [](const SampleScore& s) { return s.reason == io::Reason::ok; });
  report.completed = all_ok || opt.lenient;
  return report;
}

inline ordered_json config_json(const ScoreOptions& o) {
  ordered_json c;
  c["track"] = o.track;
  c["k"] = o.track1.k;
  c["sharp_threshold"] = o.track1.sharp_threshold;
  c["budget"] = o.track1.budget;
  c["min_per_edge"] = o.track1.min_per_edge;
  c["spline_samples"] = o.track1.spline_samples;
  c["pre_normalize"] = o.track1.pre_normalize;
  c["average_all_types"] = o.seg.average_all_types;
  c["lenient"] = o.lenient;
  c["seed"] = o.seed;
  return c;
}

/// Machine-readable report. Contains no timestamps or paths, so identical
/// inputs give byte-identical output.
inline std::string report_to_json(const ScoreReport& r) {
  ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["config"] = config_json(r.options);
  ordered_json samples = ordered_json::array();
  for (const auto& s : r.samples) {
    ordered_json rec;
    rec["stem"] = s.stem;
    rec["status"] = io::reason_code(s.reason);
    if (!s.message.empty()) rec["message"] = s.message;
    ordered_json scores;
    for (const auto& [name, v] : s.scores) scores[name] = v;
    rec["scores"] = std::move(scores);
    if (s.groups) {
      rec["predicted_groups"] = s.groups->first;
      rec["gt_groups"] = s.groups->second;
    }
    samples.push_back(std::move(rec));
  }
  doc["samples"] = std::move(samples);
  ordered_json agg;
  agg["n_samples"] = r.samples.size();
  agg["n_failed"] = std::count_if(r.samples.begin(), r.samples.end(), [](const SampleScore& s) { return s.reason != io::Reason::ok; });
  agg["mean_final"] = r.aggregate;
  doc["aggregate"] = std::move(agg);
  ordered_json unmatched = ordered_json::array();
  for (const auto& c : r.validation.samples)
    if (c.reason == io::Reason::unmatched_prediction) unmatched.push_back(c.stem);
  doc["unmatched_predictions"] = std::move(unmatched);
  return doc.dump(2) + "\n";
}

inline std::string format_fixed(double v, int digits) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

inline std::string validation_to_text(const io::ValidationReport& v) {
  std::string out;
  for (const auto& c : v.samples) {
    out += c.stem + "  " + io::reason_code(c.reason);
    if (!c.message.empty()) out += "  " + c.message;
    out += '\n';
  }
  out += std::to_string(v.samples.size() - v.failures()) + "/" + std::to_string(v.samples.size()) + " samples pass\n";
  return out;
}

inline std::string report_to_text(const ScoreReport& r) {
  if (!r.completed && r.samples.empty()) return validation_to_text(r.validation) + "scoring skipped: fix the submission or pass --lenient\n";
  std::string out = "track " + std::to_string(r.options.track) + "\n";
  for (const auto& s : r.samples) {
    out += s.stem;
    for (const auto& [name, v] : s.scores) out += "  " + name + "=" + format_fixed(v, 4);
    if (s.reason != io::Reason::ok) out += std::string("  [") + io::reason_code(s.reason) + "]";
    out += '\n';
  }
  out += "aggregate " + format_fixed(r.aggregate, 4) + " over " + std::to_string(r.samples.size()) + " samples\n";
  return out;
}

// ---------------------------------------------------------------------------
// fit-edges

struct FitEdgesOptions {
  fs::path cloud_dir;
  fs::path out_dir;
  /// Optional `<stem>.sharp` files: one 0/1 per line, aligned with the cloud.
  std::optional<fs::path> sharp_dir;
  fit::FitConfig fit;
  unsigned jobs = 1;
};

struct FitOutcome {
  std::string stem;
  bool ok = false;
  std::string message;
  std::size_t n_edges = 0;
};

struct FitEdgesResult {
  std::vector<FitOutcome> files;  // sorted by stem
  int exit_code() const {
    return std::all_of(files.begin(), files.end(), [](const FitOutcome& f) { return f.ok; }) ? 0 : 1;
  }
};

inline std::vector<bool> load_sharp_flags(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<bool> flags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::detail::trim(line);
    if (t.empty()) continue;
    if (t != "0" && t != "1") throw ParseError("line " + std::to_string(line_no) + ": expected 0 or 1", line_no);
    flags.push_back(t == "1");
  }
  return flags;
}

inline FitEdgesResult run_fit_edges(const FitEdgesOptions& opt) {
  if (!fs::is_directory(opt.cloud_dir)) throw Error("not a readable directory: " + opt.cloud_dir.string());
  fs::create_directories(opt.out_dir);
  std::vector<fs::path> clouds;
  for (const auto& e : fs::directory_iterator(opt.cloud_dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".xyz" || ext == ".txt" || ext == ".bin")) clouds.push_back(e.path());
  }
  std::sort(clouds.begin(), clouds.end());

  FitEdgesResult result;
  result.files.resize(clouds.size());
  parallel_for(clouds.size(), opt.jobs, [&](std::size_t i) {
    FitOutcome& out = result.files[i];
    out.stem = clouds[i].stem().string();
    try {
      const auto cloud = io::load_point_cloud(clouds[i]);
      std::optional<std::vector<bool>> sharp;
      if (opt.sharp_dir && fs::is_regular_file(*opt.sharp_dir / (out.stem + ".sharp")))
        sharp = load_sharp_flags(*opt.sharp_dir / (out.stem + ".sharp"));
      const auto fitted = fit::fit_segments(cloud, sharp, opt.fit);
      io::save_edges(opt.out_dir / (out.stem + ".json"), fitted.edges, io::EdgeRole::prediction);
      out.ok = true;
      out.n_edges = fitted.edges.size();
    } catch (const std::exception& e) {
      out.message = e.what();
    }
  });
  return result;
}

// ---------------------------------------------------------------------------
// stats

/// Linear-interpolation quantile of sorted data, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<std::size_t> counts;

  /// Equal-width bins; the last bin is closed on the right.
  Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins, 0) {
    if (bins == 0 || !(hi > lo)) throw DomainError("histogram needs bins > 0 and hi > lo");
  }
  void add(double v) {
    if (v < lo || v > hi) throw DomainError("value outside histogram range");
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(counts.size()));
    ++counts[std::min(b, counts.size() - 1)];
  }
};

struct StatsResult {
  int track = 1;
  std::size_t n_models = 0;
  // Track 1
  std::optional<Histogram> sharpness;
  std::map<std::string, std::size_t> edge_type_counts;
  // Tracks 2 and 3: groups (faces or steps) per model, and groups per type.
  std::map<std::size_t, std::size_t> groups_per_model;
  std::map<std::string, std::size_t> group_type_counts;
  std::vector<double> group_counts;
};

inline StatsResult run_stats(const fs::path& dir, int track, std::size_t bins = 12) {
  if (track < 1 || track > 3) throw DomainError("track must be 1, 2 or 3");
  const auto stems = io::annotation_stems(dir, track);
  if (stems.empty()) throw Error("no annotation files in " + dir.string());
  StatsResult r;
  r.track = track;
  r.n_models = stems.size();
  const std::string ext = io::annotation_extension(track);
  if (track == 1) {
    r.sharpness.emplace(0.0, kTwoPi, bins);
    for (const char* k : {"line", "circle", "spline"}) r.edge_type_counts[k] = 0;
    for (const auto& stem : stems) {
      for (const auto& e : io::load_edges(dir / (stem + ext), io::EdgeRole::ground_truth)) {
        r.sharpness->add(*e.sharpness_angle);
        ++r.edge_type_counts[to_string(e.kind())];
      }
    }
    return r;
  }
  const auto& vocab = vocabulary_for_track(track);
  for (const auto& v : vocab) r.group_type_counts[v] = 0;
  for (const auto& stem : stems) {
    const auto t = io::load_labels(dir / (stem + ext), track);
    std::vector<std::pair<std::int64_t, int>> pairs;
    for (std::size_t i = 0; i < t.size(); ++i) pairs.emplace_back(t.membership[i], t.type_id[i]);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const auto& [m, type] : pairs) ++r.group_type_counts[vocab[static_cast<std::size_t>(type)]];
    std::vector<std::int64_t> ids(t.membership);
    std::sort(ids.begin(), ids.end());
    const auto groups = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    ++r.groups_per_model[groups];
    r.group_counts.push_back(static_cast<double>(groups));
  }
  return r;
}

inline std::string stats_to_text(const StatsResult& r) {
  std::ostringstream out;
  out << "models " << r.n_models << "\n";
  if (r.track == 1) {
    out << "sharpness histogram (radians)\n";
    const auto& h = *r.sharpness;
    const double w = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      out << "  [" << format_fixed(h.lo + w * static_cast<double>(b), 3) << ", "
          << format_fixed(h.lo + w * static_cast<double>(b + 1), 3) << (b + 1 == h.counts.size() ? "]" : ")") << "  "
          << h.counts[b] << "\n";
    out << "edges per type\n";
    for (const auto& [k, n] : r.edge_type_counts) out << "  " << k << "  " << n << "\n";
    return out.str();
  }
  const char* group = r.track == 2 ? "faces" : "steps";
  out << group << " per model\n";
  for (const auto& [k, n] : r.groups_per_model) out << "  " << k << "  " << n << "\n";
  out << group << " quantiles  min " << format_fixed(quantile(r.group_counts, 0.0), 2) << "  q25 "
      << format_fixed(quantile(r.group_counts, 0.25), 2) << "  median " << format_fixed(quantile(r.group_counts, 0.5), 2)
      << "  q75 " << format_fixed(quantile(r.group_counts, 0.75), 2) << "  max "
      << format_fixed(quantile(r.group_counts, 1.0), 2) << "\n";
  out << (r.track == 2 ? "faces per face type\n" : "steps per operation type\n");
  for (const auto& [k, n] : r.group_type_counts) out << "  " << k << "  " << n << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// consistency

struct ConsistencyResult {
  std::vector<std::pair<std::string, double>> samples;  // sorted by stem
  double mean = 0.0;
};

inline ConsistencyResult run_consistency(const fs::path& dir, int track) {
  if (track != 2 && track != 3) throw DomainError("consistency applies to tracks 2 and 3");
  const auto stems = io::annotation_stems(dir, track);
  if (stems.empty()) throw Error("no label files in " + dir.string());
  const auto grouping = grouping_for_track(track);
  ConsistencyResult r;
  double sum = 0.0;
  for (const auto& stem : stems) {
    const double c = consistency(io::load_labels(dir / (stem + ".csv"), track), grouping);
    r.samples.emplace_back(stem, c);
    sum += c;
  }
  r.mean = sum / static_cast<double>(stems.size());
  return r;
}

inline std::string consistency_to_text(const ConsistencyResult& r) {
  std::string out;
  for (const auto& [stem, c] : r.samples) out += stem + "  " + format_fixed(c, 4) + "\n";
  out += "mean " + format_fixed(r.mean, 4) + " over " + std::to_string(r.samples.size()) + " samples\n";
  return out;
}

}  // namespace sharp::cmd
