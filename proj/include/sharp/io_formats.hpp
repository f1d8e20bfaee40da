#pragma once

// File formats: point clouds (.xyz/.txt text, .bin binary), edge annotation
// JSON, per-point label CSV, and submission-bundle validation. Byte-level
// layouts are documented in docs/formats.md.

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/geometry.hpp"
#include "sharp/labels.hpp"
#include "sharp/vocabulary.hpp"

namespace sharp::io {

namespace fs = std::filesystem;

/// A prediction file carries a ground-truth field or vice versa.
class RoleMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class EdgeRole { ground_truth, prediction };

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed for " + path.string());
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && !s.empty();
}

// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline bool is_binary_cloud(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".bin";
}

inline std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline float read_f32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return std::bit_cast<float>(v);
}

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32_le(std::string& out, float f) {
  const auto v = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Point clouds

/// Text cloud: one `x y z` per line (whitespace separated); blank lines are skipped.
inline PointCloud parse_point_cloud_text(std::string_view text) {
  PointCloud cloud;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    double v[3];
    std::size_t n = 0, pos = 0;
    while (pos < line.size()) {
      const auto b = line.find_first_not_of(" \t", pos);
      if (b == std::string_view::npos) break;
      const auto e = std::min(line.find_first_of(" \t", b), line.size());
      if (n == 3 || !detail::parse_number(line.substr(b, e - b), v[n]) || !std::isfinite(v[n]))
        throw ParseError("line " + std::to_string(line_no) + ": expected three finite numbers", line_no);
      ++n;
      pos = e;
    }
    if (n != 3) throw ParseError("line " + std::to_string(line_no) + ": expected three finite numbers", line_no);
    cloud.push_back({v[0], v[1], v[2]});
  }
  if (cloud.empty()) throw ValidationError("point cloud is empty");
  return cloud;
}

/// Binary cloud: little-endian uint64 count, then count x 3 little-endian float32.
inline PointCloud parse_point_cloud_binary(std::string_view bytes) {
  if (bytes.size() < 8) throw ParseError("truncated header at byte " + std::to_string(bytes.size()), bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t count = detail::read_u64_le(p);
  if (count == 0) throw ValidationError("point cloud is empty");
  const std::uint64_t body = bytes.size() - 8;
  if (count > body / 12 || body < count * 12)
    throw ParseError("truncated point data at byte " + std::to_string(8 + (body / 12) * 12), 8 + (body / 12) * 12);
  if (body != count * 12) throw ParseError("trailing bytes at byte " + std::to_string(8 + count * 12), 8 + count * 12);
  PointCloud cloud(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const unsigned char* q = p + 8 + 12 * i;
    cloud[i] = {detail::read_f32_le(q), detail::read_f32_le(q + 4), detail::read_f32_le(q + 8)};
    if (!is_finite(cloud[i])) throw ParseError("non-finite coordinate at byte " + std::to_string(8 + 12 * i), 8 + 12 * i);
  }
  return cloud;
}

/// Format chosen by extension: `.bin` is binary, anything else is text.
inline PointCloud load_point_cloud(const fs::path& path) {
  const std::string data = detail::read_file(path);
  return detail::is_binary_cloud(path) ? parse_point_cloud_binary(data) : parse_point_cloud_text(data);
}

inline std::string point_cloud_to_text(const PointCloud& cloud) {
  std::string out;
  for (const auto& p : cloud) {
    out += detail::format_double(p.x);
    out += ' ';
    out += detail::format_double(p.y);
    out += ' ';
    out += detail::format_double(p.z);
    out += '\n';
  }
  return out;
}

/// Coordinates are narrowed to float32.
inline std::string point_cloud_to_binary(const PointCloud& cloud) {
  std::string out;
  out.reserve(8 + 12 * cloud.size());
  detail::put_u64_le(out, cloud.size());
  for (const auto& p : cloud) {
    detail::put_f32_le(out, static_cast<float>(p.x));
    detail::put_f32_le(out, static_cast<float>(p.y));
    detail::put_f32_le(out, static_cast<float>(p.z));
  }
  return out;
}

inline void save_point_cloud(const fs::path& path, const PointCloud& cloud) {
  detail::write_file(path, detail::is_binary_cloud(path) ? point_cloud_to_binary(cloud) : point_cloud_to_text(cloud));
}

// ---------------------------------------------------------------------------
// Edge annotations

namespace detail {

using nlohmann::json;

inline Point3 to_point(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 3) throw ValidationError(what + " must be an array of 3 numbers");
  Point3 p;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ValidationError(what + " must be numeric");
    p[i] = v[i].get<double>();
  }
  if (!is_finite(p)) throw ValidationError(what + " is not finite");
  return p;
}

inline Point3 read_vec(const json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) throw ValidationError(where + ": missing field \"" + key + "\"");
  return to_point(rec.at(key), where + ": \"" + key + "\"");
}

inline double read_real(const json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) throw ValidationError(where + ": missing field \"" + key + "\"");
  const json& v = rec.at(key);
  if (!v.is_number()) throw ValidationError(where + ": \"" + key + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(where + ": \"" + key + "\" is not finite");
  return d;
}

inline json vec_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace detail

inline EdgeSet parse_edges(std::string_view text, EdgeRole role) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("edges") || !doc.at("edges").is_array())
    throw ValidationError("document must be an object with an \"edges\" array");

  EdgeSet edges;
  const json& arr = doc.at("edges");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "edge " + std::to_string(i);
    const json& rec = arr[i];
    if (!rec.is_object()) throw ValidationError(where + ": record must be an object");
    if (!rec.contains("type") || !rec.at("type").is_string()) throw ValidationError(where + ": missing field \"type\"");
    const std::string type = rec.at("type").get<std::string>();

    ParametricEdge e;
    if (type == "line") {
      e.geometry = LineEdge{detail::read_vec(rec, "start", where), detail::read_vec(rec, "end", where)};
    } else if (type == "circle") {
      CircleEdge c;
      c.start = detail::read_vec(rec, "start", where);
      c.end = detail::read_vec(rec, "end", where);
      c.center = detail::read_vec(rec, "center", where);
      c.normal = detail::read_vec(rec, "normal", where);
      c.radius = detail::read_real(rec, "radius", where);
      e.geometry = c;
    } else if (type == "spline") {
      SplineEdge s;
      if (!rec.contains("degree") || !rec.at("degree").is_number_integer())
        throw ValidationError(where + ": \"degree\" must be an integer");
      const auto deg = rec.at("degree").get<std::int64_t>();
      if (deg < 1 || deg > 64) throw ValidationError(where + ": spline degree must be >= 1");
      s.degree = static_cast<int>(deg);
      if (!rec.contains("points") || !rec.at("points").is_array())
        throw ValidationError(where + ": missing field \"points\"");
      for (const json& pt : rec.at("points")) s.keypoints.push_back(detail::to_point(pt, where + ": spline point"));
      e.geometry = std::move(s);
    } else {
      throw ValidationError(where + ": unknown edge type \"" + type + "\"");
    }

    const bool has_angle = rec.contains("sharpness"), has_flag = rec.contains("sharp");
    if (role == EdgeRole::ground_truth) {
      if (has_flag) throw RoleMismatchError(where + ": ground truth carries a boolean \"sharp\" flag");
      e.sharpness_angle = detail::read_real(rec, "sharpness", where);
    } else {
      if (has_angle) throw RoleMismatchError(where + ": prediction carries a \"sharpness\" angle");
      if (!has_flag || !rec.at("sharp").is_boolean()) throw ValidationError(where + ": \"sharp\" must be true or false");
      e.sharp = rec.at("sharp").get<bool>();
    }
    try {
      validate_edge(e);
    } catch (const MalformedEdgeError& err) {
      throw ValidationError(where + ": " + err.what());
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

inline EdgeSet load_edges(const fs::path& path, EdgeRole role) { return parse_edges(detail::read_file(path), role); }

/// Serializes in the given role. Ground truth needs `sharpness_angle`;
/// predictions write `is_sharp()`.
inline std::string edges_to_json(const EdgeSet& edges, EdgeRole role) {
  using detail::json;
  json arr = json::array();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    json rec;
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, LineEdge>) {
            rec["type"] = "line";
            rec["start"] = detail::vec_json(g.start);
            rec["end"] = detail::vec_json(g.end);
          } else if constexpr (std::is_same_v<T, CircleEdge>) {
            rec["type"] = "circle";
            rec["start"] = detail::vec_json(g.start);
            rec["end"] = detail::vec_json(g.end);
            rec["center"] = detail::vec_json(g.center);
            rec["normal"] = detail::vec_json(g.normal);
            rec["radius"] = g.radius;
          } else {
            rec["type"] = "spline";
            rec["degree"] = g.degree;
            json pts = json::array();
            for (const auto& p : g.keypoints) pts.push_back(detail::vec_json(p));
            rec["points"] = std::move(pts);
          }
        },
        e.geometry);
    if (role == EdgeRole::ground_truth) {
      if (!e.sharpness_angle) throw ValidationError("edge " + std::to_string(i) + ": ground truth needs a sharpness angle");
      rec["sharpness"] = *e.sharpness_angle;
    } else {
      rec["sharp"] = e.is_sharp();
    }
    arr.push_back(std::move(rec));
  }
  return json{{"edges", std::move(arr)}}.dump(1) + "\n";
}

inline void save_edges(const fs::path& path, const EdgeSet& edges, EdgeRole role) {
  detail::write_file(path, edges_to_json(edges, role));
}

// ---------------------------------------------------------------------------
// Label tables

inline constexpr std::string_view kLabelHeader = "index,membership,type";

/// Parses a label CSV against the track's vocabulary. With `expected_n`, the
/// file must hold exactly that many records.
inline LabelTable parse_labels(std::string_view text, int track, std::optional<std::size_t> expected_n = std::nullopt) {
  if (track != 2 && track != 3) throw DomainError("labels exist for tracks 2 and 3 only");
  const auto& vocab = vocabulary_for_track(track);

  struct Row {
    std::int64_t membership;
    int type;
  };
  std::map<std::int64_t, Row> rows;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line != kLabelHeader)
        throw ParseError("line " + std::to_string(line_no) + ": expected header \"" + std::string(kLabelHeader) + "\"",
                         line_no);
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 comma-separated fields", line_no);
    std::int64_t index = 0, membership = 0;
    if (!detail::parse_number(line.substr(0, c1), index) || index < 0)
      throw ParseError("line " + std::to_string(line_no) + ": index must be a non-negative integer", line_no);
    if (!detail::parse_number(line.substr(c1 + 1, c2 - c1 - 1), membership) || membership < 0)
      throw ParseError("line " + std::to_string(line_no) + ": membership must be a non-negative integer", line_no);
    const std::string_view name = detail::trim(line.substr(c2 + 1));
    const auto type = find_type(vocab, name);
    if (!type) {
      std::string valid;
      for (const auto& v : vocab) valid += (valid.empty() ? "" : ", ") + v;
      throw ValidationError("line " + std::to_string(line_no) + ": unknown type \"" + std::string(name) +
                            "\"; valid types: " + valid);
    }
    if (!rows.emplace(index, Row{membership, *type}).second)
      throw ValidationError("duplicate index " + std::to_string(index));
  }
  if (!header) throw ParseError("missing header line", 1);

  const std::size_t n = expected_n.value_or(rows.size());
  if (rows.size() != n)
    throw ValidationError("count mismatch: " + std::to_string(rows.size()) + " records, expected " + std::to_string(n));
  LabelTable table;
  table.vocabulary = vocab;
  table.membership.reserve(n);
  table.type_id.reserve(n);
  std::int64_t next = 0;
  for (const auto& [index, row] : rows) {
    if (index != next) throw ValidationError("missing index " + std::to_string(next));
    table.membership.push_back(row.membership);
    table.type_id.push_back(row.type);
    ++next;
  }
  return table;
}

inline LabelTable load_labels(const fs::path& path, int track, std::optional<std::size_t> expected_n = std::nullopt) {
  return parse_labels(detail::read_file(path), track, expected_n);
}

inline std::string labels_to_csv(const LabelTable& t) {
  std::string out(kLabelHeader);
  out += '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int type = t.type_id[i];
    if (type < 0 || static_cast<std::size_t>(type) >= t.vocabulary.size())
      throw ValidationError("type id outside the vocabulary at index " + std::to_string(i));
    out += std::to_string(i) + ',' + std::to_string(t.membership[i]) + ',' + t.vocabulary[static_cast<std::size_t>(type)] + '\n';
  }
  return out;
}

inline void save_labels(const fs::path& path, const LabelTable& t) { detail::write_file(path, labels_to_csv(t)); }

// ---------------------------------------------------------------------------
// Submission bundles

/// File extension of annotation files for a track.
inline std::string annotation_extension(int track) { return track == 1 ? ".json" : ".csv"; }

/// Stems of the track's annotation files in `dir`, sorted.
inline std::vector<std::string> annotation_stems(const fs::path& dir, int track) {
  if (!fs::is_directory(dir)) throw Error("not a readable directory: " + dir.string());
  std::vector<std::string> stems;
  const std::string ext = annotation_extension(track);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext) stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  return stems;
}

enum class Reason { ok, missing_sample, unmatched_prediction, parse_error, validation_error, count_mismatch };

inline const char* reason_code(Reason r) {
  switch (r) {
    case Reason::ok: return "OK";
    case Reason::missing_sample: return "MISSING_SAMPLE";
    case Reason::unmatched_prediction: return "UNMATCHED_PREDICTION";
    case Reason::parse_error: return "PARSE_ERROR";
    case Reason::validation_error: return "VALIDATION_ERROR";
    case Reason::count_mismatch: return "COUNT_MISMATCH";
  }
  return "?";
}

struct SampleCheck {
  std::string stem;
  Reason reason = Reason::ok;
  std::string message;
  bool pass() const { return reason == Reason::ok; }
};

struct ValidationReport {
  int track = 1;
  std::vector<SampleCheck> samples;  // sorted by stem

  bool all_pass() const {
    return std::all_of(samples.begin(), samples.end(), [](const SampleCheck& s) { return s.pass(); });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const SampleCheck& s) { return !s.pass(); }));
  }
};

/// Checks one prediction file against its ground-truth file.
inline SampleCheck check_sample(const fs::path& pred_file, const fs::path& gt_file, int track, const std::string& stem) {
  SampleCheck c{stem, Reason::ok, {}};
  try {
    if (track == 1) {
      load_edges(pred_file, EdgeRole::prediction);
    } else {
      const auto gt = load_labels(gt_file, track);
      const auto pred = load_labels(pred_file, track);
      if (pred.size() != gt.size()) {
        c.reason = Reason::count_mismatch;
        c.message = "prediction has " + std::to_string(pred.size()) + " points, ground truth " + std::to_string(gt.size());
      }
    }
  } catch (const ParseError& e) {
    c.reason = Reason::parse_error;
    c.message = e.what();
  } catch (const Error& e) {
    c.reason = Reason::validation_error;
    c.message = e.what();
  }
  return c;
}

/// Pairs prediction and ground-truth files by stem and checks each prediction.
inline ValidationReport validate_submission(const fs::path& pred_dir, const fs::path& gt_dir, int track) {
  if (track < 1 || track > 3) throw DomainError("track must be 1, 2 or 3");
  const auto gt = annotation_stems(gt_dir, track);
  const auto pred = annotation_stems(pred_dir, track);
  const std::string ext = annotation_extension(track);

  ValidationReport report;
  report.track = track;
  for (const auto& stem : gt) {
    if (!std::binary_search(pred.begin(), pred.end(), stem)) {
      report.samples.push_back({stem, Reason::missing_sample, "no prediction file " + stem + ext});
      continue;
    }
    report.samples.push_back(check_sample(pred_dir / (stem + ext), gt_dir / (stem + ext), track, stem));
  }
  for (const auto& stem : pred)
    if (!std::binary_search(gt.begin(), gt.end(), stem))
      report.samples.push_back({stem, Reason::unmatched_prediction, "no ground truth for " + stem + ext});
  std::sort(report.samples.begin(), report.samples.end(),
            [](const SampleCheck& a, const SampleCheck& b) { return a.stem < b.stem; });
  return report;
}

}  // namespace sharp::io
