#include <gtest/gtest.h>

#include <cstring>
#include <numbers>

#include "sharp/io_formats.hpp"
#include "sharp/synthetic.hpp"
#include "test_support.hpp"

using namespace sharp;
using sharp::test::Rng;
using sharp::test::TempDir;
namespace fs = std::filesystem;

namespace {

template <class E>
std::string message_of(auto&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected exception";
  return {};
}

std::size_t parse_location(auto&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.location();
  }
  ADD_FAILURE() << "expected ParseError";
  return 0;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_edge(const ParametricEdge& a, const ParametricEdge& b) {
  auto same_point = [](const Point3& p, const Point3& q) {
    return same_bits(p.x, q.x) && same_bits(p.y, q.y) && same_bits(p.z, q.z);
  };
  if (a.kind() != b.kind() || a.sharp != b.sharp) return false;
  if (a.sharpness_angle.has_value() != b.sharpness_angle.has_value()) return false;
  if (a.sharpness_angle && !same_bits(*a.sharpness_angle, *b.sharpness_angle)) return false;
  if (const auto* l = std::get_if<LineEdge>(&a.geometry)) {
    const auto& m = std::get<LineEdge>(b.geometry);
    return same_point(l->start, m.start) && same_point(l->end, m.end);
  }
  if (const auto* c = std::get_if<CircleEdge>(&a.geometry)) {
    const auto& d = std::get<CircleEdge>(b.geometry);
    return same_point(c->start, d.start) && same_point(c->end, d.end) && same_point(c->center, d.center) &&
           same_point(c->normal, d.normal) && same_bits(c->radius, d.radius);
  }
  const auto& s = std::get<SplineEdge>(a.geometry);
  const auto& t = std::get<SplineEdge>(b.geometry);
  if (s.degree != t.degree || s.keypoints.size() != t.keypoints.size()) return false;
  for (std::size_t i = 0; i < s.keypoints.size(); ++i)
    if (!same_point(s.keypoints[i], t.keypoints[i])) return false;
  return true;
}

std::string line_record(const char* extra) {
  return std::string(R"({"edges":[{"type":"line","start":[0,0,0],"end":[1,0,0],)") + extra + "}]}";
}

std::string labels(std::initializer_list<const char*> rows) {
  std::string s = "index,membership,type\n";
  for (const char* r : rows) s += std::string(r) + "\n";
  return s;
}

}  // namespace

// Point clouds

TEST(PointCloudIO, TextExample) {
  const auto c = io::parse_point_cloud_text("0 0 0\n1 0 0\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1], (Point3{1, 0, 0}));
  EXPECT_EQ(io::parse_point_cloud_text("  1\t2   3 \r\n\n4 5 6").size(), 2u);
}

TEST(PointCloudIO, TextErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_location([] { io::parse_point_cloud_text("0 0 0\n1 0\n"); }), 2u);
  EXPECT_EQ(parse_location([] { io::parse_point_cloud_text("0 0 0\n\n1 0 0 4\n"); }), 3u);
  EXPECT_EQ(parse_location([] { io::parse_point_cloud_text("0 x 0\n"); }), 1u);
  EXPECT_EQ(parse_location([] { io::parse_point_cloud_text("0 0 nan\n"); }), 1u);
  EXPECT_THROW(io::parse_point_cloud_text("\n\n"), ValidationError);
}

TEST(PointCloudIO, BinaryErrorsCarryByteOffsets) {
  std::string empty(8, '\0');
  EXPECT_THROW(io::parse_point_cloud_binary(empty), ValidationError);
  EXPECT_EQ(parse_location([] { io::parse_point_cloud_binary(std::string(5, '\0')); }), 5u);

  PointCloud c{{1, 2, 3}, {4, 5, 6}};
  std::string bytes = io::point_cloud_to_binary(c);
  ASSERT_EQ(bytes.size(), 8u + 24u);
  EXPECT_EQ(parse_location([&] { io::parse_point_cloud_binary(bytes.substr(0, 8 + 12 + 5)); }), 20u);
  EXPECT_EQ(parse_location([&] { io::parse_point_cloud_binary(bytes + "xy"); }), 32u);
}

TEST(PointCloudIO, RoundTripsAreExact) {
  TempDir dir("cloud");
  Rng rng(301);
  PointCloud single, full;
  for (int i = 0; i < 500; ++i) {
    const Point3 p = rng.point(-1e3, 1e3);
    single.push_back({static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)});
    full.push_back(p * rng.uniform(1e-6, 1.0));
  }
  io::save_point_cloud(dir / "a.bin", single);
  io::save_point_cloud(dir / "a.xyz", full);
  const auto b = io::load_point_cloud(dir / "a.bin");
  const auto t = io::load_point_cloud(dir / "a.xyz");
  ASSERT_EQ(b.size(), single.size());
  ASSERT_EQ(t.size(), full.size());
  for (std::size_t i = 0; i < single.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      EXPECT_TRUE(same_bits(b[i][d], single[i][d]));
      EXPECT_TRUE(same_bits(t[i][d], full[i][d]));
    }
}

TEST(PointCloudIO, MissingFile) { EXPECT_THROW(io::load_point_cloud("/nonexistent/cloud.xyz"), Error); }

// Edge annotations

TEST(EdgeIO, MinimalLine) {
  const auto gt = io::parse_edges(line_record(R"("sharpness":1.2)"), io::EdgeRole::ground_truth);
  ASSERT_EQ(gt.size(), 1u);
  EXPECT_EQ(gt[0].kind(), EdgeKind::line);
  EXPECT_EQ(gt[0].sharpness_angle, std::optional<double>(1.2));
  const auto pred = io::parse_edges(line_record(R"("sharp":false)"), io::EdgeRole::prediction);
  EXPECT_EQ(pred[0].sharp, std::optional<bool>(false));
  EXPECT_TRUE(io::parse_edges(R"({"edges":[]})", io::EdgeRole::prediction).empty());
}

TEST(EdgeIO, InvalidRecordsNameTheirIndex) {
  const std::string bad_radius =
      R"({"edges":[{"type":"line","start":[0,0,0],"end":[1,0,0],"sharp":true},)"
      R"({"type":"circle","start":[1,0,0],"end":[1,0,0],"center":[0,0,0],"normal":[0,0,1],"radius":-1,"sharp":true}]})";
  const auto msg = message_of<ValidationError>([&] { io::parse_edges(bad_radius, io::EdgeRole::prediction); });
  EXPECT_NE(msg.find("edge 1"), std::string::npos) << msg;

  const std::string short_spline =
      R"({"edges":[{"type":"spline","degree":3,"points":[[0,0,0],[1,0,0],[2,1,0]],"sharp":true}]})";
  EXPECT_THROW(io::parse_edges(short_spline, io::EdgeRole::prediction), ValidationError);

  const std::string unknown = R"({"edges":[{"type":"ellipse","sharp":true}]})";
  EXPECT_NE(message_of<ValidationError>([&] { io::parse_edges(unknown, io::EdgeRole::prediction); }).find("ellipse"),
            std::string::npos);

  const std::string missing = R"({"edges":[{"type":"line","start":[0,0,0],"sharp":true}]})";
  EXPECT_NE(message_of<ValidationError>([&] { io::parse_edges(missing, io::EdgeRole::prediction); }).find("end"),
            std::string::npos);

  EXPECT_THROW(io::parse_edges(R"({"edges":{}})", io::EdgeRole::prediction), ValidationError);
  EXPECT_THROW(io::parse_edges(line_record(R"("sharp":1)"), io::EdgeRole::prediction), ValidationError);
  EXPECT_THROW(io::parse_edges(line_record(R"("sharp":true)"), io::EdgeRole::ground_truth), ValidationError);
}

TEST(EdgeIO, RoleMismatch) {
  EXPECT_THROW(io::parse_edges(line_record(R"("sharpness":0.5)"), io::EdgeRole::prediction), io::RoleMismatchError);
  EXPECT_THROW(io::parse_edges(line_record(R"("sharpness":0.5,"sharp":true)"), io::EdgeRole::ground_truth),
               io::RoleMismatchError);
}

TEST(EdgeIO, MalformedJsonReportsByteOffset) {
  const std::string text = R"({"edges":[{"type":"line",]})";
  const auto at = parse_location([&] { io::parse_edges(text, io::EdgeRole::prediction); });
  EXPECT_GT(at, 20u);
  EXPECT_LE(at, text.size());
}

TEST(EdgeIO, RoundTripsAreLossless) {
  TempDir dir("edges");
  Rng rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    const auto gt = test::random_edge_set(rng, 1 + rng.below(12));
    io::save_edges(dir / "gt.json", gt, io::EdgeRole::ground_truth);
    const auto back = io::load_edges(dir / "gt.json", io::EdgeRole::ground_truth);
    ASSERT_EQ(back.size(), gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) EXPECT_TRUE(same_edge(gt[i], back[i])) << "edge " << i;

    const auto pred = test::as_prediction(rng, gt, 0.1);
    io::save_edges(dir / "pred.json", pred, io::EdgeRole::prediction);
    const auto back2 = io::load_edges(dir / "pred.json", io::EdgeRole::prediction);
    ASSERT_EQ(back2.size(), pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_TRUE(same_edge(pred[i], back2[i])) << "edge " << i;
  }
}

TEST(EdgeIO, SavingChecksTheRole) {
  TempDir dir("edges_role");
  EdgeSet no_angle{ParametricEdge{LineEdge{{0, 0, 0}, {1, 0, 0}}, true, std::nullopt}};
  EXPECT_THROW(io::save_edges(dir / "x.json", no_angle, io::EdgeRole::ground_truth), ValidationError);
}

// Label tables

TEST(LabelIO, FourPointFile) {
  const auto t = io::parse_labels(labels({"0,7,Plane", "1,7,Plane", "2,3,Cylinder", "3,12,BSpline"}), 2, 4);
  EXPECT_EQ(t.membership, (std::vector<std::int64_t>{7, 7, 3, 12}));
  EXPECT_EQ(t.vocabulary[static_cast<std::size_t>(t.type_id[3])], "BSpline");
}

TEST(LabelIO, RecordsMayComeInAnyOrder) {
  const auto t = io::parse_labels(labels({"2,1,Plane", "0,5,Cone", "1,5,Cone"}), 2);
  EXPECT_EQ(t.membership, (std::vector<std::int64_t>{5, 5, 1}));
}

TEST(LabelIO, TypeNamesFoldCaseAndHyphen) {
  const auto t = io::parse_labels(labels({"0,0,B-Spline", "1,0,bspline", "2,1,PLANE"}), 2);
  EXPECT_EQ(t.type_id[0], t.type_id[1]);
  EXPECT_EQ(t.type_id[2], *find_type(face_type_vocabulary(), "Plane"));
}

TEST(LabelIO, UnknownTypeListsVocabulary) {
  const auto msg = message_of<ValidationError>([] { io::parse_labels(labels({"0,0,Extrude"}), 3); });
  for (const auto& name : operation_type_vocabulary()) EXPECT_NE(msg.find(name), std::string::npos) << name;
  EXPECT_EQ(operation_type_vocabulary().size(), 11u);
}

TEST(LabelIO, IndexErrors) {
  const auto dup = message_of<ValidationError>([] {
    io::parse_labels(labels({"0,0,Plane", "1,0,Plane", "1,0,Plane", "3,0,Plane"}), 2);
  });
  EXPECT_NE(dup.find("duplicate index 1"), std::string::npos) << dup;
  const auto gap = message_of<ValidationError>([] { io::parse_labels(labels({"0,0,Plane", "2,0,Plane"}), 2); });
  EXPECT_NE(gap.find("missing index 1"), std::string::npos) << gap;
  EXPECT_THROW(io::parse_labels(labels({"0,0,Plane", "1,0,Plane"}), 2, 3), ValidationError);
}

TEST(LabelIO, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_location([] { io::parse_labels("idx,m,t\n0,0,Plane\n", 2); }), 1u);
  EXPECT_EQ(parse_location([] { io::parse_labels(labels({"0,0,Plane", "1,-2,Plane"}), 2); }), 3u);
  EXPECT_EQ(parse_location([] { io::parse_labels(labels({"0,0"}), 2); }), 2u);
  EXPECT_EQ(parse_location([] { io::parse_labels(labels({"0,0,Plane,extra"}), 2); }), 2u);
  EXPECT_THROW(io::parse_labels("", 2), ParseError);
  EXPECT_THROW(io::parse_labels(labels({"0,0,Plane"}), 1), DomainError);
}

TEST(LabelIO, RoundTrip) {
  TempDir dir("labels");
  const auto f = synthetic::primitive_scene();
  io::save_labels(dir / "faces.csv", f.faces);
  io::save_labels(dir / "steps.csv", f.steps);
  const auto faces = io::load_labels(dir / "faces.csv", 2, f.faces.size());
  const auto steps = io::load_labels(dir / "steps.csv", 3, f.steps.size());
  EXPECT_EQ(faces.membership, f.faces.membership);
  EXPECT_EQ(faces.type_id, f.faces.type_id);
  EXPECT_EQ(steps.membership, f.steps.membership);
  EXPECT_EQ(steps.type_id, f.steps.type_id);
  EXPECT_EQ(io::labels_to_csv(faces), io::detail::read_file(dir / "faces.csv"));
}

// Submission bundles

namespace {

struct Bundle {
  TempDir root{"bundle"};
  fs::path pred = root / "pred", gt = root / "gt";
  Bundle() {
    fs::create_directories(pred);
    fs::create_directories(gt);
  }
};

}  // namespace

TEST(ValidateSubmission, CompleteBundlePasses) {
  Bundle b;
  const auto f = synthetic::cube(10);
  for (const char* stem : {"a", "b", "c"}) {
    io::save_labels(b.gt / (std::string(stem) + ".csv"), f.faces);
    io::save_labels(b.pred / (std::string(stem) + ".csv"), f.faces);
  }
  const auto r = io::validate_submission(b.pred, b.gt, 2);
  EXPECT_TRUE(r.all_pass());
  ASSERT_EQ(r.samples.size(), 3u);
  EXPECT_EQ(r.samples[0].stem, "a");
}

TEST(ValidateSubmission, ReasonCodes) {
  Bundle b;
  const auto f = synthetic::cube(10);
  for (const char* stem : {"a", "b", "c", "d", "e"}) io::save_labels(b.gt / (std::string(stem) + ".csv"), f.faces);
  io::save_labels(b.pred / "a.csv", f.faces);
  io::detail::write_file(b.pred / "b.csv", "index,membership,type\n0,0,Plain\n");
  io::detail::write_file(b.pred / "c.csv", "header\n");
  auto fewer = f.faces;
  fewer.membership.pop_back();
  fewer.type_id.pop_back();
  io::save_labels(b.pred / "d.csv", fewer);
  io::save_labels(b.pred / "z.csv", f.faces);

  const auto r = io::validate_submission(b.pred, b.gt, 2);
  ASSERT_EQ(r.samples.size(), 6u);
  std::map<std::string, std::string> codes;
  for (const auto& s : r.samples) codes[s.stem] = io::reason_code(s.reason);
  EXPECT_EQ(codes["a"], "OK");
  EXPECT_EQ(codes["b"], "VALIDATION_ERROR");
  EXPECT_EQ(codes["c"], "PARSE_ERROR");
  EXPECT_EQ(codes["d"], "COUNT_MISMATCH");
  EXPECT_EQ(codes["e"], "MISSING_SAMPLE");
  EXPECT_EQ(codes["z"], "UNMATCHED_PREDICTION");
  EXPECT_EQ(r.failures(), 5u);
}

TEST(ValidateSubmission, MalformedEdgeFileIsIsolated) {
  Bundle b;
  Rng rng(305);
  const auto f = synthetic::cube(10);
  for (const char* stem : {"one", "two", "three"}) {
    io::save_edges(b.gt / (std::string(stem) + ".json"), f.edges, io::EdgeRole::ground_truth);
    io::save_edges(b.pred / (std::string(stem) + ".json"), test::as_prediction(rng, f.edges, 0.0),
                   io::EdgeRole::prediction);
  }
  io::detail::write_file(b.pred / "two.json", R"({"edges":[{"type":"line","start":[0,0,0],"end":[0,0,0],"sharp":true}]})");
  const auto r = io::validate_submission(b.pred, b.gt, 1);
  ASSERT_EQ(r.samples.size(), 3u);
  for (const auto& s : r.samples) EXPECT_EQ(s.pass(), s.stem != "two") << s.stem;
}

TEST(ValidateSubmission, UnreadableDirectory) {
  EXPECT_THROW(io::validate_submission("/nonexistent/pred", "/nonexistent/gt", 2), Error);
  Bundle b;
  EXPECT_THROW(io::validate_submission(b.pred, b.gt, 4), DomainError);
}
