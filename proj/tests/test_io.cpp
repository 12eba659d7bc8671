#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lsflow/cli_io.hpp"
#include "lsflow/rng.hpp"
#include "lsflow/surface.hpp"

using namespace lsflow;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path p;
  TmpDir() {
    p = fs::temp_directory_path() / ("lsflow_io_test_" + std::to_string(::getpid()) + "_" +
                                     std::to_string(counter()++));
    fs::create_directories(p);
  }
  ~TmpDir() { fs::remove_all(p); }
  std::string file(const std::string& name) const { return (p / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

}  // namespace

TEST_CASE("xyz loader: 3 and 6 column forms, comments, errors") {
  TmpDir tmp;
  write_text(tmp.file("a.xyz"), "# comment\n1 2 3\n\n4 5 6\n7 8 9\n");
  const PointCloud a = load_point_cloud(tmp.file("a.xyz"));
  CHECK(a.size() == 3);
  CHECK(!a.has_normals());
  CHECK(a.points[1] == Vec3(4, 5, 6));

  write_text(tmp.file("n.xyz"), "0 0 0 1 0 0\n1 1 1 0 0 1\n");
  const PointCloud n = load_point_cloud(tmp.file("n.xyz"));
  CHECK(n.has_normals());
  CHECK(n.normals[1] == Vec3(0, 0, 1));

  write_text(tmp.file("bad_cols.xyz"), "1 2 3 4\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("bad_cols.xyz")), IoError);
  write_text(tmp.file("bad_num.xyz"), "1 2 zebra\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("bad_num.xyz")), IoError);
  write_text(tmp.file("mixed.xyz"), "1 2 3\n1 2 3 0 0 1\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("mixed.xyz")), IoError);
  write_text(tmp.file("empty.xyz"), "# nothing\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("empty.xyz")), IoError);
  CHECK_THROWS_AS(load_point_cloud(tmp.file("absent.xyz")), IoError);
  CHECK_THROWS_AS(load_point_cloud(tmp.file("a.unknown")), IoError);
}

TEST_CASE("xyz write/read round trip is bit exact") {
  TmpDir tmp;
  Rng rng(4);
  PointCloud pc;
  for (int i = 0; i < 50; ++i) {
    pc.points.emplace_back(rng.normal() * 1e3, rng.normal() * 1e-7, rng.normal());
    pc.normals.push_back(rng.unit_vector());
  }
  save_point_cloud_xyz(tmp.file("rt.xyz"), pc);
  const PointCloud back = load_point_cloud(tmp.file("rt.xyz"));
  REQUIRE(back.size() == pc.size());
  REQUIRE(back.has_normals());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(back.points[i] == pc.points[i]);
    CHECK(back.normals[i] == pc.normals[i]);
  }
}

TEST_CASE("ply loader: ascii vertices with normals, skipped elements, errors") {
  TmpDir tmp;
  write_text(tmp.file("v.ply"),
             "ply\nformat ascii 1.0\ncomment made by hand\n"
             "element vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
             "property float nx\nproperty float ny\nproperty float nz\n"
             "element face 1\nproperty list uchar int vertex_indices\n"
             "end_header\n"
             "0.5 0 0 1 0 0\n0 0.25 0 0 1 0\n3 0 1 0\n");
  const PointCloud pc = load_point_cloud(tmp.file("v.ply"));
  CHECK(pc.size() == 2);
  CHECK(pc.has_normals());
  CHECK(pc.points[0] == Vec3(0.5, 0, 0));
  CHECK(pc.normals[1] == Vec3(0, 1, 0));

  write_text(tmp.file("noz.ply"),
             "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
             "end_header\n0 0\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("noz.ply")), IoError);
  write_text(tmp.file("bin.ply"), "ply\nformat binary_little_endian 1.0\nend_header\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("bin.ply")), IoError);
  write_text(tmp.file("trunc.ply"),
             "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
             "property float z\nend_header\n1 2 3\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("trunc.ply")), IoError);
  write_text(tmp.file("notply.ply"), "solid nope\n");
  CHECK_THROWS_AS(load_point_cloud(tmp.file("notply.ply")), IoError);
}

TEST_CASE("obj point loader pairs normals only when counts match") {
  TmpDir tmp;
  write_text(tmp.file("c.obj"), "v 1 0 0\nv 0 1 0\nvn 0 0 1\nvn 0 0 1\nf 1 2 1\n");
  const PointCloud both = load_point_cloud(tmp.file("c.obj"));
  CHECK(both.size() == 2);
  CHECK(both.has_normals());

  write_text(tmp.file("d.obj"), "v 1 0 0\nv 0 1 0\nvn 0 0 1\n");
  const PointCloud mismatch = load_point_cloud(tmp.file("d.obj"));
  CHECK(mismatch.size() == 2);
  CHECK(!mismatch.has_normals());
}

TEST_CASE("obj mesh round trip, fan triangulation, index forms") {
  TmpDir tmp;
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  save_mesh_obj(tmp.file("m.obj"), m);
  const TriMesh back = load_mesh_obj(tmp.file("m.obj"));
  REQUIRE(back.vertices.size() == 4);
  REQUIRE(back.triangles.size() == 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(back.vertices[i] == m.vertices[i]);
  CHECK(back.triangles[1] == std::array<int, 3>{0, 2, 3});

  // quad + slashed and negative indices
  write_text(tmp.file("q.obj"), "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2//3 3/2/4 -1\n");
  const TriMesh q = load_mesh_obj(tmp.file("q.obj"));
  REQUIRE(q.triangles.size() == 2);
  CHECK(q.triangles[0] == std::array<int, 3>{0, 1, 2});
  CHECK(q.triangles[1] == std::array<int, 3>{0, 2, 3});

  write_text(tmp.file("oob.obj"), "v 0 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(load_mesh_obj(tmp.file("oob.obj")), IoError);
}

TEST_CASE("correspondence file round trip and validation") {
  TmpDir tmp;
  CorrespondenceSet C;
  C.pairs = {{0, 4}, {2, 1}, {3, 3}};
  save_correspondences(tmp.file("c.txt"), C);
  const CorrespondenceSet back = load_correspondences(tmp.file("c.txt"));
  REQUIRE(back.size() == 3);
  CHECK(back.pairs[1].i == 2);
  CHECK(back.pairs[1].j == 1);

  write_text(tmp.file("cm.txt"), "# header\n0 1\n\n2 0\n");
  CHECK(load_correspondences(tmp.file("cm.txt")).size() == 2);
  write_text(tmp.file("bad.txt"), "0 1 2\n");
  CHECK_THROWS_AS(load_correspondences(tmp.file("bad.txt")), IoError);
  write_text(tmp.file("neg.txt"), "0 -1\n");
  CHECK_THROWS_AS(load_correspondences(tmp.file("neg.txt")), IoError);
}

TEST_CASE("config parser: sections, comments, duplicate and orphan keys") {
  const ConfigMap cfg = parse_config_text(
      "# top comment\n[data]\np0 = a.xyz\noutput = out dir\n\n; alt comment\n[train]\n"
      "epochs = 100\n");
  CHECK(cfg.at("data.p0") == "a.xyz");
  CHECK(cfg.at("data.output") == "out dir");
  CHECK(cfg.at("train.epochs") == "100");
  CHECK(cfg.size() == 3);

  CHECK_THROWS_AS(parse_config_text("x = 1\n"), ConfigError);                    // no section
  CHECK_THROWS_AS(parse_config_text("[a]\nx = 1\nx = 2\n"), ConfigError);        // duplicate
  CHECK_THROWS_AS(parse_config_text("[a]\njust words\n"), ConfigError);          // no '='
  CHECK_THROWS_AS(parse_config_text("[]\n"), ConfigError);                       // empty section
  CHECK_THROWS_AS(parse_config_text("[a\nx = 1\n"), ConfigError);                // malformed
}

TEST_CASE("canonical config text is sorted and reparses to the same map") {
  ConfigMap cfg;
  cfg["train.epochs"] = "50";
  cfg["data.p0"] = "p.xyz";
  cfg["data.output"] = "o";
  cfg["weights.lambda_f"] = "100";
  const std::string text = canonical_config_text(cfg);
  CHECK(parse_config_text(text) == cfg);
  CHECK(text.find("[data]") < text.find("[train]"));
  CHECK(text.find("[train]") < text.find("[weights]"));
}

TEST_CASE("RunSpec::from_config maps every section and rejects unknowns") {
  ConfigMap cfg;
  cfg["data.p0"] = "a.xyz";
  cfg["data.p1"] = "b.xyz";
  cfg["data.correspondence_fraction"] = "0.2";
  cfg["data.correspondence_noise"] = "0.05";
  cfg["train.epochs"] = "77";
  cfg["train.seed"] = "123";
  cfg["model.implicit_width"] = "32";
  cfg["model.encoding_m"] = "2";
  cfg["weights.lambda_m"] = "150";
  cfg["mode.formulation"] = "olse";
  cfg["mode.use_normals"] = "true";
  cfg["extract.times"] = "0, 0.5, 1";
  cfg["extract.resolution"] = "48";
  const RunSpec spec = RunSpec::from_config(cfg);
  CHECK(spec.p0_path == "a.xyz");
  CHECK(spec.correspondence_fraction == 0.2);
  CHECK(spec.correspondence_noise == 0.05);
  CHECK(spec.train.epochs == 77);
  CHECK(spec.train.seed == 123);
  CHECK(spec.train.implicit_width == 32);
  CHECK(spec.train.enc.m == 2);
  CHECK(spec.train.weights.lambda_m == 150);
  CHECK(spec.train.weights.mode == EikonalMode::OLSE);
  CHECK(spec.train.use_normals);
  CHECK(spec.extract_times == std::vector<double>{0, 0.5, 1});
  CHECK(spec.resolution == 48);

  ConfigMap bad = cfg;
  bad["train.epoch"] = "10";  // typo
  CHECK_THROWS_AS(RunSpec::from_config(bad), ConfigError);
  ConfigMap badf = cfg;
  badf["mode.formulation"] = "classic";
  CHECK_THROWS_AS(RunSpec::from_config(badf), ConfigError);
  ConfigMap badn = cfg;
  badn["train.epochs"] = "many";
  CHECK_THROWS_AS(RunSpec::from_config(badn), ConfigError);
}

TEST_CASE("div_free flag sets lambda_div but conflicts with an explicit weight") {
  ConfigMap cfg;
  cfg["mode.div_free"] = "true";
  CHECK(RunSpec::from_config(cfg).train.weights.lambda_div == 1.0);
  cfg["mode.div_free"] = "false";
  CHECK(RunSpec::from_config(cfg).train.weights.lambda_div == 0.0);
  cfg["weights.lambda_div"] = "0.5";
  CHECK_THROWS_AS(RunSpec::from_config(cfg), ConfigError);
  cfg.erase("mode.div_free");
  CHECK(RunSpec::from_config(cfg).train.weights.lambda_div == 0.5);
}

TEST_CASE("RunSpec::validate checks files, times, fractions") {
  TmpDir tmp;
  write_text(tmp.file("a.xyz"), "0 0 0\n");
  RunSpec spec;
  spec.p0_path = tmp.file("a.xyz");
  spec.p1_path = tmp.file("a.xyz");
  spec.train.epochs = 10;
  spec.train.warmup_epochs = 1;
  spec.train.ramp_end = 5;
  CHECK_NOTHROW(spec.validate());

  RunSpec missing = spec;
  missing.p1_path = tmp.file("nope.xyz");
  CHECK_THROWS_AS(missing.validate(), IoError);
  RunSpec badt = spec;
  badt.extract_times = {0.0, 1.5};
  CHECK_THROWS_AS(badt.validate(), ConfigError);
  RunSpec badfrac = spec;
  badfrac.correspondence_fraction = 0.0;
  CHECK_THROWS_AS(badfrac.validate(), ConfigError);
  RunSpec badnoise = spec;
  badnoise.correspondence_noise = 1.0;
  CHECK_THROWS_AS(badnoise.validate(), ConfigError);
}

TEST_CASE("fnv1a64 matches reference vectors; file hash equals buffer hash") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);

  TmpDir tmp;
  const std::string payload = "the quick brown fox\njumps\n";
  write_text(tmp.file("h.txt"), payload);
  CHECK(fnv1a64_file(tmp.file("h.txt")) == fnv1a64(payload.data(), payload.size()));
  CHECK_THROWS_AS(fnv1a64_file(tmp.file("absent.txt")), IoError);
}

// ---------------------------------------------------------------------------

TEST_CASE("translated_sphere: exact construction and ground truth") {
  SynthParams q;
  q.n = 400;
  q.gt_times = {0.0, 0.5, 1.0};
  q.gt_subdiv = 2;
  const SyntheticData d = make_synthetic("translated_sphere", q, 9);
  REQUIRE(d.P0.size() == 400);
  REQUIRE(d.C.size() == 400);
  for (std::size_t i = 0; i < d.P0.size(); ++i) {
    CHECK(d.P1.points[i] == d.P0.points[i] + q.offset);  // exact
    CHECK(std::abs(d.P0.points[i].norm() - q.radius) <= 1e-12);
    CHECK(d.P0.normals[i] == d.P1.normals[i]);
  }
  REQUIRE(d.gt_meshes.size() == 3);
  for (const Vec3& v : d.gt_meshes[1].vertices)
    CHECK(std::abs((v - 0.5 * q.offset).norm() - q.radius) <= 1e-12);
}

TEST_CASE("rotating_bump: rigid pair, group property, exact normals") {
  SynthParams q;
  q.n = 200;
  q.angle_deg = 90.0;
  q.gt_times = {0.0, 0.5, 1.0};
  q.gt_subdiv = 2;
  const SyntheticData d = make_synthetic("rotating_bump", q, 10);

  // pairwise rigid rotation by 90 deg about z
  for (std::size_t i = 0; i < d.P0.size(); ++i) {
    const Vec3& p = d.P0.points[i];
    const Vec3 expect(-p.y(), p.x(), p.z());
    CHECK((d.P1.points[i] - expect).norm() <= 1e-12);
    CHECK(std::abs(d.P0.points[i].norm() / q.radius - 1.0) <= q.bump_height + 1e-12);
  }

  // s = 0.5 ground truth equals the s = 0 surface rotated by 45 deg
  REQUIRE(d.gt_meshes.size() == 3);
  const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  for (std::size_t i = 0; i < d.gt_meshes[0].vertices.size(); ++i) {
    const Vec3& v0 = d.gt_meshes[0].vertices[i];
    const Vec3 expect(c * v0.x() - s * v0.y(), s * v0.x() + c * v0.y(), v0.z());
    CHECK((d.gt_meshes[1].vertices[i] - expect).norm() <= 1e-12);
  }

  // normals agree with finite differences of G(x) = ||x|| - rho(x_hat . b)
  const auto surface_value = [&](const Vec3& x) {
    const double mu = x.normalized().dot(q.bump_dir.normalized());
    const double dd = 1.0 - mu;
    const double rho =
        q.radius * (1.0 + q.bump_height * std::exp(-dd * dd / (2 * q.bump_sigma * q.bump_sigma)));
    return x.norm() - rho;
  };
  for (int i = 0; i < 20; ++i) {
    const Vec3& p = d.P0.points[static_cast<std::size_t>(i * 7)];
    CHECK(std::abs(surface_value(p)) <= 1e-12);  // points lie on the surface
    Vec3 fd;
    const double h = 1e-6;
    for (int c2 = 0; c2 < 3; ++c2) {
      Vec3 a = p, b = p;
      a[c2] += h;
      b[c2] -= h;
      fd[c2] = (surface_value(a) - surface_value(b)) / (2 * h);
    }
    CHECK(d.P0.normals[static_cast<std::size_t>(i * 7)].dot(fd.normalized()) >= 1.0 - 1e-8);
  }
}

TEST_CASE("sphere_to_ellipsoid: affine pair and volume ratio") {
  SynthParams q;
  q.n = 300;
  q.semi_axes = Vec3(1.4, 0.8, 1.0);
  q.gt_times = {0.0, 1.0};
  q.gt_subdiv = 3;
  const SyntheticData d = make_synthetic("sphere_to_ellipsoid", q, 11);
  for (std::size_t i = 0; i < d.P0.size(); ++i) {
    CHECK(d.P1.points[i] == q.semi_axes.cwiseProduct(d.P0.points[i]));
    // ellipsoid equation and outward normal direction
    double e = 0;
    for (int c = 0; c < 3; ++c) {
      const double s = q.radius * q.semi_axes[c];
      e += d.P1.points[i][c] * d.P1.points[i][c] / (s * s);
    }
    CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.P1.normals[i].dot(d.P1.points[i]) > 0.0);
  }
  const double v0 = mesh_volume(d.gt_meshes[0]);
  const double v1 = mesh_volume(d.gt_meshes[1]);
  CHECK(v1 / v0 == doctest::Approx(1.4 * 0.8 * 1.0).epsilon(1e-9));
}

TEST_CASE("holed_pair: disjoint caps, area accounting, exact pairs") {
  SynthParams q;
  q.n = 20000;
  q.hole_area_fraction = 0.08;
  q.gt_times = {0.5};
  q.gt_subdiv = 2;
  const SyntheticData d = make_synthetic("holed_pair", q, 12);
  const double cos_alpha = 1.0 - 2.0 * q.hole_area_fraction;

  for (const Vec3& p : d.P0.points) CHECK(p.z() / q.radius <= cos_alpha + 1e-12);
  for (std::size_t i = 0; i < d.P1.size(); ++i) {
    const Vec3 u = (d.P1.points[i] - q.offset) / q.radius;
    CHECK(-u.z() <= cos_alpha + 1e-12);
  }
  // empirical hole sizes near the requested fraction (binomial tolerance)
  const double miss0 = 1.0 - static_cast<double>(d.P0.size()) / q.n;
  const double miss1 = 1.0 - static_cast<double>(d.P1.size()) / q.n;
  CHECK(miss0 == doctest::Approx(q.hole_area_fraction).epsilon(0.15));
  CHECK(miss1 == doctest::Approx(q.hole_area_fraction).epsilon(0.15));
  CHECK(miss0 >= 0.05);
  CHECK(miss1 >= 0.05);
  // disjoint holes <=> inclusion-exclusion collapses
  CHECK(d.P0.size() + d.P1.size() - d.C.size() == static_cast<std::size_t>(q.n));
  for (const Correspondence& c : d.C.pairs)
    CHECK(d.P1.points[static_cast<std::size_t>(c.j)] ==
          d.P0.points[static_cast<std::size_t>(c.i)] + q.offset);
}

TEST_CASE("synthetic generators are deterministic under seed") {
  SynthParams q;
  q.n = 64;
  q.gt_times = {};
  for (const char* kind :
       {"translated_sphere", "rotating_bump", "sphere_to_ellipsoid", "holed_pair"}) {
    const SyntheticData a = make_synthetic(kind, q, 77);
    const SyntheticData b = make_synthetic(kind, q, 77);
    const SyntheticData c = make_synthetic(kind, q, 78);
    REQUIRE(a.P0.size() == b.P0.size());
    bool all_eq = true, any_diff = false;
    for (std::size_t i = 0; i < a.P0.size(); ++i) {
      all_eq = all_eq && a.P0.points[i] == b.P0.points[i] && a.P1.points[i] == b.P1.points[i];
      if (i < c.P0.size() && a.P0.points[i] != c.P0.points[i]) any_diff = true;
    }
    CHECK(all_eq);
    CHECK(any_diff);
  }
}

TEST_CASE("make_synthetic rejects invalid parameters") {
  SynthParams q;
  CHECK_THROWS_AS(make_synthetic("moebius", q, 1), ConfigError);
  SynthParams bad = q;
  bad.n = 0;
  CHECK_THROWS_AS(make_synthetic("translated_sphere", bad, 1), ConfigError);
  bad = q;
  bad.radius = 0.0;
  CHECK_THROWS_AS(make_synthetic("translated_sphere", bad, 1), ConfigError);
  bad = q;
  bad.hole_area_fraction = 0.01;
  CHECK_THROWS_AS(make_synthetic("holed_pair", bad, 1), ConfigError);
  bad = q;
  bad.gt_times = {1.5};
  CHECK_THROWS_AS(make_synthetic("translated_sphere", bad, 1), ConfigError);
  bad = q;
  bad.bump_sigma = 0.0;
  CHECK_THROWS_AS(make_synthetic("rotating_bump", bad, 1), ConfigError);
}
