#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsflow/surface.hpp"
#include "lsflow/trainer.hpp"
#include "lsflow/types.hpp"

namespace lsflow {

// ---------------------------------------------------------------------------
// Point clouds, meshes, correspondences on disk.

// Format chosen by extension: .xyz ("x y z [nx ny nz]" per line, '#' comments),
// .ply (ascii 1.0), .obj (v/vn records). Anything else is an IoError.
PointCloud load_point_cloud(const std::string& path);

// XYZ writer, %.17g — a write/read round trip reproduces the cloud bit-exactly.
void save_point_cloud_xyz(const std::string& path, const PointCloud& pc);

TriMesh load_mesh_obj(const std::string& path);
void save_mesh_obj(const std::string& path, const TriMesh& mesh);

// "i j" per line, 0-based into (P0, P1), '#' comments.
CorrespondenceSet load_correspondences(const std::string& path);
void save_correspondences(const std::string& path, const CorrespondenceSet& C);

// ---------------------------------------------------------------------------
// Config: flat "key = value" lines under [section] headers, '#' comments.
// Keys are stored fully qualified ("train.epochs"). Duplicate keys are an
// error; so are keys outside any section.

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);

// One CLI run. Built from a ConfigMap; every key must be known (typo-proof).
struct RunSpec {
  std::string p0_path;
  std::string p1_path;
  std::string correspondence_path;  // optional: empty -> no matching pairs
  std::string output = "out";
  double correspondence_fraction = 1.0;
  double correspondence_noise = 0.0;  // fraction of pairs globally permuted

  TrainConfig train;

  std::vector<double> extract_times = {0.0, 0.25, 0.5, 0.75, 1.0};
  int resolution = 128;
  int trajectory_count = 0;

  static RunSpec from_config(const ConfigMap& cfg);
  // Referenced input files must exist (IoError); times within [0,1].
  void validate() const;
};

// Parse helpers shared by the config reader and CLI overrides.
bool parse_bool(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

// Re-serialize a ConfigMap in canonical sorted form (stable config hashes).
std::string canonical_config_text(const ConfigMap& cfg);

// ---------------------------------------------------------------------------
// Manifest hashing.

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::string& path);  // IoError if unreadable

// ---------------------------------------------------------------------------
// Synthetic pairs with known ground truth (desk-scale stand-ins for animation
// datasets that cannot be redistributed).

struct SynthParams {
  int n = 2000;
  double radius = 0.5;
  Vec3 offset = Vec3(0.3, 0.0, 0.0);     // translated_sphere, holed_pair
  double angle_deg = 90.0;               // rotating_bump
  Vec3 axis = Vec3(0.0, 0.0, 1.0);
  double bump_height = 0.35;
  double bump_sigma = 0.25;              // width in mu = cos(angle to bump_dir)
  Vec3 bump_dir = Vec3(1.0, 0.0, 0.0);
  Vec3 semi_axes = Vec3(1.3, 0.85, 0.9); // sphere_to_ellipsoid, relative to radius
  double hole_area_fraction = 0.08;      // holed_pair, per cloud
  std::vector<double> gt_times = {0.0, 0.25, 0.5, 0.75, 1.0};
  int gt_subdiv = 4;
  bool with_normals = true;

  void validate() const;
};

struct SyntheticData {
  PointCloud P0, P1;
  CorrespondenceSet C;             // full set
  std::vector<double> gt_times;
  std::vector<TriMesh> gt_meshes;  // analytic intermediate surfaces, one per time
};

// kind in {translated_sphere, rotating_bump, sphere_to_ellipsoid, holed_pair};
// deterministic under seed.
SyntheticData make_synthetic(const std::string& kind, const SynthParams& params,
                             std::uint64_t seed);

}  // namespace lsflow
