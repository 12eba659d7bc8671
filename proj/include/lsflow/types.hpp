#pragma once

#include <Eigen/Core>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. The CLI maps these onto exit codes
// (ConfigError -> 2, DivergenceError -> 3, IoError -> 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct DivergenceError : Error {
  using Error::Error;
};
struct DegenerateGradientError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

// Point cloud in world or normalized coordinates. Normals, when present,
// are unit length and parallel-indexed with points.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty or same size as points

  bool has_normals() const { return !normals.empty(); }
  std::size_t size() const { return points.size(); }

  void validate() const {
    if (!normals.empty() && normals.size() != points.size())
      throw DimensionError("point cloud: normals/points size mismatch");
  }
};

// Index pair asserting P0[i] corresponds to P1[j].
struct Correspondence {
  int i = 0;
  int j = 0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  // indices in range, no duplicate source index
  void validate(std::size_t n0, std::size_t n1) const;
};

// Triangle mesh with consistent outward orientation (positive signed volume
// for closed surfaces enclosing the negative side of the field).
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

}  // namespace lsflow
