#pragma once

#include "gc4d/geometry.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gc4d::io {

struct PlyData {
  PointCloud points;
  std::vector<Vec3> normals;  // empty when the file has none
};

/// ASCII PLY with float32 x y z and, when `normals` is non-null, nx ny nz.
std::string encode_ply(const PointCloud& points, const std::vector<Vec3>* normals = nullptr);
PlyData decode_ply(std::string_view text);

void write_ply(const std::filesystem::path& path, const PointCloud& points,
               const std::vector<Vec3>* normals = nullptr);
PlyData read_ply(const std::filesystem::path& path);

}  // namespace gc4d::io
