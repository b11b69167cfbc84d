#pragma once

#include "gc4d/scene.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gc4d::io {

inline constexpr std::string_view kTrajectoryHeader = "track_id,frame,x,y,z,visible,dynamic";
inline constexpr std::string_view kQueryHeader = "track_id,u,v";

/// One row per (track, frame), track-major. Coordinates use shortest
/// round-trip decimal so reading back is exact.
std::string encode_trajectories(const TrajectorySet& tracks);
/// Rows may come in any order but must cover the full (track, frame) grid once.
TrajectorySet decode_trajectories(std::string_view text);

std::string encode_queries(std::span<const Pixel> queries);
std::vector<Pixel> decode_queries(std::string_view text);

void write_trajectories(const std::filesystem::path& path, const TrajectorySet& tracks);
TrajectorySet read_trajectories(const std::filesystem::path& path);

}  // namespace gc4d::io
