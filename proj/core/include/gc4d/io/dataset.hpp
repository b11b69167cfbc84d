#pragma once

#include "gc4d/agg_former.hpp"
#include "gc4d/scene.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gc4d::io {

/// "<stem>_%04d.ct4"
std::string frame_file(const std::string& stem, int frame);

/// Writes depth, pointmap, dynamic_mask and attachments tensors per frame plus
/// cameras.json, trajectories.csv and queries.csv. Creates `dir` if needed.
void write_dataset(const std::filesystem::path& dir, const SequenceDataset& data);

/// Inverse of write_dataset. The frame count comes from cameras.json.
SequenceDataset read_dataset(const std::filesystem::path& dir);

/// image_%04d.ct4 for every frame.
void write_images(const std::filesystem::path& dir, const std::vector<RgbImage>& images);
std::vector<RgbImage> read_images(const std::filesystem::path& dir);

}  // namespace gc4d::io
