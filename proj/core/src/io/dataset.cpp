#include "gc4d/io/dataset.hpp"

#include "gc4d/error.hpp"
#include "gc4d/io/json.hpp"
#include "gc4d/io/tensor.hpp"
#include "gc4d/io/trajectory_csv.hpp"
#include "text_util.hpp"

#include <cstdio>

namespace gc4d::io {

namespace fs = std::filesystem;

std::string frame_file(const std::string& stem, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%04d.ct4", frame);
  return stem + buf;
}

void write_dataset(const fs::path& dir, const SequenceDataset& data) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto n = static_cast<std::size_t>(data.n_frames);
  if (data.depths.size() != n || data.pointmaps.size() != n || data.cameras.size() != n ||
      data.attachments.size() != n || data.dynamic_masks.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "dataset arrays disagree with n_frames");
  }
  for (int t = 0; t < data.n_frames; ++t) {
    const auto i = static_cast<std::size_t>(t);
    write_tensor(dir / frame_file("depth", t), depth_to_tensor(data.depths[i]));
    write_tensor(dir / frame_file("pointmap", t), pointmap_to_tensor(data.pointmaps[i]));
    write_tensor(dir / frame_file("dynamic_mask", t), mask_to_tensor(data.dynamic_masks[i]));
    write_tensor(dir / frame_file("attachments", t), attachments_to_tensor(data.attachments[i]));
  }
  detail::write_text(dir / "cameras.json", cameras_to_json(data.cameras));
  write_trajectories(dir / "trajectories.csv", data.trajectories);
  detail::write_text(dir / "queries.csv", encode_queries(data.trajectories.queries));
}

SequenceDataset read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  SequenceDataset data;
  data.cameras = cameras_from_json(detail::read_text(dir / "cameras.json"));
  data.n_frames = static_cast<int>(data.cameras.size());
  if (data.n_frames == 0) throw Error(ErrorCode::MalformedInput, "dataset has no frames");
  for (int t = 0; t < data.n_frames; ++t) {
    data.depths.push_back(depth_from_tensor(read_tensor(dir / frame_file("depth", t))));
    data.pointmaps.push_back(pointmap_from_tensor(read_tensor(dir / frame_file("pointmap", t))));
    data.dynamic_masks.push_back(mask_from_tensor(read_tensor(dir / frame_file("dynamic_mask", t))));
    data.attachments.push_back(
        attachments_from_tensor(read_tensor(dir / frame_file("attachments", t))));
  }
  data.height = data.depths[0].height();
  data.width = data.depths[0].width();
  for (int t = 0; t < data.n_frames; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (!data.depths[i].depth.same_shape(data.height, data.width) ||
        !data.pointmaps[i].points.same_shape(data.height, data.width) ||
        !data.dynamic_masks[i].same_shape(data.height, data.width) ||
        !data.attachments[i].same_shape(data.height, data.width)) {
      throw Error(ErrorCode::ShapeMismatch, "frame " + std::to_string(t) + " has a different resolution");
    }
  }
  if (fs::exists(dir / "trajectories.csv")) {
    data.trajectories = read_trajectories(dir / "trajectories.csv");
    if (data.trajectories.n_tracks > 0 && data.trajectories.n_frames != data.n_frames) {
      throw Error(ErrorCode::ShapeMismatch, "trajectories disagree with the frame count");
    }
  }
  if (fs::exists(dir / "queries.csv")) {
    data.trajectories.queries = decode_queries(detail::read_text(dir / "queries.csv"));
  }
  data.trajectories.validate();
  return data;
}

void write_images(const fs::path& dir, const std::vector<RgbImage>& images) {
  for (std::size_t t = 0; t < images.size(); ++t) {
    write_tensor(dir / frame_file("image", static_cast<int>(t)), image_to_tensor(images[t]));
  }
}

std::vector<RgbImage> read_images(const fs::path& dir) {
  std::vector<RgbImage> out;
  for (int t = 0; fs::exists(dir / frame_file("image", t)); ++t) {
    out.push_back(image_from_tensor(read_tensor(dir / frame_file("image", t))));
  }
  if (out.empty()) throw Error(ErrorCode::IoError, "no image_%04d.ct4 files in " + dir.string());
  return out;
}

}  // namespace gc4d::io
