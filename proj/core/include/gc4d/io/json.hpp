#pragma once

#include "gc4d/agg_former.hpp"
#include "gc4d/camera.hpp"
#include "gc4d/losses.hpp"
#include "gc4d/scene.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gc4d::io {

/// {"q": [w, x, y, z], "t": [x, y, z], "fov": [v, h]}, quaternion in canonical sign.
std::string camera_to_json(const CameraParams& c);
CameraParams camera_from_json(std::string_view text);

/// JSON array of camera objects, one per frame.
std::string cameras_to_json(std::span<const CameraParams> cameras);
std::vector<CameraParams> cameras_from_json(std::string_view text);

/// Scene document. Top-level keys:
///   resolution [H, W], n_frames, seed, n_queries, dynamic_delta,
///   camera (one camera for every frame) or cameras (one per frame),
///   background: [primitive...], objects: [{name, shape, motion} | {name, mesh_sequence}].
/// Primitives: {"type":"box","center","half_extents"}, {"type":"quad"|"plane","center",
/// "axis_u","axis_v"}, {"type":"mesh","vertices","faces"}.
/// Motions: {"type":"static"}, {"type":"linear","velocity","angular_velocity","pivot"?}
/// (per-frame rates, pivot defaults to the vertex centroid), {"type":"poses","poses":[{"q","t"}...]}.
/// mesh_sequence: {"vertices": [[[x,y,z]...] per frame], "faces": [[a,b,c]...]}.
SceneSpec scene_from_json(std::string_view text);

LossConfig loss_config_from_json(std::string_view text);
std::string loss_config_to_json(const LossConfig& cfg);

ModelConfig model_config_from_json(std::string_view text);
std::string model_config_to_json(const ModelConfig& cfg);

}  // namespace gc4d::io
