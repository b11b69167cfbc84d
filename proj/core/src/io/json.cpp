#include "gc4d/io/json.hpp"

#include "gc4d/error.hpp"

#include <json.hpp>

namespace gc4d::io {

using nlohmann::json;

namespace {

Error malformed(const std::string& msg) { return Error(ErrorCode::MalformedInput, msg); }

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw malformed(std::string("invalid JSON: ") + e.what());
  }
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw malformed(std::string("missing key '") + key + "'");
  return obj.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw malformed(std::string(what) + " must be a number");
  return j.get<double>();
}

long long integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw malformed(std::string(what) + " must be an integer");
  return j.get<long long>();
}

std::vector<double> numbers(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw malformed(std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

Vec3 vec3(const json& j, const char* what) {
  const auto v = numbers(j, 3, what);
  return Vec3(v[0], v[1], v[2]);
}

std::vector<Vec3> vertex_list(const json& j) {
  if (!j.is_array()) throw malformed("vertices must be an array");
  std::vector<Vec3> out;
  for (const auto& v : j) out.push_back(vec3(v, "vertex"));
  return out;
}

std::vector<Face> face_list(const json& j) {
  if (!j.is_array()) throw malformed("faces must be an array");
  std::vector<Face> out;
  for (const auto& f : j) {
    if (!f.is_array() || f.size() != 3) throw malformed("face must have three indices");
    out.push_back(Face{static_cast<int>(integer(f[0], "face index")),
                       static_cast<int>(integer(f[1], "face index")),
                       static_cast<int>(integer(f[2], "face index"))});
  }
  return out;
}

CameraParams camera(const json& j) {
  const auto q = numbers(field(j, "q"), 4, "q");
  const Vec3 t = vec3(field(j, "t"), "t");
  const auto fov = numbers(field(j, "fov"), 2, "fov");
  return camera_decode(CameraVector{q[0], q[1], q[2], q[3], t[0], t[1], t[2], fov[0], fov[1]});
}

json camera_json(const CameraParams& c) {
  const auto g = camera_encode(c);
  return json{{"q", {g[0], g[1], g[2], g[3]}}, {"t", {g[4], g[5], g[6]}}, {"fov", {g[7], g[8]}}};
}

TriangleMesh primitive(const json& j) {
  const auto type = field(j, "type").get<std::string>();
  if (type == "box") {
    return make_box(vec3(field(j, "center"), "center"), vec3(field(j, "half_extents"), "half_extents"));
  }
  if (type == "quad" || type == "plane") {
    return make_quad(vec3(field(j, "center"), "center"), vec3(field(j, "axis_u"), "axis_u"),
                     vec3(field(j, "axis_v"), "axis_v"));
  }
  if (type == "mesh") {
    return TriangleMesh{vertex_list(field(j, "vertices")), face_list(field(j, "faces"))};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown primitive type '" + type + "'");
}

SE3 pose(const json& j) {
  const auto q = numbers(field(j, "q"), 4, "q");
  Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (quat.norm() < 1e-12) throw Error(ErrorCode::ZeroQuaternion, "pose quaternion is zero");
  return SE3::from_quaternion(quat.normalized(), vec3(field(j, "t"), "t"));
}

SceneObject object(const json& j, int n_frames, std::size_t index) {
  const std::string name =
      j.contains("name") ? j.at("name").get<std::string>() : "object_" + std::to_string(index);
  if (j.contains("mesh_sequence")) {
    const auto& ms = j.at("mesh_sequence");
    MeshSequence seq;
    for (const auto& frame : field(ms, "vertices")) seq.vertices.push_back(vertex_list(frame));
    seq.faces = face_list(field(ms, "faces"));
    return make_deforming_object(name, std::move(seq));
  }
  const TriangleMesh rest = primitive(field(j, "shape"));
  const json motion = j.contains("motion") ? j.at("motion") : json{{"type", "static"}};
  const auto type = field(motion, "type").get<std::string>();
  std::vector<SE3> poses;
  if (type == "static") {
    poses.assign(static_cast<std::size_t>(n_frames), SE3{});
  } else if (type == "linear") {
    Vec3 pivot = Vec3::Zero();
    if (motion.contains("pivot")) {
      pivot = vec3(motion.at("pivot"), "pivot");
    } else if (!rest.vertices.empty()) {
      for (const auto& v : rest.vertices) pivot += v;
      pivot /= static_cast<double>(rest.vertices.size());
    }
    const Vec3 vel = motion.contains("velocity") ? vec3(motion.at("velocity"), "velocity") : Vec3::Zero();
    const Vec3 omega = motion.contains("angular_velocity")
                           ? vec3(motion.at("angular_velocity"), "angular_velocity")
                           : Vec3::Zero();
    for (int t = 0; t < n_frames; ++t) poses.push_back(constant_velocity_pose(pivot, vel, omega, t));
  } else if (type == "poses") {
    for (const auto& p : field(motion, "poses")) poses.push_back(pose(p));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown motion type '" + type + "'");
  }
  return make_rigid_object(name, rest, std::move(poses));
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw malformed(std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

std::string camera_to_json(const CameraParams& c) { return camera_json(c).dump(); }

CameraParams camera_from_json(std::string_view text) {
  return guarded([&] { return camera(parse(text)); });
}

std::string cameras_to_json(std::span<const CameraParams> cameras) {
  json arr = json::array();
  for (const auto& c : cameras) arr.push_back(camera_json(c));
  return arr.dump(2) + "\n";
}

std::vector<CameraParams> cameras_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    if (!j.is_array()) throw malformed("cameras document must be an array");
    std::vector<CameraParams> out;
    for (const auto& c : j) out.push_back(camera(c));
    return out;
  });
}

SceneSpec scene_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    if (!j.is_object()) throw malformed("scene document must be an object");
    SceneSpec spec;
    if (j.contains("resolution")) {
      const auto& r = j.at("resolution");
      if (!r.is_array() || r.size() != 2) throw malformed("resolution must be [H, W]");
      spec.height = static_cast<int>(integer(r[0], "height"));
      spec.width = static_cast<int>(integer(r[1], "width"));
    }
    spec.n_frames = static_cast<int>(integer(field(j, "n_frames"), "n_frames"));
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw malformed("seed must be a non-negative integer");
      spec.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("n_queries")) spec.n_queries = static_cast<int>(integer(j.at("n_queries"), "n_queries"));
    if (j.contains("dynamic_delta")) spec.dynamic_delta = number(j.at("dynamic_delta"), "dynamic_delta");
    if (spec.n_frames < 1) throw Error(ErrorCode::InvalidArgument, "n_frames must be >= 1");

    if (j.contains("cameras")) {
      for (const auto& c : j.at("cameras")) spec.cameras.push_back(camera(c));
    } else {
      spec.cameras.assign(static_cast<std::size_t>(spec.n_frames), camera(field(j, "camera")));
    }
    if (j.contains("background")) {
      for (const auto& p : j.at("background")) append_mesh(spec.background, primitive(p));
    }
    if (j.contains("objects")) {
      std::size_t k = 0;
      for (const auto& o : j.at("objects")) spec.objects.push_back(object(o, spec.n_frames, k++));
    }
    spec.validate();
    return spec;
  });
}

LossConfig loss_config_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    if (!j.is_object()) throw malformed("loss config must be an object");
    LossConfig cfg;
    if (j.contains("alpha")) cfg.alpha = number(j.at("alpha"), "alpha");
    if (j.contains("beta")) cfg.beta = number(j.at("beta"), "beta");
    if (j.contains("gamma")) cfg.gamma = number(j.at("gamma"), "gamma");
    if (j.contains("lambda")) cfg.lambda = number(j.at("lambda"), "lambda");
    if (j.contains("huber_eps")) cfg.huber_eps = number(j.at("huber_eps"), "huber_eps");
    if (j.contains("dynamic_weight")) cfg.dynamic_weight = number(j.at("dynamic_weight"), "dynamic_weight");
    if (j.contains("grad_term")) cfg.grad_term = j.at("grad_term").get<bool>();
    if (j.contains("weight_mode")) {
      const auto m = j.at("weight_mode").get<std::string>();
      if (m == "focal") cfg.weight_mode = WeightMode::Focal;
      else if (m == "dynamic") cfg.weight_mode = WeightMode::Dynamic;
      else if (m == "none") cfg.weight_mode = WeightMode::None;
      else throw Error(ErrorCode::InvalidArgument, "unknown weight_mode '" + m + "'");
    }
    if (j.contains("repr")) {
      const auto r = j.at("repr").get<std::string>();
      if (r == "endpoint") cfg.repr = AggregationRepr::Endpoint;
      else if (r == "offset") cfg.repr = AggregationRepr::Offset;
      else throw Error(ErrorCode::InvalidArgument, "unknown repr '" + r + "'");
    }
    cfg.validate();
    return cfg;
  });
}

std::string loss_config_to_json(const LossConfig& cfg) {
  const char* mode = cfg.weight_mode == WeightMode::Focal     ? "focal"
                     : cfg.weight_mode == WeightMode::Dynamic ? "dynamic"
                                                              : "none";
  const json j{{"alpha", cfg.alpha},         {"beta", cfg.beta},
               {"gamma", cfg.gamma},         {"lambda", cfg.lambda},
               {"huber_eps", cfg.huber_eps}, {"dynamic_weight", cfg.dynamic_weight},
               {"grad_term", cfg.grad_term}, {"weight_mode", mode},
               {"repr", cfg.repr == AggregationRepr::Endpoint ? "endpoint" : "offset"}};
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    if (!j.is_object()) throw malformed("model config must be an object");
    ModelConfig cfg;
    auto get_int = [&](const char* key, int& dst) {
      if (j.contains(key)) dst = static_cast<int>(integer(j.at(key), key));
    };
    get_int("dim", cfg.dim);
    get_int("n_heads", cfg.n_heads);
    get_int("n_layers", cfg.n_layers);
    get_int("patch", cfg.patch);
    get_int("n_agg_tokens", cfg.n_agg_tokens);
    get_int("n_reg_tokens", cfg.n_reg_tokens);
    get_int("n_cam_tokens", cfg.n_cam_tokens);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fusion")) {
      const auto f = j.at("fusion").get<std::string>();
      if (f == "concat") cfg.fusion = Fusion::Concatenate;
      else if (f == "add") cfg.fusion = Fusion::Add;
      else throw Error(ErrorCode::InvalidArgument, "unknown fusion '" + f + "'");
    }
    cfg.validate();
    return cfg;
  });
}

std::string model_config_to_json(const ModelConfig& cfg) {
  const json j{{"dim", cfg.dim},
               {"n_heads", cfg.n_heads},
               {"n_layers", cfg.n_layers},
               {"patch", cfg.patch},
               {"n_agg_tokens", cfg.n_agg_tokens},
               {"n_reg_tokens", cfg.n_reg_tokens},
               {"n_cam_tokens", cfg.n_cam_tokens},
               {"fusion", cfg.fusion == Fusion::Concatenate ? "concat" : "add"},
               {"seed", cfg.seed}};
  return j.dump();
}

}  // namespace gc4d::io
