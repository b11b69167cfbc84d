#include "gc4d/io/ply.hpp"

#include "gc4d/error.hpp"
#include "text_util.hpp"

#include <array>
#include <optional>

namespace gc4d::io {

using detail::format_number;

std::string encode_ply(const PointCloud& points, const std::vector<Vec3>* normals) {
  if (normals && normals->size() != points.size()) {
    throw Error(ErrorCode::ShapeMismatch, "normals must match points one to one");
  }
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(points.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n";
  if (normals) out += "property float nx\nproperty float ny\nproperty float nz\n";
  out += "end_header\n";
  auto put = [&](const Vec3& v) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(v[c])) throw Error(ErrorCode::InvalidArgument, "non-finite PLY value");
      if (c > 0) out += ' ';
      out += format_number(static_cast<float>(v[c]));
    }
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    put(points[i]);
    if (normals) {
      out += ' ';
      put((*normals)[i]);
    }
    out += '\n';
  }
  return out;
}

PlyData decode_ply(std::string_view text) {
  auto lines = detail::split(text, '\n');
  std::size_t li = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (li >= lines.size()) return std::nullopt;
    return detail::trim(lines[li++]);
  };
  auto bad = [](const std::string& msg) { return Error(ErrorCode::MalformedHeader, msg); };

  if (next_line() != std::string_view("ply")) throw bad("missing 'ply' signature");
  if (next_line() != std::string_view("format ascii 1.0")) throw bad("only ASCII PLY 1.0 is supported");

  long long n_vertices = -1;
  std::vector<std::string> props;
  bool in_vertex = false;
  bool saw_end = false;
  while (auto line = next_line()) {
    auto tok = detail::split_ws(*line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") {
      saw_end = true;
      break;
    }
    if (tok[0] == "element") {
      if (tok.size() != 3) throw bad("malformed element line");
      if (tok[1] != "vertex") throw bad("unsupported element '" + std::string(tok[1]) + "'");
      if (n_vertices >= 0) throw bad("duplicate vertex element");
      if (!detail::parse_int(tok[2], n_vertices) || n_vertices < 0) throw bad("bad vertex count");
      in_vertex = true;
      continue;
    }
    if (tok[0] == "property") {
      if (!in_vertex) throw bad("property before element");
      if (tok.size() != 3) throw bad("unsupported property line");
      if (tok[1] != "float" && tok[1] != "float32" && tok[1] != "double" && tok[1] != "float64") {
        throw bad("unsupported property type '" + std::string(tok[1]) + "'");
      }
      props.emplace_back(tok[2]);
      continue;
    }
    throw bad("unexpected header line '" + std::string(*line) + "'");
  }
  if (!saw_end) throw bad("missing end_header");
  if (n_vertices < 0) throw bad("missing vertex element");

  auto find = [&](const char* name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const std::array<int, 3> xyz{find("x"), find("y"), find("z")};
  const std::array<int, 3> nxyz{find("nx"), find("ny"), find("nz")};
  if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0) throw bad("missing x/y/z properties");
  const bool has_normals = nxyz[0] >= 0 && nxyz[1] >= 0 && nxyz[2] >= 0;

  PlyData out;
  out.points.reserve(static_cast<std::size_t>(n_vertices));
  for (long long k = 0; k < n_vertices; ++k) {
    auto line = next_line();
    if (!line) throw Error(ErrorCode::MalformedInput, "PLY has fewer rows than declared");
    auto tok = detail::split_ws(*line);
    if (tok.size() != props.size()) throw Error(ErrorCode::MalformedInput, "PLY row has wrong arity");
    std::vector<double> vals(tok.size());
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (!detail::parse_number(tok[i], vals[i])) {
        throw Error(ErrorCode::MalformedInput, "PLY row has a non-numeric value");
      }
    }
    out.points.emplace_back(vals[static_cast<std::size_t>(xyz[0])], vals[static_cast<std::size_t>(xyz[1])],
                            vals[static_cast<std::size_t>(xyz[2])]);
    if (has_normals) {
      out.normals.emplace_back(vals[static_cast<std::size_t>(nxyz[0])], vals[static_cast<std::size_t>(nxyz[1])],
                               vals[static_cast<std::size_t>(nxyz[2])]);
    }
  }
  while (auto line = next_line()) {
    if (!line->empty()) throw Error(ErrorCode::MalformedInput, "PLY has more rows than declared");
  }
  return out;
}

void write_ply(const std::filesystem::path& path, const PointCloud& points,
               const std::vector<Vec3>* normals) {
  detail::write_text(path, encode_ply(points, normals));
}

PlyData read_ply(const std::filesystem::path& path) { return decode_ply(detail::read_text(path)); }

}  // namespace gc4d::io
