#include "gc4d/io/trajectory_csv.hpp"

#include "gc4d/error.hpp"
#include "text_util.hpp"

#include <cmath>

namespace gc4d::io {

namespace {

Error malformed(const std::string& msg) { return Error(ErrorCode::MalformedInput, msg); }

std::vector<std::vector<std::string_view>> rows_after_header(std::string_view text,
                                                             std::string_view header,
                                                             std::size_t arity) {
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::trim(lines[0]) != header) {
    throw malformed("expected CSV header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    if (cells.size() != arity) throw malformed("CSV line " + std::to_string(i + 1) + " has wrong arity");
    rows.push_back(std::move(cells));
  }
  return rows;
}

long long int_cell(std::string_view s) {
  long long v = 0;
  if (!detail::parse_int(s, v)) throw malformed("bad integer '" + std::string(s) + "'");
  return v;
}

double num_cell(std::string_view s) {
  double v = 0;
  if (detail::parse_number(s, v)) return v;
  const auto t = detail::trim(s);
  if (t == "nan" || t == "-nan") return std::nan("");
  throw malformed("bad number '" + std::string(s) + "'");
}

}  // namespace

std::string encode_trajectories(const TrajectorySet& tracks) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (int m = 0; m < tracks.n_tracks; ++m) {
    for (int t = 0; t < tracks.n_frames; ++t) {
      const auto i = tracks.index(m, t);
      const Vec3& p = tracks.positions[i];
      out += std::to_string(m) + ',' + std::to_string(t);
      for (int c = 0; c < 3; ++c) out += ',' + detail::format_number(p[c]);
      out += tracks.visible[i] ? ",1" : ",0";
      out += tracks.dynamic.empty() || !tracks.dynamic[static_cast<std::size_t>(m)] ? ",0\n" : ",1\n";
    }
  }
  return out;
}

TrajectorySet decode_trajectories(std::string_view text) {
  const auto rows = rows_after_header(text, kTrajectoryHeader, 7);
  long long max_track = -1;
  long long max_frame = -1;
  for (const auto& r : rows) {
    const auto m = int_cell(r[0]);
    const auto t = int_cell(r[1]);
    if (m < 0 || t < 0) throw malformed("negative track or frame index");
    max_track = std::max(max_track, m);
    max_frame = std::max(max_frame, t);
  }
  if (rows.empty()) return TrajectorySet(0, 0);
  const auto n_tracks = static_cast<int>(max_track + 1);
  const auto n_frames = static_cast<int>(max_frame + 1);
  if (rows.size() != static_cast<std::size_t>(n_tracks) * static_cast<std::size_t>(n_frames)) {
    throw malformed("trajectory rows do not form a complete track × frame grid");
  }
  TrajectorySet out(n_tracks, n_frames);
  std::vector<unsigned char> seen(rows.size(), 0);
  std::vector<int> dyn(static_cast<std::size_t>(n_tracks), -1);
  for (const auto& r : rows) {
    const int m = static_cast<int>(int_cell(r[0]));
    const int t = static_cast<int>(int_cell(r[1]));
    const auto i = out.index(m, t);
    if (seen[i]) throw malformed("duplicate trajectory row");
    seen[i] = 1;
    const auto vis = int_cell(r[5]);
    const auto d = int_cell(r[6]);
    if ((vis != 0 && vis != 1) || (d != 0 && d != 1)) throw malformed("flags must be 0 or 1");
    out.positions[i] = Vec3(num_cell(r[2]), num_cell(r[3]), num_cell(r[4]));
    out.visible[i] = static_cast<unsigned char>(vis);
    if (vis && !out.positions[i].allFinite()) throw malformed("visible sample has non-finite coordinates");
    auto& dm = dyn[static_cast<std::size_t>(m)];
    if (dm >= 0 && dm != d) throw malformed("dynamic flag varies within a track");
    dm = static_cast<int>(d);
  }
  for (int m = 0; m < n_tracks; ++m) {
    out.dynamic[static_cast<std::size_t>(m)] = static_cast<unsigned char>(dyn[static_cast<std::size_t>(m)]);
  }
  return out;
}

std::string encode_queries(std::span<const Pixel> queries) {
  std::string out(kQueryHeader);
  out += '\n';
  for (std::size_t m = 0; m < queries.size(); ++m) {
    out += std::to_string(m) + ',' + std::to_string(queries[m].u) + ',' +
           std::to_string(queries[m].v) + '\n';
  }
  return out;
}

std::vector<Pixel> decode_queries(std::string_view text) {
  const auto rows = rows_after_header(text, kQueryHeader, 3);
  std::vector<Pixel> out(rows.size());
  std::vector<unsigned char> seen(rows.size(), 0);
  for (const auto& r : rows) {
    const auto m = int_cell(r[0]);
    if (m < 0 || static_cast<std::size_t>(m) >= rows.size() || seen[static_cast<std::size_t>(m)]) {
      throw malformed("query ids must be a permutation of 0..M-1");
    }
    seen[static_cast<std::size_t>(m)] = 1;
    out[static_cast<std::size_t>(m)] = Pixel{static_cast<int>(int_cell(r[1])), static_cast<int>(int_cell(r[2]))};
  }
  return out;
}

void write_trajectories(const std::filesystem::path& path, const TrajectorySet& tracks) {
  detail::write_text(path, encode_trajectories(tracks));
}

TrajectorySet read_trajectories(const std::filesystem::path& path) {
  return decode_trajectories(detail::read_text(path));
}

}  // namespace gc4d::io
