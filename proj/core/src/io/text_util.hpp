#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gc4d::io::detail {

/// Shortest round-trip decimal form.
template <class F>
std::string format_number(F value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool parse_number(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace gc4d::io::detail
