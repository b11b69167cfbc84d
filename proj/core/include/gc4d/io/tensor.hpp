#pragma once

#include "gc4d/agg_former.hpp"
#include "gc4d/camera.hpp"
#include "gc4d/grid.hpp"
#include "gc4d/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gc4d::io {

/// On-disk layout (little-endian):
///   "C4RT" | version u8 = 1 | dtype u8 | ndim u32 | dims u64 × ndim | payload
/// with a row-major payload of product(dims) elements.
enum class DType : std::uint8_t { F32 = 0, F64 = 1, U8 = 2 };

inline constexpr std::uint8_t kTensorVersion = 1;

std::size_t dtype_size(DType t) noexcept;

class Tensor {
 public:
  using Storage = std::variant<std::vector<float>, std::vector<double>, std::vector<std::uint8_t>>;

  Tensor() = default;
  Tensor(std::vector<std::uint64_t> dims, Storage data);

  DType dtype() const noexcept { return static_cast<DType>(data_.index()); }
  const std::vector<std::uint64_t>& dims() const noexcept { return dims_; }
  std::size_t numel() const noexcept;
  const Storage& storage() const noexcept { return data_; }

  template <class T>
  const std::vector<T>& values() const { return std::get<std::vector<T>>(data_); }

  /// Every element widened to double.
  std::vector<double> to_f64() const;

  /// Bitwise comparison of dtype, dims and payload.
  bool bitwise_equal(const Tensor& other) const noexcept;

 private:
  std::vector<std::uint64_t> dims_;
  Storage data_;
};

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

// Conversions for the dataset directory layout.
Tensor depth_to_tensor(const DepthMap& d);          // H×W f64, invalid stored as 0
DepthMap depth_from_tensor(const Tensor& t);        // valid iff finite and > 0
Tensor pointmap_to_tensor(const PointMap& p);       // H×W×3 f64, invalid stored as NaN
PointMap pointmap_from_tensor(const Tensor& t);
Tensor mask_to_tensor(const Mask& m);               // H×W u8
Mask mask_from_tensor(const Tensor& t);
Tensor attachments_to_tensor(const AttachmentMap& a);  // H×W×5 f64: object, face, b0, b1, b2
AttachmentMap attachments_from_tensor(const Tensor& t);  // object id -2 marks "none"
Tensor image_to_tensor(const RgbImage& img);        // H×W×3 f32
RgbImage image_from_tensor(const Tensor& t);

}  // namespace gc4d::io
