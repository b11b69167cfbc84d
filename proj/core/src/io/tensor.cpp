#include "gc4d/io/tensor.hpp"

#include "gc4d/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace gc4d::io {

namespace {

constexpr char kMagic[4] = {'C', '4', 'R', 'T'};
constexpr double kNoAttachment = -2.0;

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <class U>
U get_le(std::string_view bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

void require_dims(const Tensor& t, std::size_t ndim, std::uint64_t last, const char* what) {
  const auto& d = t.dims();
  if (d.size() != ndim || (last != 0 && d.back() != last)) {
    throw Error(ErrorCode::ShapeMismatch, std::string("tensor does not hold a ") + what);
  }
}

}  // namespace

std::size_t dtype_size(DType t) noexcept {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U8: return 1;
  }
  return 0;
}

Tensor::Tensor(std::vector<std::uint64_t> dims, Storage data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidArgument, "tensor needs at least one dimension");
  for (auto d : dims_) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "tensor dimensions must be nonzero");
  }
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, data_);
  if (n != numel()) throw Error(ErrorCode::ShapeMismatch, "tensor payload does not match its dims");
}

std::size_t Tensor::numel() const noexcept {
  std::size_t n = dims_.empty() ? 0 : 1;
  for (auto d : dims_) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<double> Tensor::to_f64() const {
  return std::visit(
      [](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, data_);
}

bool Tensor::bitwise_equal(const Tensor& other) const noexcept {
  if (dims_ != other.dims_ || data_.index() != other.data_.index()) return false;
  return std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const auto& w = std::get<V>(other.data_);
        return v.size() == w.size() &&
               (v.empty() || std::memcmp(v.data(), w.data(), v.size() * sizeof(v[0])) == 0);
      },
      data_);
}

std::string encode_tensor(const Tensor& t) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kTensorVersion));
  out.push_back(static_cast<char>(t.dtype()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims().size()));
  for (auto d : t.dims()) put_le<std::uint64_t>(out, d);
  out.reserve(out.size() + t.numel() * dtype_size(t.dtype()));
  std::visit(
      [&](const auto& v) {
        using E = typename std::decay_t<decltype(v)>::value_type;
        for (E x : v) {
          if constexpr (std::is_same_v<E, float>) {
            put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
          } else if constexpr (std::is_same_v<E, double>) {
            put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
          } else {
            out.push_back(static_cast<char>(x));
          }
        }
      },
      t.storage());
  return out;
}

Tensor decode_tensor(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not a C4RT tensor file");
  }
  if (bytes.size() < 10) throw Error(ErrorCode::TruncatedPayload, "tensor header truncated");
  const auto version = static_cast<std::uint8_t>(bytes[4]);
  if (version != kTensorVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "unsupported tensor version " + std::to_string(version));
  }
  const auto code = static_cast<std::uint8_t>(bytes[5]);
  if (code > 2) {
    throw Error(ErrorCode::UnsupportedDtype, "unknown dtype code " + std::to_string(code));
  }
  const auto dtype = static_cast<DType>(code);
  const auto ndim = get_le<std::uint32_t>(bytes, 6);
  std::size_t offset = 10;
  if (ndim == 0) throw Error(ErrorCode::MalformedHeader, "tensor has zero dimensions");
  if ((bytes.size() - offset) / 8 < ndim) {
    throw Error(ErrorCode::TruncatedPayload, "tensor dims truncated");
  }
  std::vector<std::uint64_t> dims(ndim);
  std::uint64_t numel = 1;
  for (auto& d : dims) {
    d = get_le<std::uint64_t>(bytes, offset);
    offset += 8;
    if (d == 0) throw Error(ErrorCode::MalformedHeader, "tensor has a zero dimension");
    if (numel > std::numeric_limits<std::uint64_t>::max() / d) {
      throw Error(ErrorCode::MalformedHeader, "tensor dims overflow");
    }
    numel *= d;
  }
  const std::size_t esize = dtype_size(dtype);
  if ((bytes.size() - offset) / esize < numel) {
    throw Error(ErrorCode::TruncatedPayload, "tensor payload shorter than its dims require");
  }
  if (bytes.size() - offset != numel * esize) {
    throw Error(ErrorCode::MalformedInput, "trailing bytes after tensor payload");
  }
  const auto n = static_cast<std::size_t>(numel);
  switch (dtype) {
    case DType::F32: {
      std::vector<float> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset + 4 * i));
      }
      return Tensor(std::move(dims), std::move(v));
    }
    case DType::F64: {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset + 8 * i));
      }
      return Tensor(std::move(dims), std::move(v));
    }
    case DType::U8: {
      std::vector<std::uint8_t> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>(bytes[offset + i]);
      return Tensor(std::move(dims), std::move(v));
    }
  }
  throw Error(ErrorCode::UnsupportedDtype, "unknown dtype");
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const std::string bytes = encode_tensor(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_tensor(ss.str());
}

Tensor depth_to_tensor(const DepthMap& d) {
  std::vector<double> v(d.depth.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.valid[i] ? d.depth[i] : 0.0;
  return Tensor({static_cast<std::uint64_t>(d.height()), static_cast<std::uint64_t>(d.width())},
                std::move(v));
}

DepthMap depth_from_tensor(const Tensor& t) {
  require_dims(t, 2, 0, "depth map");
  const auto v = t.to_f64();
  DepthMap d(static_cast<int>(t.dims()[0]), static_cast<int>(t.dims()[1]));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]) && v[i] > 0.0) {
      d.depth[i] = v[i];
      d.valid[i] = 1;
    }
  }
  return d;
}

Tensor pointmap_to_tensor(const PointMap& p) {
  std::vector<double> v(3 * p.points.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!p.valid[i]) continue;
    for (int c = 0; c < 3; ++c) v[3 * i + static_cast<std::size_t>(c)] = p.points[i][c];
  }
  return Tensor({static_cast<std::uint64_t>(p.height()), static_cast<std::uint64_t>(p.width()), 3},
                std::move(v));
}

PointMap pointmap_from_tensor(const Tensor& t) {
  require_dims(t, 3, 3, "point map");
  const auto v = t.to_f64();
  PointMap p(static_cast<int>(t.dims()[0]), static_cast<int>(t.dims()[1]));
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    const Vec3 x(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
    if (!x.allFinite()) continue;
    p.points[i] = x;
    p.valid[i] = 1;
  }
  return p;
}

Tensor mask_to_tensor(const Mask& m) {
  return Tensor({static_cast<std::uint64_t>(m.height()), static_cast<std::uint64_t>(m.width())},
                std::vector<std::uint8_t>(m.begin(), m.end()));
}

Mask mask_from_tensor(const Tensor& t) {
  require_dims(t, 2, 0, "mask");
  const auto v = t.to_f64();
  Mask m(static_cast<int>(t.dims()[0]), static_cast<int>(t.dims()[1]), 0);
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] != 0.0 ? 1 : 0;
  return m;
}

Tensor attachments_to_tensor(const AttachmentMap& a) {
  std::vector<double> v(5 * a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double* row = v.data() + 5 * i;
    if (!a[i]) {
      row[0] = kNoAttachment;
      continue;
    }
    row[0] = a[i]->object_id;
    row[1] = a[i]->face_id;
    row[2] = a[i]->bary[0];
    row[3] = a[i]->bary[1];
    row[4] = a[i]->bary[2];
  }
  return Tensor({static_cast<std::uint64_t>(a.height()), static_cast<std::uint64_t>(a.width()), 5},
                std::move(v));
}

AttachmentMap attachments_from_tensor(const Tensor& t) {
  require_dims(t, 3, 5, "attachment map");
  const auto v = t.to_f64();
  AttachmentMap a(static_cast<int>(t.dims()[0]), static_cast<int>(t.dims()[1]), std::nullopt);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double* row = v.data() + 5 * i;
    if (row[0] == kNoAttachment) continue;
    a[i] = SurfaceAttachment{static_cast<int>(row[0]), static_cast<int>(row[1]),
                             Vec3(row[2], row[3], row[4])};
  }
  return a;
}

Tensor image_to_tensor(const RgbImage& img) {
  std::vector<float> v(3 * img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      v[3 * i + static_cast<std::size_t>(c)] = static_cast<float>(img[i][c]);
    }
  }
  return Tensor(
      {static_cast<std::uint64_t>(img.height()), static_cast<std::uint64_t>(img.width()), 3},
      std::move(v));
}

RgbImage image_from_tensor(const Tensor& t) {
  require_dims(t, 3, 3, "RGB image");
  const auto v = t.to_f64();
  RgbImage img(static_cast<int>(t.dims()[0]), static_cast<int>(t.dims()[1]), Vec3::Zero());
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
  return img;
}

}  // namespace gc4d::io
