#include "semmatch/tensor_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace semmatch {
namespace {

static_assert(std::endian::native == std::endian::little,
              "SRMT codec assumes a little-endian host");

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  void Copy(void* dst, std::size_t n) {
    Need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kFormat, "SRMT blob truncated");
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> EncodeTensor(const TensorF& tensor) {
  std::vector<std::uint8_t> out(kSrmtMagic, kSrmtMagic + 4);
  PutU32(out, kSrmtVersion);
  PutU32(out, static_cast<std::uint32_t>(tensor.rank()));
  for (int d : tensor.shape()) PutU32(out, static_cast<std::uint32_t>(d));
  PutU32(out, kSrmtFloat32);
  const std::size_t payload = tensor.size() * sizeof(float);
  const std::size_t header = out.size();
  out.resize(header + payload);
  if (payload > 0) std::memcpy(out.data() + header, tensor.data(), payload);
  return out;
}

TensorF DecodeTensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kSrmtMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "bad SRMT magic");
  }
  Reader reader(bytes);
  std::uint32_t magic_word = reader.U32();
  (void)magic_word;
  const std::uint32_t version = reader.U32();
  if (version != kSrmtVersion) {
    throw Error(ErrorCode::kFormat, "unsupported SRMT version " + std::to_string(version));
  }
  const std::uint32_t ndim = reader.U32();
  if (ndim > 16) throw Error(ErrorCode::kFormat, "implausible SRMT rank");
  std::vector<int> shape(ndim);
  for (auto& d : shape) {
    const std::uint32_t v = reader.U32();
    if (v > (1u << 30)) throw Error(ErrorCode::kFormat, "implausible SRMT dimension");
    d = static_cast<int>(v);
  }
  const std::uint32_t dtype = reader.U32();
  if (dtype != kSrmtFloat32) {
    throw Error(ErrorCode::kFormat, "unsupported SRMT dtype " + std::to_string(dtype));
  }
  const std::size_t count = ShapeProduct(shape);
  if (reader.remaining() != count * sizeof(float)) {
    throw Error(ErrorCode::kFormat, "SRMT payload size does not match shape " +
                                        ShapeToString(shape));
  }
  std::vector<float> data(count);
  if (count > 0) reader.Copy(data.data(), count * sizeof(float));
  return TensorF(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path + "'");
}

void WriteTensorFile(const std::string& path, const TensorF& tensor) {
  WriteFileBytes(path, EncodeTensor(tensor));
}

TensorF ReadTensorFile(const std::string& path) {
  return DecodeTensor(ReadFileBytes(path));
}

}  // namespace semmatch
