#ifndef SEMMATCH_TENSOR_IO_H_
#define SEMMATCH_TENSOR_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "semmatch/tensor.h"

namespace semmatch {

// SRMT blob layout, all integers little-endian:
//   char[4]   magic "SRMT"
//   uint32    version (1)
//   uint32    ndim
//   uint32    dims[ndim]
//   uint32    dtype (1 = float32)
//   float32   payload[prod(dims)], row-major
inline constexpr char kSrmtMagic[4] = {'S', 'R', 'M', 'T'};
inline constexpr std::uint32_t kSrmtVersion = 1;
inline constexpr std::uint32_t kSrmtFloat32 = 1;

std::vector<std::uint8_t> EncodeTensor(const TensorF& tensor);
TensorF DecodeTensor(const std::vector<std::uint8_t>& bytes);

void WriteTensorFile(const std::string& path, const TensorF& tensor);
TensorF ReadTensorFile(const std::string& path);

std::vector<std::uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace semmatch

#endif  // SEMMATCH_TENSOR_IO_H_
