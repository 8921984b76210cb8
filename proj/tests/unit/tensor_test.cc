#include <cstring>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "semmatch/error.h"
#include "semmatch/tensor.h"
#include "semmatch/tensor_io.h"

namespace semmatch {
namespace {

TEST(Tensor, ShapeProductMatchesData) {
  TensorF t({2, 3, 4}, 1.5f);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(ShapeProduct(t.shape()), t.size());
  EXPECT_THROW(TensorF({2, 2}, std::vector<float>{1, 2, 3}), Error);
}

TEST(Tensor, RowMajorAccess) {
  TensorF t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.at(1, 0), 4.0f);
  EXPECT_EQ(t.at(0, 2), 3.0f);
  EXPECT_TRUE(t.AllFinite());
  t.at(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(t.AllFinite());
}

TEST(TensorIo, RoundTripIsBitExact) {
  TensorF t({3, 2, 2});
  const float specials[] = {0.0f, -0.0f, 1e-40f, -3.5f, 1e30f, 0.1f};
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = specials[i % 6] * static_cast<float>(i + 1);
  const std::vector<std::uint8_t> bytes = EncodeTensor(t);
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 3 * 4 + 4 + t.size() * 4);
  const TensorF back = DecodeTensor(bytes);
  ASSERT_EQ(back.shape(), t.shape());
  EXPECT_EQ(std::memcmp(back.data(), t.data(), t.size() * sizeof(float)), 0);
  EXPECT_EQ(EncodeTensor(back), bytes);
}

TEST(TensorIo, HeaderLayout) {
  const std::vector<std::uint8_t> bytes = EncodeTensor(TensorF({2}, std::vector<float>{1.0f, -2.0f}));
  const std::vector<std::uint8_t> expected = {
      'S', 'R', 'M', 'T', 1, 0, 0, 0,  // magic, version
      1, 0, 0, 0, 2, 0, 0, 0,          // ndim, dims
      1, 0, 0, 0,                      // dtype f32
      0x00, 0x00, 0x80, 0x3f,          // 1.0f
      0x00, 0x00, 0x00, 0xc0};         // -2.0f
  EXPECT_EQ(bytes, expected);
}

TEST(TensorIo, RejectsCorruptBlobs) {
  std::vector<std::uint8_t> good = EncodeTensor(TensorF({2, 2}, 1.0f));
  auto expect_format = [](std::vector<std::uint8_t> b) {
    try {
      DecodeTensor(b);
      FAIL() << "decoded a corrupt blob";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormat);
    }
  };
  auto bad_magic = good;
  bad_magic[0] = 'X';
  expect_format(bad_magic);
  auto bad_version = good;
  bad_version[4] = 2;
  expect_format(bad_version);
  auto bad_dtype = good;
  bad_dtype[20] = 2;
  expect_format(bad_dtype);
  auto truncated = good;
  truncated.pop_back();
  expect_format(truncated);
  auto trailing = good;
  trailing.push_back(0);
  expect_format(trailing);
}

// tests/data/golden_2x2x3.srmt is produced independently (Python struct) by
// tests/data/make_golden.py.
TEST(TensorIo, GoldenVector) {
  const std::string path = std::string(SEMMATCH_TEST_DATA_DIR) + "/golden_2x2x3.srmt";
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  const TensorF t = DecodeTensor(bytes);
  ASSERT_EQ(t.shape(), (std::vector<int>{2, 2, 3}));
  const float expected[] = {0.0f, 1.0f, -1.0f, 0.5f, 3.25f, -1024.0f,
                            1.0e-3f, 65504.0f, -0.0f, 0.1f, 2.5e-39f, 7.0f};
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(std::memcmp(&t[i], &expected[i], sizeof(float)), 0) << "element " << i;
  }
  EXPECT_EQ(EncodeTensor(t), bytes);
}

TEST(TensorIo, FileRoundTrip) {
  const std::string path = ::testing::TempDir() + "/roundtrip.srmt";
  TensorF t({4, 5});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i) * 0.37f - 2.0f;
  WriteTensorFile(path, t);
  EXPECT_EQ(ReadTensorFile(path), t);
  EXPECT_THROW(ReadTensorFile(path + ".missing"), Error);
}

}  // namespace
}  // namespace semmatch
