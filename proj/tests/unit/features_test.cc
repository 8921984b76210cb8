#include <cmath>
#include <cstdio>
#include <string>

#include <gtest/gtest.h>

#include "semmatch/backbone.h"
#include "semmatch/error.h"
#include "semmatch/feature_map.h"
#include "semmatch/image.h"
#include "semmatch/param_store.h"
#include "semmatch/semantic.h"
#include "semmatch/synth.h"
#include "semmatch/tensor_io.h"

namespace semmatch {
namespace {

std::string Netpbm(const std::string& magic, int w, int h, const std::string& raster,
                   int maxval = 255) {
  return magic + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
         std::to_string(maxval) + "\n" + raster;
}

Image Crop(const Image& src, int x0, int y0, int w, int h) {
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = src.at(x0 + x, y0 + y);
  }
  return out;
}

ParamStore<float> BackboneParams(const BackboneConfig& config) {
  ParamStore<float> store;
  AddBackboneParams(config, 3, store);
  return store;
}

TEST(Image, PgmScaling) {
  const std::string raster = {char(0), char(255), char(128), char(64)};
  const Image img = DecodeNetpbm(Netpbm("P5", 2, 2, raster));
  EXPECT_EQ(img.original_width, 2);
  EXPECT_EQ(img.original_height, 2);
  EXPECT_FLOAT_EQ(img.at(0, 0), 0.0f);
  EXPECT_FLOAT_EQ(img.at(1, 0), 1.0f);
  EXPECT_NEAR(img.at(0, 1), 0.50196f, 1e-5);
  EXPECT_NEAR(img.at(1, 1), 0.25098f, 1e-5);
}

TEST(Image, PpmLuma) {
  const std::string raster = {char(255), char(0), char(0)};
  const Image img = DecodeNetpbm(Netpbm("P6", 1, 1, raster));
  EXPECT_NEAR(img.at(0, 0), 0.299f, 1e-6);
}

TEST(Image, PadsToMultipleOfEight) {
  const Image img = DecodeNetpbm(Netpbm("P5", 10, 10, std::string(100, char(200))));
  EXPECT_EQ(img.width, 16);
  EXPECT_EQ(img.height, 16);
  EXPECT_EQ(img.original_width, 10);
  EXPECT_EQ(img.original_height, 10);
  EXPECT_EQ(img.at(12, 3), 0.0f);
  EXPECT_EQ(img.at(3, 12), 0.0f);
  EXPECT_NEAR(img.at(9, 9), 200.0f / 255.0f, 1e-6);
  for (float v : img.pixels) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Image, MalformedHeaders) {
  auto code = [](const std::string& bytes) {
    try {
      DecodeNetpbm(bytes);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kContract;
  };
  EXPECT_EQ(code("P2\n1 1\n255\n0"), ErrorCode::kFormat);
  EXPECT_EQ(code(Netpbm("P5", 2, 2, "ab")), ErrorCode::kFormat);
  EXPECT_EQ(code(Netpbm("P5", 1, 1, std::string(2, 'a'), 65535)), ErrorCode::kFormat);
  EXPECT_EQ(code("P5\nx 1\n255\n"), ErrorCode::kFormat);
}

TEST(Image, SaveLoadRoundTrip) {
  Image img(9, 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) img.at(x, y) = static_cast<float>((x * 7 + y * 13) % 256) / 255.0f;
  }
  const std::string path = ::testing::TempDir() + "/roundtrip.pgm";
  SavePgm(path, img);
  const Image back = LoadImage(path);
  EXPECT_EQ(back.original_width, 9);
  EXPECT_EQ(back.original_height, 7);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) EXPECT_NEAR(back.at(x, y), img.at(x, y), 1e-6);
  }
}

TEST(Backbone, ScaleArithmetic) {
  const BackboneConfig config;
  const ParamStore<float> params = BackboneParams(config);
  for (auto [w, h] : {std::pair{64, 64}, std::pair{80, 48}}) {
    const auto [coarse, fine] = ExtractPyramid(ProceduralImage(1, w, h), params, config);
    EXPECT_EQ(coarse.height * 8, h);
    EXPECT_EQ(coarse.width * 8, w);
    EXPECT_EQ(fine.height * 2, h);
    EXPECT_EQ(fine.width * 2, w);
    EXPECT_EQ(coarse.channels, config.coarse_channels);
    EXPECT_EQ(fine.channels, config.fine_channels);
    EXPECT_EQ(GridSize(w, 1.0 / 8), coarse.width);
  }
}

TEST(Backbone, ConstantImageGivesConstantInterior) {
  const BackboneConfig config;
  const auto [coarse, fine] = ExtractPyramid(Image(64, 64, 0.6f), BackboneParams(config), config);
  const float* ref = coarse.cell(3 * 8 + 3);
  for (int y = 2; y < 6; ++y) {
    for (int x = 2; x < 6; ++x) {
      const float* c = coarse.cell(y * 8 + x);
      for (int k = 0; k < coarse.channels; ++k) EXPECT_NEAR(c[k], ref[k], 1e-5);
    }
  }
}

TEST(Backbone, ShiftByEightPixelsShiftsOneCoarseCell) {
  const BackboneConfig config;
  const ParamStore<float> params = BackboneParams(config);
  const Image wide = ProceduralImage(5, 80, 64);
  const auto [c0, f0] = ExtractPyramid(Crop(wide, 0, 0, 64, 64), params, config);
  const auto [c1, f1] = ExtractPyramid(Crop(wide, 8, 0, 64, 64), params, config);
  for (int y = 2; y < 6; ++y) {
    for (int x = 1; x < 6; ++x) {
      const float* a = c1.cell(y * 8 + x);
      const float* b = c0.cell(y * 8 + x + 1);
      for (int k = 0; k < c0.channels; ++k) ASSERT_NEAR(a[k], b[k], 1e-4);
    }
  }
  for (int y = 4; y < 28; ++y) {
    for (int x = 2; x < 26; ++x) {
      const float* a = f1.cell(y * 32 + x);
      const float* b = f0.cell(y * 32 + x + 4);
      for (int k = 0; k < f0.channels; ++k) ASSERT_NEAR(a[k], b[k], 1e-4);
    }
  }
}

TEST(Backbone, PaddedCellsAreMasked) {
  const BackboneConfig config;
  Image img = PadToMultiple(Crop(ProceduralImage(2, 64, 64), 0, 0, 50, 40));
  ASSERT_EQ(img.width, 56);
  ASSERT_EQ(img.height, 40);
  const auto [coarse, fine] = ExtractPyramid(img, BackboneParams(config), config);
  ASSERT_EQ(coarse.valid.size(), static_cast<std::size_t>(coarse.num_cells()));
  // Cell k at stride 8 represents pixel 8k; column 6 starts at pixel 48 < 50.
  EXPECT_TRUE(coarse.valid[6]);
  for (float v : coarse.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(ToySemantic, ConstantPatchDescriptor) {
  const Image img(8, 8, 0.4f);
  const auto d = ToyPatchDescriptor(img, 0, 0);
  const int bin = static_cast<int>(0.4f * kToyHistogramBins);
  for (int b = 0; b < kToyHistogramBins; ++b) EXPECT_FLOAT_EQ(d[b], b == bin ? 1.0f : 0.0f);
  // Orthonormal DC basis value is 1/8 per pixel pair, so DC = 64 * 0.4 / 8.
  EXPECT_NEAR(d[kToyHistogramBins], 3.2f, 1e-5);
  for (int k = 1; k < kToyDctCoefficients; ++k) EXPECT_NEAR(d[kToyHistogramBins + k], 0.0f, 1e-6);
}

TEST(ToySemantic, IdenticalPatchesGiveIdenticalDescriptors) {
  const Image patch = ProceduralImage(9, 8, 8);
  Image img(32, 24, 0.2f);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      img.at(x + 8, y) = patch.at(x, y);
      img.at(x + 24, y + 16) = patch.at(x, y);
    }
  }
  const ToySemanticProvider provider;
  const FeatureMap s = provider.Extract(img, "a");
  ASSERT_EQ(s.height, 3);
  ASSERT_EQ(s.width, 4);
  ASSERT_EQ(s.channels, kDefaultSemanticChannels);
  for (int c = 0; c < s.channels; ++c) EXPECT_EQ(s.cell(1)[c], s.cell(2 * 4 + 3)[c]);
}

TEST(ToySemantic, BrightnessShiftKeepsShape) {
  const ToySemanticProvider provider;
  Image img = ProceduralImage(4, 32, 32);
  const FeatureMap a = provider.Extract(img, "a");
  for (float& v : img.pixels) v = std::min(1.0f, v + 0.1f);
  const FeatureMap b = provider.Extract(img, "a");
  EXPECT_EQ(a.height, b.height);
  EXPECT_EQ(a.width, b.width);
  EXPECT_EQ(a.channels, b.channels);
  EXPECT_NE(a.values, b.values);
}

TEST(ToySemantic, RepeatedExtractionIsBitIdentical) {
  const ToySemanticProvider provider;
  const Image img = ProceduralImage(6, 48, 40);
  const FeatureMap first = provider.Extract(img, "x");
  for (int i = 0; i < 100; ++i) {
    const FeatureMap again = provider.Extract(img, "x");
    ASSERT_EQ(again.values, first.values);
    ASSERT_EQ(again.valid, first.valid);
  }
  EXPECT_EQ(ToySemanticProvider().projection(), provider.projection());
}

TEST(FileSemantic, RoundTripAndErrors) {
  const std::string dir = ::testing::TempDir();
  TensorF blob({16, 16, 5});
  for (std::size_t i = 0; i < blob.size(); ++i) blob[i] = std::sin(0.37f * i);
  WriteTensorFile(dir + "/pair_a.srmt", blob);
  const FeatureMap s = SemanticFromFile(dir, "pair_a");
  EXPECT_EQ(s.height, 16);
  EXPECT_EQ(s.width, 16);
  EXPECT_EQ(s.channels, 5);
  EXPECT_EQ(s.values, std::vector<float>(blob.values().begin(), blob.values().end()));

  const FileSemanticProvider provider(dir, 5);
  EXPECT_EQ(provider.Extract(Image(8, 8), "pair_a").values, s.values);
  EXPECT_THROW(FileSemanticProvider(dir, 6).Extract(Image(8, 8), "pair_a"), Error);
  EXPECT_THROW(SemanticFromFile(dir, "missing"), Error);

  std::vector<std::uint8_t> bytes = EncodeTensor(blob);
  bytes[1] = 'X';
  WriteFileBytes(dir + "/bad_magic.srmt", bytes);
  try {
    SemanticFromFile(dir, "bad_magic");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
  WriteTensorFile(dir + "/flat.srmt", TensorF({4, 5}));
  EXPECT_THROW(SemanticFromFile(dir, "flat"), Error);
}

FeatureMap MapFrom(int h, int w, int c, const std::vector<float>& values) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.origin = FeatureOrigin::kSemantic;
  m.values = values;
  m.valid.assign(static_cast<std::size_t>(h) * w, 1);
  return m;
}

TEST(ResizeSemantic, IdentityResampling) {
  std::vector<float> v(3 * 4 * 2);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1f * i;
  const FeatureMap m = MapFrom(3, 4, 2, v);
  EXPECT_EQ(ResizeBilinear(m, 3, 4).values, v);
}

TEST(ResizeSemantic, TwoByTwoToFourByFour) {
  const FeatureMap m = MapFrom(2, 2, 1, {0.0f, 3.0f, 6.0f, 9.0f});
  const FeatureMap r = ResizeBilinear(m, 4, 4);
  // Half-pixel centres: target t samples source (t + 0.5) / 2 - 0.5, clamped.
  const double coord[] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double fx = coord[x], fy = coord[y];
      const double expected = 0.0 * (1 - fx) * (1 - fy) + 3.0 * fx * (1 - fy) +
                              6.0 * (1 - fx) * fy + 9.0 * fx * fy;
      EXPECT_NEAR(r.cell(y * 4 + x)[0], expected, 1e-5);
    }
  }
  EXPECT_EQ(r.cell(0)[0], 0.0f);
  EXPECT_EQ(r.cell(3)[0], 3.0f);
  EXPECT_EQ(r.cell(12)[0], 6.0f);
  EXPECT_EQ(r.cell(15)[0], 9.0f);
}

TEST(ResizeSemantic, ConstantMapStaysConstant) {
  const FeatureMap m = MapFrom(3, 5, 2, std::vector<float>(30, 1.25f));
  for (auto [h, w] : {std::pair{1, 1}, std::pair{7, 2}, std::pair{16, 16}}) {
    for (float v : ResizeBilinear(m, h, w).values) EXPECT_FLOAT_EQ(v, 1.25f);
  }
  EXPECT_THROW(ResizeBilinear(m, 0, 4), Error);
}

TEST(ResizeSemantic, SmoothInputPreservesChannelMean) {
  std::vector<float> v;
  const int h = 16, w = 16;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      v.push_back(0.5f + 0.3f * std::sin(0.2f * x) * std::cos(0.15f * y));
      v.push_back(0.01f * (x + y));
    }
  }
  const FeatureMap m = MapFrom(h, w, 2, v);
  const FeatureMap r = ResizeBilinear(m, 8, 8);
  for (int c = 0; c < 2; ++c) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < m.num_cells(); ++i) a += m.cell(i)[c];
    for (int i = 0; i < r.num_cells(); ++i) b += r.cell(i)[c];
    EXPECT_NEAR(a / m.num_cells(), b / r.num_cells(), 1e-3);
  }
}

}  // namespace
}  // namespace semmatch
