#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "semmatch/error.h"
#include "semmatch/image.h"
#include "semmatch/synth.h"
#include "semmatch/tensor_io.h"

namespace semmatch {
namespace {

HomographySamplerConfig ZeroSampler() {
  HomographySamplerConfig c;
  c.max_corner_perturbation = 0.0;
  c.rotation_deg = 0.0;
  c.scale_min = 1.0;
  c.scale_max = 1.0;
  c.translation = 0.0;
  c.perspective = 0.0;
  return c;
}

GtLayout LayoutFor(int w, int h) {
  GtLayout layout;
  layout.coarse0 = layout.coarse1 = Grid{h / 8, w / 8};
  layout.fine0 = layout.fine1 = Grid{h / 2, w / 2};
  layout.image0_width = layout.image1_width = w;
  layout.image0_height = layout.image1_height = h;
  return layout;
}

TEST(Sampler, ZeroRangesGiveIdentity) {
  const Homography h = SampleHomography(5, ZeroSampler(), 64, 64);
  EXPECT_TRUE(h.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-9));
}

TEST(Sampler, TranslationOnly) {
  HomographySamplerConfig c = ZeroSampler();
  c.translation = 0.1;
  c.max_corner_perturbation = 0.5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Eigen::Matrix3d m = SampleHomography(seed, c, 64, 48).matrix();
    EXPECT_NEAR(m(0, 0), 1.0, 1e-9);
    EXPECT_NEAR(m(1, 1), 1.0, 1e-9);
    EXPECT_NEAR(m(0, 1), 0.0, 1e-9);
    EXPECT_NEAR(m(1, 0), 0.0, 1e-9);
    EXPECT_NEAR(m(2, 0), 0.0, 1e-12);
    EXPECT_NEAR(m(2, 1), 0.0, 1e-12);
    EXPECT_LE(std::abs(m(0, 2)), 0.1 * 64 + 1e-9);
    EXPECT_LE(std::abs(m(1, 2)), 0.1 * 48 + 1e-9);
  }
}

TEST(Sampler, BoundedAndInvertible) {
  const HomographySamplerConfig c;
  const double w = 64, h = 48;
  const Point2 corners[] = {Point2(0, 0), Point2(w, 0), Point2(w, h), Point2(0, h)};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Homography H = SampleHomography(seed, c, 64, 48);
    ASSERT_GT(std::abs(H.matrix().determinant()), 1e-6);
    for (const Point2& p : corners) {
      const Point2 d = H.Apply(p) - p;
      // Displacement bound in unit-square coordinates.
      ASSERT_LE(std::hypot(d.x() / w, d.y() / h), c.max_corner_perturbation + 1e-9);
    }
  }
  EXPECT_EQ(SampleHomography(7, c, 64, 48).matrix(), SampleHomography(7, c, 64, 48).matrix());
}

TEST(Sampler, InvalidConfigRejected) {
  HomographySamplerConfig c;
  c.translation = -0.1;
  EXPECT_THROW(SampleHomography(0, c, 64, 64), Error);
  c = HomographySamplerConfig{};
  c.scale_min = 2.0;
  EXPECT_THROW(SampleHomography(0, c, 64, 64), Error);
}

TEST(Warp, IdentityKeepsImage) {
  const Image img = ProceduralImage(1, 32, 24);
  const WarpResult r = WarpImage(img, Homography::Identity());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(r.image.pixels[i], img.pixels[i], 1e-6);
  EXPECT_TRUE(std::all_of(r.mask.begin(), r.mask.end(), [](auto m) { return m != 0; }));
}

TEST(Warp, TranslationMasksLeftColumns) {
  const Image img = ProceduralImage(2, 32, 24);
  const WarpResult r = WarpImage(img, Homography::Translation(8, 0));
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 32; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 32 + x;
      if (x < 8) {
        EXPECT_FALSE(r.mask[i]);
        EXPECT_EQ(r.image.pixels[i], 0.0f);
      } else {
        EXPECT_TRUE(r.mask[i]);
        EXPECT_NEAR(r.image.at(x, y), img.at(x - 8, y), 1e-6);
      }
    }
  }
}

TEST(Warp, RoundTripRecoversInterior) {
  // A smooth image keeps bilinear resampling loss small.
  Image img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      img.at(x, y) = 0.5f + 0.4f * std::sin(0.15f * x) * std::cos(0.11f * y);
    }
  }
  HomographySamplerConfig c;
  c.max_corner_perturbation = 0.1;
  const Homography h = SampleHomography(3, c, 64, 64);
  const WarpResult forward = WarpImage(img, h);
  const WarpResult back = WarpImage(forward.image, h.Inverse());
  int checked = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const Point2 q = h.Apply(Point2(x, y));
      if (q.x() < 2 || q.y() < 2 || q.x() > 61 || q.y() > 61) continue;
      bool valid = true;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int nx = static_cast<int>(q.x()) + dx, ny = static_cast<int>(q.y()) + dy;
          valid = valid && forward.mask[static_cast<std::size_t>(ny) * 64 + nx];
        }
      }
      if (!valid) continue;
      EXPECT_NEAR(back.image.at(x, y), img.at(x, y), 2.0 / 255.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Photometric, ZeroConfigIsIdentity) {
  const Image img = ProceduralImage(4, 32, 32);
  EXPECT_EQ(PhotometricDistort(img, 9, PhotometricConfig::Zero()).pixels, img.pixels);
}

TEST(Photometric, BrightnessOnGray) {
  PhotometricParams p;
  p.brightness = 0.1;
  const Image out = ApplyPhotometric(Image(16, 16, 0.5f), p);
  for (float v : out.pixels) EXPECT_NEAR(v, 0.6f, 1e-6);
}

TEST(Photometric, ContrastAboutMidGray) {
  PhotometricParams p;
  p.contrast = 2.0;
  Image img(2, 1);
  img.at(0, 0) = 0.6f;
  img.at(1, 0) = 0.45f;
  const Image out = ApplyPhotometric(img, p);
  EXPECT_NEAR(out.at(0, 0), 0.7f, 1e-6);
  EXPECT_NEAR(out.at(1, 0), 0.4f, 1e-6);
}

TEST(Photometric, OutputClampedAndDeterministic) {
  PhotometricConfig strong;
  strong.brightness = 0.8;
  strong.contrast = 0.9;
  strong.max_noise_sigma = 0.5;
  const Image img = ProceduralImage(5, 32, 32);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Image out = PhotometricDistort(img, seed, strong);
    for (float v : out.pixels) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
    ASSERT_EQ(out.pixels, PhotometricDistort(img, seed, strong).pixels);
  }
}

TEST(Procedural, DeterministicAndInRange) {
  const Image a = ProceduralImage(8, 48, 40);
  EXPECT_EQ(a.pixels, ProceduralImage(8, 48, 40).pixels);
  EXPECT_NE(a.pixels, ProceduralImage(9, 48, 40).pixels);
  const auto [lo, hi] = std::minmax_element(a.pixels.begin(), a.pixels.end());
  EXPECT_GE(*lo, 0.0f);
  EXPECT_LE(*hi, 1.0f);
  EXPECT_GT(*hi - *lo, 0.5f);
}

TEST(GroundTruth, IdentityIsFullDiagonal) {
  const GtLayout layout = LayoutFor(64, 48);
  const GroundTruth gt = GtMatches(Homography::Identity(), layout, {});
  ASSERT_EQ(static_cast<int>(gt.coarse.size()), layout.coarse0.cells());
  for (int i = 0; i < layout.coarse0.cells(); ++i) {
    EXPECT_EQ(gt.coarse[i], std::make_pair(i, i));
  }
  for (const FineGtMatch& f : gt.fine) EXPECT_EQ(f.cell0, f.cell1);
}

TEST(GroundTruth, OneCellTranslationShiftsDiagonal) {
  const GtLayout layout = LayoutFor(64, 64);
  const GroundTruth gt = GtMatches(Homography::Translation(8, 0), layout, {});
  ASSERT_EQ(gt.coarse.size(), 8u * 7u);
  for (const auto& [i, j] : gt.coarse) {
    EXPECT_NE(i % 8, 7);
    EXPECT_EQ(j, i + 1);
  }
}

TEST(GroundTruth, RandomHomographiesSatisfyHalfCellBound) {
  const GtLayout layout = LayoutFor(64, 64);
  const HomographySamplerConfig sampler;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Homography h = SampleHomography(seed, sampler, 64, 64);
    const WarpResult warp = WarpImage(Image(64, 64, 0.5f), h);
    const GroundTruth gt = GtMatches(h, layout, warp.mask);
    std::set<int> sources;
    for (const auto& [i, j] : gt.coarse) {
      ASSERT_TRUE(sources.insert(i).second);
      const Point2 q = oracles::ApplyH(h.matrix(), Point2(8.0 * (i % 8), 8.0 * (i / 8)));
      ASSERT_LE((q - Point2(8.0 * (j % 8), 8.0 * (j / 8))).norm(), 4.0 + 1e-9);
    }
    for (const FineGtMatch& f : gt.fine) {
      const auto [i, j] = gt.coarse[f.window];
      const int ox0 = 4 * (i % 8) - 2, oy0 = 4 * (i / 8) - 2;
      const int ox1 = 4 * (j % 8) - 2, oy1 = 4 * (j / 8) - 2;
      const Point2 p(2.0 * (ox0 + f.cell0 % 5), 2.0 * (oy0 + f.cell0 / 5));
      const Point2 t(2.0 * (ox1 + f.cell1 % 5), 2.0 * (oy1 + f.cell1 / 5));
      ASSERT_LE((oracles::ApplyH(h.matrix(), p) - t).norm(), 1.0 + 1e-9);
    }
  }
}

TEST(SyntheticPair, PhotometricLeavesGeometryAlone) {
  const Image src = ProceduralImage(6, 64, 64);
  const HomographySamplerConfig sampler;
  const SyntheticPair clean = MakeSyntheticPair(src, 42, sampler, PhotometricConfig::Zero());
  const SyntheticPair noisy = MakeSyntheticPair(src, 42, sampler, PhotometricConfig{});
  EXPECT_EQ(clean.h_gt.matrix(), noisy.h_gt.matrix());
  EXPECT_EQ(clean.mask, noisy.mask);
  EXPECT_EQ(clean.image0.pixels, noisy.image0.pixels);
  EXPECT_NE(clean.image1.pixels, noisy.image1.pixels);
  const WarpResult warp = WarpImage(src, clean.h_gt);
  EXPECT_EQ(clean.image1.pixels, warp.image.pixels);
  const GtLayout layout = LayoutFor(64, 64);
  const GroundTruth a = GtMatches(clean.h_gt, layout, clean.mask);
  const GroundTruth b = GtMatches(noisy.h_gt, layout, noisy.mask);
  EXPECT_EQ(a.coarse, b.coarse);
  EXPECT_EQ(a.fine.size(), b.fine.size());
  const SyntheticPair again = MakeSyntheticPair(src, 42, sampler, PhotometricConfig{});
  EXPECT_EQ(again.image1.pixels, noisy.image1.pixels);
}

TEST(Manifest, ParsesBothForms) {
  const auto entries =
      ParseManifest("# comment\nimgs/a.pgm 7\n\nsynthetic 3 11\n/abs/b.ppm 9  # trailing\n", "/data");
  ASSERT_EQ(entries.size(), 5u);
  EXPECT_EQ(entries[0].image_path, "/data/imgs/a.pgm");
  EXPECT_EQ(entries[0].seed, 7u);
  const auto procedural = ProceduralManifest(3, 11);
  for (int k = 0; k < 3; ++k) {
    EXPECT_TRUE(entries[1 + k].image_path.empty());
    EXPECT_EQ(entries[1 + k].seed, procedural[k].seed);
  }
  EXPECT_EQ(entries[4].image_path, "/abs/b.ppm");
  EXPECT_THROW(ParseManifest("a.pgm\n", ""), Error);
  EXPECT_THROW(ParseManifest("synthetic 3\n", ""), Error);
  EXPECT_THROW(ParseManifest("a.pgm 1 2\n", ""), Error);
}

TEST(Manifest, LoadsImagesAtRequestedSize) {
  const std::string path = ::testing::TempDir() + "/src.pgm";
  SavePgm(path, ProceduralImage(3, 100, 80));
  const Image img = LoadSourceImage({path, 1}, 64);
  EXPECT_EQ(img.width, 64);
  EXPECT_EQ(img.height, 64);
  const Image proc = LoadSourceImage({"", 5}, 64);
  EXPECT_EQ(proc.pixels, ProceduralImage(5, 64, 64).pixels);
}

}  // namespace
}  // namespace semmatch
