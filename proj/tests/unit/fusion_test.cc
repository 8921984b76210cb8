#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "semmatch/autodiff.h"
#include "semmatch/error.h"
#include "semmatch/fusion.h"
#include "semmatch/model.h"
#include "semmatch/param_store.h"
#include "semmatch/random.h"
#include "semmatch/semantic.h"
#include "semmatch/synth.h"

namespace semmatch {
namespace {

constexpr int kChannels = 8;

TensorD RandomTensor(std::vector<int> shape, std::uint64_t seed) {
  Rng rng(seed);
  TensorD t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.Uniform(-1.0, 1.0);
  return t;
}

ParamStore<double> FusionParams(const FusionConfig& config, int enhancer_layers) {
  ParamStore<float> store;
  AddEnhancerParams(config.channels, enhancer_layers, 11, store);
  AddSfbParams(config, 12, store);
  return store.Cast<double>();
}

FusionConfig SmallConfig() {
  FusionConfig config;
  config.channels = kChannels;
  config.enhancer_layers = 2;
  return config;
}

bool SameValues(const TensorD& a, const TensorD& b, double tol) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

TEST(Enhance, ZeroLayersIsIdentity) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 0);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const TensorD a = RandomTensor({6, kChannels}, 1), b = RandomTensor({4, kChannels}, 2);
  const auto [e0, e1] = Enhance(p, tape.Constant(a), tape.Constant(b), Grid{2, 3}, Grid{2, 2}, 0);
  EXPECT_EQ(e0.value(), a);
  EXPECT_EQ(e1.value(), b);
}

TEST(Enhance, ShapesAndSwapSymmetry) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 4);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const TensorD a = RandomTensor({6, kChannels}, 3), b = RandomTensor({6, kChannels}, 4);
  const Grid g{2, 3};
  const auto [x0, x1] = Enhance(p, tape.Constant(a), tape.Constant(b), g, g, 4);
  const auto [y0, y1] = Enhance(p, tape.Constant(b), tape.Constant(a), g, g, 4);
  EXPECT_EQ(x0.shape(), a.shape());
  EXPECT_EQ(x1.shape(), b.shape());
  EXPECT_EQ(x0.value(), y1.value());
  EXPECT_EQ(x1.value(), y0.value());
}

TEST(Enhance, RejectsBadInputs) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 2);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const Var<double> a = tape.Constant(RandomTensor({4, kChannels}, 5));
  const Var<double> narrow = tape.Constant(RandomTensor({4, kChannels - 1}, 6));
  EXPECT_THROW(Enhance(p, a, narrow, Grid{2, 2}, Grid{2, 2}, 2), Error);
  EXPECT_THROW(Enhance(p, a, a, Grid{2, 2}, Grid{2, 2}, 3), Error);
  EXPECT_THROW(Enhance(p, a, a, Grid{1, 3}, Grid{2, 2}, 2), Error);
}

TEST(Sgib, SingleTokenAttendsToItsOwnValue) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 0);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const TensorD s = RandomTensor({1, kChannels}, 7);
  const TensorD c = RandomTensor({1, kChannels}, 8);
  const std::string prefix = SfbStagePrefix(1, 0);
  const TensorD out = SgibForward(p, prefix, tape.Constant(s), tape.Constant(c)).value();

  const TensorD& wv = store.Get(prefix + ".cross.v");
  const TensorD& wp = store.Get(prefix + ".proj.w");
  const TensorD& bp = store.Get(prefix + ".proj.b");
  std::vector<double> cat(2 * kChannels);
  for (int j = 0; j < kChannels; ++j) {
    cat[j] = c.at(0, j);
    double v = 0.0;
    for (int k = 0; k < kChannels; ++k) v += c.at(0, k) * wv.at(k, j);
    cat[kChannels + j] = v;
  }
  for (int j = 0; j < kChannels; ++j) {
    double expected = bp[j];
    for (int k = 0; k < 2 * kChannels; ++k) expected += cat[k] * wp.at(k, j);
    EXPECT_NEAR(out.at(0, j), expected, 1e-12);
  }
}

TEST(Sgib, PreservesShapeAndRejectsGridMismatch) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 0);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const std::string prefix = SfbStagePrefix(1, 0);
  const Var<double> c = tape.Constant(RandomTensor({9, kChannels}, 9));
  EXPECT_EQ(SgibForward(p, prefix, tape.Constant(RandomTensor({9, kChannels}, 10)), c).shape(),
            c.shape());
  EXPECT_THROW(SgibForward(p, prefix, tape.Constant(RandomTensor({8, kChannels}, 11)), c), Error);
}

TEST(Sgib, KeyValuePermutationSymmetry) {
  const ParamStore<double> store = FusionParams(SmallConfig(), 0);
  const std::string prefix = SfbStagePrefix(1, 0);
  const TensorD s = RandomTensor({7, kChannels}, 12);
  const TensorD c = RandomTensor({7, kChannels}, 13);
  const int perm[] = {4, 6, 0, 2, 1, 5, 3};
  TensorD cp(c.shape());
  for (int r = 0; r < 7; ++r) {
    for (int k = 0; k < kChannels; ++k) cp.at(r, k) = c.at(perm[r], k);
  }
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const Var<double> q = SgibQuery(p, prefix, tape.Constant(s));
  const TensorD a = SgibAttend(p, prefix, q, tape.Constant(c)).value();
  const TensorD b = SgibAttend(p, prefix, q, tape.Constant(cp)).value();
  EXPECT_TRUE(SameValues(a, b, 1e-13));
}

TEST(Sfb, GradientMatchesFiniteDifferences) {
  FusionConfig config = SmallConfig();
  const ParamStore<double> store = FusionParams(config, 0);
  const TensorD s0 = RandomTensor({6, kChannels}, 14), s1 = RandomTensor({6, kChannels}, 15);
  const TensorD c0 = RandomTensor({6, kChannels}, 16), c1 = RandomTensor({6, kChannels}, 17);
  const TensorD w = RandomTensor({6, kChannels}, 18);
  const double err = oracles::ParamGradCheck(
      store,
      [&](const BoundParams<double>& p) {
        Tape<double>& tape = p.tape();
        const auto [f0, f1] = SfbForward(p, tape.Constant(s0), tape.Constant(s1),
                                         tape.Constant(c0), tape.Constant(c1), config);
        return Add(SumAll(Mul(f0, tape.Constant(w))), SumAll(Mul(f1, f1)));
      },
      4, 19);
  EXPECT_LT(err, 1e-4);
}

TEST(Sfb, CrossImageStageAblation) {
  FusionConfig config = SmallConfig();
  const ParamStore<double> store = FusionParams(config, 0);
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const Var<double> s0 = tape.Constant(RandomTensor({6, kChannels}, 20));
  const Var<double> s1 = tape.Constant(RandomTensor({6, kChannels}, 21));
  const Var<double> c0 = tape.Constant(RandomTensor({6, kChannels}, 22));
  const Var<double> c1 = tape.Constant(RandomTensor({6, kChannels}, 23));
  const std::string stage1 = SfbStagePrefix(1, 0);

  FusionConfig no_cross = config;
  no_cross.enable_cross_image = false;
  const auto [a0, a1] = SfbForward(p, s0, s1, c0, c1, no_cross);
  EXPECT_EQ(a0.value(), SgibForward(p, stage1, s0, c0).value());
  EXPECT_EQ(a1.value(), SgibForward(p, stage1, s1, c1).value());

  const auto [f0, f1] = SfbForward(p, s0, s1, c0, c1, config);
  const std::string stage2 = SfbStagePrefix(2, 0);
  EXPECT_EQ(f0.value(), SgibForward(p, stage2, s1, a0).value());
  EXPECT_EQ(f1.value(), SgibForward(p, stage2, s0, a1).value());
  EXPECT_EQ(f0.shape(), c0.shape());
  EXPECT_EQ(f1.shape(), c1.shape());

  ParamStore<float> only_stage1;
  AddSfbParams(no_cross, 1, only_stage1);
  for (int i = 0; i < only_stage1.size(); ++i) {
    EXPECT_EQ(only_stage1.name(i).rfind("sfb.stage1.", 0), 0u) << only_stage1.name(i);
  }
}

ModelConfig TinyModel() {
  ModelConfig config;
  config.backbone.stem_channels = 4;
  config.backbone.mid_channels = 8;
  config.backbone.coarse_channels = 8;
  config.backbone.fine_channels = 4;
  config.semantic_channels = kDefaultSemanticChannels;
  config.enhancer_layers = 2;
  return config;
}

TEST(Model, NoSfbFeedsEnhancedFeaturesToMatching) {
  ModelConfig config = TinyModel();
  config.ablation.no_sfb = true;
  const ParamStore<double> store = InitModelParams(config, 5).Cast<double>();
  for (int i = 0; i < store.size(); ++i) {
    EXPECT_NE(store.name(i).rfind("sfb.", 0), 0u);
    EXPECT_NE(store.name(i).rfind("semantic.", 0), 0u);
  }
  const Image img0 = ProceduralImage(1, 32, 32), img1 = ProceduralImage(2, 32, 32);
  const ToySemanticProvider provider;
  Tape<double> tape;
  BoundParams<double> p(tape, store, false);
  const ForwardVars<double> fwd = ModelForward(p, img0, img1, provider.Extract(img0, "0"),
                                               provider.Extract(img1, "1"), config);
  EXPECT_EQ(fwd.coarse0.value(), L2NormalizeRows(fwd.enhanced0).value());
  EXPECT_EQ(fwd.coarse1.value(), L2NormalizeRows(fwd.enhanced1).value());
}

TEST(Model, FullVariantShapesAndParameters) {
  const ModelConfig config = TinyModel();
  const ParamStore<float> store = InitModelParams(config, 5);
  EXPECT_TRUE(store.Contains("semantic.proj.w"));
  EXPECT_TRUE(store.Contains(SfbStagePrefix(2, 0) + ".proj.w"));
  EXPECT_EQ(store.Get("semantic.proj.w").shape(),
            (std::vector<int>{kDefaultSemanticChannels, config.backbone.coarse_channels}));
  EXPECT_EQ(InitModelParams(config, 5), store);
  EXPECT_FALSE(InitModelParams(config, 6) == store);

  const Image img0 = ProceduralImage(3, 40, 32), img1 = ProceduralImage(4, 32, 48);
  const ToySemanticProvider provider;
  Tape<float> tape;
  BoundParams<float> p(tape, store, false);
  const ForwardVars<float> fwd = ModelForward(p, img0, img1, provider.Extract(img0, "0"),
                                              provider.Extract(img1, "1"), config);
  EXPECT_EQ(fwd.grid0, (Grid{4, 5}));
  EXPECT_EQ(fwd.grid1, (Grid{6, 4}));
  EXPECT_EQ(fwd.coarse0.shape(), (std::vector<int>{20, config.backbone.coarse_channels}));
  EXPECT_EQ(fwd.coarse1.shape(), (std::vector<int>{24, config.backbone.coarse_channels}));
  EXPECT_EQ(fwd.fine0.shape(), (std::vector<int>{16 * 20, config.backbone.fine_channels}));
  EXPECT_TRUE(fwd.coarse0.value().AllFinite());
}

TEST(Model, AblationFlagParsing) {
  EXPECT_TRUE(ConfigureAblation({"no_sfb"}).no_sfb);
  EXPECT_TRUE(ConfigureAblation({"no_cross"}).no_cross_image_fusion);
  EXPECT_TRUE(ConfigureAblation({"no_overlap_fine"}).no_overlap_fine);
  EXPECT_EQ(ConfigureAblation({}), AblationFlags{});
  EXPECT_THROW(ConfigureAblation({"no_such_flag"}), Error);
  EXPECT_THROW(ConfigureAblation({"toy_semantic", "file_semantic"}), Error);
}

}  // namespace
}  // namespace semmatch
