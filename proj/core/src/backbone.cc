#include "semmatch/backbone.h"

#include "semmatch/random.h"

namespace semmatch {
namespace {

constexpr int kKernel = 3;

void AddConv(const std::string& prefix, int in, int out, std::uint64_t seed,
             ParamStore<float>& store) {
  const int fan_in = kKernel * kKernel * in;
  store.Add(prefix + ".w", UniformInit({fan_in, out}, fan_in, ParamSeed(seed, prefix + ".w")));
  store.Add(prefix + ".b", UniformInit({out}, fan_in, ParamSeed(seed, prefix + ".b")));
}

template <typename T>
Var<T> Conv(const BoundParams<T>& p, const std::string& prefix, Var<T> x, int height,
            int width, int stride, int* out_h, int* out_w) {
  *out_h = (height + 2 - kKernel) / stride + 1;
  *out_w = (width + 2 - kKernel) / stride + 1;
  return Linear(Im2Col(x, height, width, kKernel, stride, 1), p(prefix + ".w"),
                p(prefix + ".b"));
}

}  // namespace

std::uint64_t ParamSeed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return StreamSeed(seed, h);
}

void AddBackboneParams(const BackboneConfig& config, std::uint64_t seed,
                       ParamStore<float>& store) {
  AddConv("backbone.stem", 1, config.stem_channels, seed, store);
  AddConv("backbone.fine", config.stem_channels, config.fine_channels, seed, store);
  AddConv("backbone.down1", config.stem_channels, config.mid_channels, seed, store);
  AddConv("backbone.down2", config.mid_channels, config.coarse_channels, seed, store);
}

template <typename T>
PyramidVars<T> ExtractPyramidVars(const BoundParams<T>& p, const Image& image,
                                  const BackboneConfig& config) {
  (void)config;
  if (image.width % 8 != 0 || image.height % 8 != 0) {
    throw Error(ErrorCode::kDimension, "image must be padded to a multiple of 8");
  }
  std::vector<T> pixels(image.pixels.begin(), image.pixels.end());
  Var<T> x = p.tape().Constant(Tensor<T>({image.height * image.width, 1}, std::move(pixels)));

  PyramidVars<T> out;
  int h2, w2;
  Var<T> stem = Relu(Conv(p, "backbone.stem", x, image.height, image.width, 2, &h2, &w2));
  out.fine = Conv(p, "backbone.fine", stem, h2, w2, 1, &out.fine_h, &out.fine_w);
  int h4, w4;
  Var<T> mid = Relu(Conv(p, "backbone.down1", stem, h2, w2, 2, &h4, &w4));
  out.coarse = Conv(p, "backbone.down2", mid, h4, w4, 2, &out.coarse_h, &out.coarse_w);
  return out;
}

std::pair<FeatureMap, FeatureMap> ExtractPyramid(const Image& image,
                                                 const ParamStore<float>& params,
                                                 const BackboneConfig& config) {
  Tape<float> tape;
  BoundParams<float> bound(tape, params, /*trainable=*/false);
  const PyramidVars<float> vars = ExtractPyramidVars(bound, image, config);
  FeatureMap coarse = FeatureMapFromTensor(vars.coarse.value(), vars.coarse_h, vars.coarse_w,
                                           1.0 / 8, FeatureOrigin::kCoarse);
  FeatureMap fine = FeatureMapFromTensor(vars.fine.value(), vars.fine_h, vars.fine_w, 1.0 / 2,
                                         FeatureOrigin::kFine);
  MaskToContent(coarse, image.original_width, image.original_height);
  MaskToContent(fine, image.original_width, image.original_height);
  return {std::move(coarse), std::move(fine)};
}

template PyramidVars<float> ExtractPyramidVars(const BoundParams<float>&, const Image&,
                                               const BackboneConfig&);
template PyramidVars<double> ExtractPyramidVars(const BoundParams<double>&, const Image&,
                                                const BackboneConfig&);

}  // namespace semmatch
