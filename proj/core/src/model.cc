#include "semmatch/model.h"

#include <tuple>

#include "semmatch/semantic.h"

namespace semmatch {

AblationFlags ConfigureAblation(const std::vector<std::string>& flags) {
  AblationFlags out;
  bool toy = false, file = false;
  for (const std::string& f : flags) {
    if (f.empty() || f == "none" || f == "full") continue;
    if (f == "no_sfb") {
      out.no_sfb = true;
    } else if (f == "no_cross_image_fusion" || f == "no_cross") {
      out.no_cross_image_fusion = true;
    } else if (f == "no_overlap_fine" || f == "no_overlap") {
      out.no_overlap_fine = true;
    } else if (f == "toy_semantic") {
      toy = true;
    } else if (f == "file_semantic") {
      file = true;
    } else {
      throw Error(ErrorCode::kConfig, "unknown ablation flag '" + f + "'");
    }
  }
  if (toy && file) throw Error(ErrorCode::kConfig, "toy_semantic and file_semantic conflict");
  if (out.no_sfb && out.no_cross_image_fusion) {
    throw Error(ErrorCode::kConfig,
                "no_cross_image_fusion has no effect when the fusion block is removed");
  }
  if (out.no_sfb && file) {
    throw Error(ErrorCode::kConfig, "file_semantic is unused when the fusion block is removed");
  }
  out.semantic = file ? SemanticMode::kFile : SemanticMode::kToy;
  return out;
}

std::string AblationName(const AblationFlags& flags) {
  std::string name;
  auto append = [&name](const char* s) { name += (name.empty() ? "" : ",") + std::string(s); };
  if (flags.no_sfb) append("no_sfb");
  if (flags.no_cross_image_fusion) append("no_cross_image_fusion");
  if (flags.no_overlap_fine) append("no_overlap_fine");
  if (flags.semantic == SemanticMode::kFile) append("file_semantic");
  return name.empty() ? "full" : name;
}

FusionConfig ModelConfig::fusion() const {
  FusionConfig f;
  f.channels = backbone.coarse_channels;
  f.enhancer_layers = enhancer_layers;
  f.enable_sfb = !ablation.no_sfb;
  f.enable_cross_image = !ablation.no_cross_image_fusion;
  f.stage2_repeats = stage2_repeats;
  return f;
}

ParamStore<float> InitModelParams(const ModelConfig& config, std::uint64_t seed) {
  if (config.enhancer_layers < 0 || config.enhancer_layers % 2 != 0) {
    throw Error(ErrorCode::kConfig, "enhancer layer count must be even");
  }
  if (config.backbone.coarse_channels % 4 != 0) {
    throw Error(ErrorCode::kConfig, "coarse channels must be divisible by 4");
  }
  ParamStore<float> store;
  AddBackboneParams(config.backbone, seed, store);
  AddEnhancerParams(config.backbone.coarse_channels, config.enhancer_layers, seed, store);
  if (!config.ablation.no_sfb) {
    const int dc = config.backbone.coarse_channels;
    store.Add("semantic.proj.w", UniformInit({config.semantic_channels, dc},
                                             config.semantic_channels,
                                             ParamSeed(seed, "semantic.proj.w")));
    store.Add("semantic.proj.b", UniformInit({dc}, config.semantic_channels,
                                             ParamSeed(seed, "semantic.proj.b")));
    AddSfbParams(config.fusion(), seed, store);
  }
  return store;
}

template <typename T>
ForwardVars<T> ModelForward(const BoundParams<T>& params, const Image& image0,
                            const Image& image1, const FeatureMap& semantic0,
                            const FeatureMap& semantic1, const ModelConfig& config) {
  const PyramidVars<T> p0 = ExtractPyramidVars(params, image0, config.backbone);
  const PyramidVars<T> p1 = ExtractPyramidVars(params, image1, config.backbone);

  ForwardVars<T> out;
  out.grid0 = {p0.coarse_h, p0.coarse_w};
  out.grid1 = {p1.coarse_h, p1.coarse_w};
  out.fine_grid0 = {p0.fine_h, p0.fine_w};
  out.fine_grid1 = {p1.fine_h, p1.fine_w};
  std::tie(out.enhanced0, out.enhanced1) = Enhance(params, p0.coarse, p1.coarse, out.grid0,
                                                   out.grid1, config.enhancer_layers);

  Var<T> fused0 = out.enhanced0, fused1 = out.enhanced1;
  if (!config.ablation.no_sfb) {
    auto project = [&](const FeatureMap& semantic, Grid grid) {
      if (semantic.channels != config.semantic_channels) {
        throw Error(ErrorCode::kDimension, "semantic map has " +
                                               std::to_string(semantic.channels) +
                                               " channels, model expects " +
                                               std::to_string(config.semantic_channels));
      }
      const FeatureMap resized = ResizeBilinear(semantic, grid.height, grid.width);
      std::vector<T> values(resized.values.begin(), resized.values.end());
      Var<T> s = params.tape().Constant(
          Tensor<T>({resized.num_cells(), resized.channels}, std::move(values)));
      return Linear(s, params("semantic.proj.w"), params("semantic.proj.b"));
    };
    SemanticInputs<T> s;
    s.own0 = project(semantic0, out.grid0);
    s.own1 = project(semantic1, out.grid1);
    const bool same_grid = out.grid0.height == out.grid1.height &&
                           out.grid0.width == out.grid1.width;
    s.other_on_0 = same_grid ? s.own1 : project(semantic1, out.grid0);
    s.other_on_1 = same_grid ? s.own0 : project(semantic0, out.grid1);
    std::tie(fused0, fused1) =
        SfbForward(params, s, out.enhanced0, out.enhanced1, config.fusion());
  }
  out.coarse0 = L2NormalizeRows(fused0);
  out.coarse1 = L2NormalizeRows(fused1);
  out.fine0 = L2NormalizeRows(p0.fine);
  out.fine1 = L2NormalizeRows(p1.fine);
  return out;
}

template ForwardVars<float> ModelForward(const BoundParams<float>&, const Image&, const Image&,
                                         const FeatureMap&, const FeatureMap&,
                                         const ModelConfig&);
template ForwardVars<double> ModelForward(const BoundParams<double>&, const Image&,
                                          const Image&, const FeatureMap&, const FeatureMap&,
                                          const ModelConfig&);

}  // namespace semmatch
