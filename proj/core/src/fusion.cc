#include "semmatch/fusion.h"

#include <cmath>

#include "semmatch/backbone.h"

namespace semmatch {
namespace {

void AddMatrix(const std::string& name, int in, int out, std::uint64_t seed,
               ParamStore<float>& store) {
  store.Add(name, UniformInit({in, out}, in, ParamSeed(seed, name)));
}

void AddLinear(const std::string& prefix, int in, int out, std::uint64_t seed,
               ParamStore<float>& store) {
  AddMatrix(prefix + ".w", in, out, seed, store);
  store.Add(prefix + ".b", UniformInit({out}, in, ParamSeed(seed, prefix + ".b")));
}

std::string LayerPrefix(int layer) { return "enhancer." + std::to_string(layer); }

// Linear-attention encoder layer: x + mlp(concat(x, merge(attn(x, source)))).
template <typename T>
Var<T> EncoderLayer(const BoundParams<T>& p, const std::string& prefix, Var<T> x,
                    Var<T> source) {
  Var<T> q = MatMul(x, p(prefix + ".q"));
  Var<T> k = MatMul(source, p(prefix + ".k"));
  Var<T> v = MatMul(source, p(prefix + ".v"));
  Var<T> message = MatMul(LinearAttention(q, k, v), p(prefix + ".merge"));
  Var<T> hidden = Relu(Linear(ConcatChannels(x, message), p(prefix + ".mlp1.w"),
                              p(prefix + ".mlp1.b")));
  return Add(x, Linear(hidden, p(prefix + ".mlp2.w"), p(prefix + ".mlp2.b")));
}

}  // namespace

void AddEnhancerParams(int channels, int layers, std::uint64_t seed, ParamStore<float>& store) {
  for (int l = 0; l < layers; ++l) {
    const std::string prefix = LayerPrefix(l);
    for (const char* proj : {".q", ".k", ".v", ".merge"}) {
      AddMatrix(prefix + proj, channels, channels, seed, store);
    }
    AddLinear(prefix + ".mlp1", 2 * channels, 2 * channels, seed, store);
    AddLinear(prefix + ".mlp2", 2 * channels, channels, seed, store);
  }
}

void AddSgibParams(const std::string& prefix, int channels, std::uint64_t seed,
                   ParamStore<float>& store) {
  for (const char* proj : {".sa.q", ".sa.k", ".sa.v"}) {
    AddMatrix(prefix + proj, channels, channels, seed, store);
  }
  AddLinear(prefix + ".sa.out", channels, channels, seed, store);
  for (const char* proj : {".cross.q", ".cross.k", ".cross.v"}) {
    AddMatrix(prefix + proj, channels, channels, seed, store);
  }
  // Post-concat projection starts as identity on the image half and zero on the
  // semantic half, so an untrained block passes image features through.
  TensorF proj({2 * channels, channels});
  for (int r = 0; r < channels; ++r) proj.at(r, r) = 1.0f;
  store.Add(prefix + ".proj.w", std::move(proj));
  store.Add(prefix + ".proj.b", TensorF({channels}));
}

std::string SfbStagePrefix(int stage, int repeat) {
  if (stage == 1) return "sfb.stage1";
  return "sfb.stage2." + std::to_string(repeat);
}

void AddSfbParams(const FusionConfig& config, std::uint64_t seed, ParamStore<float>& store) {
  AddSgibParams(SfbStagePrefix(1, 0), config.channels, seed, store);
  if (!config.enable_cross_image) return;
  for (int r = 0; r < config.stage2_repeats; ++r) {
    AddSgibParams(SfbStagePrefix(2, r), config.channels, seed, store);
  }
}

template <typename T>
Tensor<T> PositionalEncoding(int height, int width, int channels) {
  if (channels % 4 != 0) {
    throw Error(ErrorCode::kConfig, "positional encoding needs channels divisible by 4");
  }
  Tensor<T> pe({height * width, channels});
  const int terms = channels / 4;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      T* row = pe.data() + static_cast<std::size_t>(y * width + x) * channels;
      for (int k = 0; k < terms; ++k) {
        const double div = std::exp(-std::log(10000.0) * (2.0 * k) / (channels / 2.0));
        row[4 * k + 0] = static_cast<T>(std::sin(x * div));
        row[4 * k + 1] = static_cast<T>(std::cos(x * div));
        row[4 * k + 2] = static_cast<T>(std::sin(y * div));
        row[4 * k + 3] = static_cast<T>(std::cos(y * div));
      }
    }
  }
  return pe;
}

template <typename T>
std::pair<Var<T>, Var<T>> Enhance(const BoundParams<T>& p, Var<T> c0, Var<T> c1, Grid grid0,
                                  Grid grid1, int layers) {
  if (c0.cols() != c1.cols()) {
    throw Error(ErrorCode::kDimension, "enhance: channel mismatch");
  }
  if (c0.rows() != grid0.cells() || c1.rows() != grid1.cells()) {
    throw Error(ErrorCode::kDimension, "enhance: token count does not match grid");
  }
  if (layers % 2 != 0) throw Error(ErrorCode::kConfig, "enhancer layer count must be even");
  if (layers == 0) return {c0, c1};
  Var<T> x0 = AddConstant(c0, PositionalEncoding<T>(grid0.height, grid0.width, c0.cols()));
  Var<T> x1 = AddConstant(c1, PositionalEncoding<T>(grid1.height, grid1.width, c1.cols()));
  for (int l = 0; l < layers; ++l) {
    const std::string prefix = LayerPrefix(l);
    if (l % 2 == 0) {
      x0 = EncoderLayer(p, prefix, x0, x0);
      x1 = EncoderLayer(p, prefix, x1, x1);
    } else {
      Var<T> n0 = EncoderLayer(p, prefix, x0, x1);
      Var<T> n1 = EncoderLayer(p, prefix, x1, x0);
      x0 = n0;
      x1 = n1;
    }
  }
  return {x0, x1};
}

template <typename T>
Var<T> SgibQuery(const BoundParams<T>& p, const std::string& prefix, Var<T> semantic) {
  Var<T> q = MatMul(semantic, p(prefix + ".sa.q"));
  Var<T> k = MatMul(semantic, p(prefix + ".sa.k"));
  Var<T> v = MatMul(semantic, p(prefix + ".sa.v"));
  Var<T> attended = Linear(ScaledDotAttention(q, k, v), p(prefix + ".sa.out.w"),
                           p(prefix + ".sa.out.b"));
  return MatMul(Add(semantic, attended), p(prefix + ".cross.q"));
}

template <typename T>
Var<T> SgibAttend(const BoundParams<T>& p, const std::string& prefix, Var<T> query,
                  Var<T> image) {
  Var<T> k = MatMul(image, p(prefix + ".cross.k"));
  Var<T> v = MatMul(image, p(prefix + ".cross.v"));
  return ScaledDotAttention(query, k, v);
}

template <typename T>
Var<T> SgibForward(const BoundParams<T>& p, const std::string& prefix, Var<T> semantic,
                   Var<T> image) {
  if (semantic.rows() != image.rows()) {
    throw Error(ErrorCode::kDimension, "SGIB: semantic and image grids differ");
  }
  if (semantic.cols() != image.cols()) {
    throw Error(ErrorCode::kDimension, "SGIB: semantic features not projected to D_c");
  }
  Var<T> attended = SgibAttend(p, prefix, SgibQuery(p, prefix, semantic), image);
  return Linear(ConcatChannels(image, attended), p(prefix + ".proj.w"), p(prefix + ".proj.b"));
}

template <typename T>
std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>& p, const SemanticInputs<T>& s,
                                     Var<T> c0, Var<T> c1, const FusionConfig& config) {
  if (s.own0.shape() != c0.shape() || s.other_on_0.shape() != c0.shape() ||
      s.own1.shape() != c1.shape() || s.other_on_1.shape() != c1.shape()) {
    throw Error(ErrorCode::kDimension, "SFB: grid mismatch");
  }
  const std::string stage1 = SfbStagePrefix(1, 0);
  Var<T> t0 = SgibForward(p, stage1, s.own0, c0);
  Var<T> t1 = SgibForward(p, stage1, s.own1, c1);
  if (!config.enable_cross_image) return {t0, t1};
  for (int r = 0; r < config.stage2_repeats; ++r) {
    const std::string stage2 = SfbStagePrefix(2, r);
    Var<T> n0 = SgibForward(p, stage2, s.other_on_0, t0);
    Var<T> n1 = SgibForward(p, stage2, s.other_on_1, t1);
    t0 = n0;
    t1 = n1;
  }
  return {t0, t1};
}

template <typename T>
std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>& p, Var<T> s0, Var<T> s1, Var<T> c0,
                                     Var<T> c1, const FusionConfig& config) {
  return SfbForward(p, SemanticInputs<T>{s0, s1, s1, s0}, c0, c1, config);
}

#define SEMMATCH_INSTANTIATE_FUSION(T)                                                   \
  template Tensor<T> PositionalEncoding<T>(int, int, int);                               \
  template std::pair<Var<T>, Var<T>> Enhance(const BoundParams<T>&, Var<T>, Var<T>, Grid, \
                                             Grid, int);                                 \
  template Var<T> SgibQuery(const BoundParams<T>&, const std::string&, Var<T>);          \
  template Var<T> SgibAttend(const BoundParams<T>&, const std::string&, Var<T>, Var<T>); \
  template Var<T> SgibForward(const BoundParams<T>&, const std::string&, Var<T>, Var<T>); \
  template std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>&, Var<T>, Var<T>,   \
                                                Var<T>, Var<T>, const FusionConfig&);    \
  template std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>&,                   \
                                                const SemanticInputs<T>&, Var<T>, Var<T>, \
                                                const FusionConfig&);

SEMMATCH_INSTANTIATE_FUSION(float)
SEMMATCH_INSTANTIATE_FUSION(double)

#undef SEMMATCH_INSTANTIATE_FUSION

}  // namespace semmatch
