#include "semmatch/training.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "semmatch/checkpoint.h"
#include "semmatch/error.h"
#include "semmatch/random.h"

namespace semmatch {
namespace {

constexpr double kMaskedScore = -1e9;

double NllTerm(double p, int gamma) {
  const double c = std::clamp(p, kConfidenceFloor, 1.0);
  return -std::log(c) * std::pow(1.0 - c, gamma);
}

template <typename T>
Var<T> NllSum(Var<T> p, int gamma) {
  Var<T> c = Clamp(p, static_cast<T>(kConfidenceFloor), T(1));
  Var<T> nll = Scale(Log(c), T(-1));
  if (gamma > 0) {
    const Var<T> one_minus = AddConstant(Scale(c, T(-1)), Tensor<T>(c.shape(), T(1)));
    Var<T> weight = one_minus;
    for (int g = 1; g < gamma; ++g) weight = Mul(weight, one_minus);
    nll = Mul(weight, nll);
  }
  return SumAll(nll);
}

// Content validity of a grid whose cell k represents pixel k / scale.
std::vector<std::uint8_t> ContentMask(Grid grid, double scale, const Image& image) {
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(grid.cells()), 1);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (x / scale >= image.original_width || y / scale >= image.original_height) {
        valid[static_cast<std::size_t>(y) * grid.width + x] = 0;
      }
    }
  }
  return valid;
}

// Additive mask; nullopt when every entry is valid.
template <typename T>
std::optional<Tensor<T>> PairMask(const std::vector<std::uint8_t>& rows,
                                  const std::vector<std::uint8_t>& cols) {
  bool any = false;
  Tensor<T> mask({static_cast<int>(rows.size()), static_cast<int>(cols.size())}, T(0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (!rows[i] || !cols[j]) {
        mask.at(static_cast<int>(i), static_cast<int>(j)) = static_cast<T>(kMaskedScore);
        any = true;
      }
    }
  }
  if (!any) return std::nullopt;
  return mask;
}

// Flat fine indices of a window (-1 where out of grid or outside content).
std::vector<int> WindowRows(int center_x, int center_y, int window, Grid fine,
                            const std::vector<std::uint8_t>& valid,
                            std::vector<std::uint8_t>* cell_valid) {
  std::vector<int> rows(static_cast<std::size_t>(window) * window, -1);
  cell_valid->assign(rows.size(), 0);
  const int half = window / 2;
  for (int v = 0; v < window; ++v) {
    for (int u = 0; u < window; ++u) {
      const int x = center_x - half + u, y = center_y - half + v;
      if (x < 0 || y < 0 || x >= fine.width || y >= fine.height) continue;
      const int idx = y * fine.width + x;
      if (!valid[idx]) continue;
      rows[v * window + u] = idx;
      (*cell_valid)[v * window + u] = 1;
    }
  }
  return rows;
}

bool AllFinite(const std::vector<TensorF>& tensors) {
  for (const TensorF& t : tensors) {
    if (!t.AllFinite()) return false;
  }
  return true;
}

}  // namespace

std::optional<double> LossCoarse(const ConfidenceMatrix& p,
                                 std::span<const std::pair<int, int>> gt, int focal_gamma) {
  if (gt.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [i, j] : gt) sum += NllTerm(p.at(i, j), focal_gamma);
  return sum / static_cast<double>(gt.size());
}

std::optional<double> LossFine(const std::vector<ConfidenceMatrix>& windows,
                               std::span<const FineGtMatch> gt, int focal_gamma) {
  if (gt.empty()) return std::nullopt;
  double sum = 0.0;
  for (const FineGtMatch& g : gt) {
    if (g.window < 0 || g.window >= static_cast<int>(windows.size())) {
      throw Error(ErrorCode::kContract, "fine GT refers to a missing window");
    }
    sum += NllTerm(windows[g.window].at(g.cell0, g.cell1), focal_gamma);
  }
  return sum / static_cast<double>(gt.size());
}

GtLayout LayoutFor(const Image& image0, const Image& image1, int window) {
  GtLayout layout;
  layout.coarse0 = {image0.height / 8, image0.width / 8};
  layout.coarse1 = {image1.height / 8, image1.width / 8};
  layout.fine0 = {image0.height / 2, image0.width / 2};
  layout.fine1 = {image1.height / 2, image1.width / 2};
  layout.image0_width = image0.original_width;
  layout.image0_height = image0.original_height;
  layout.image1_width = image1.original_width;
  layout.image1_height = image1.original_height;
  layout.window = window;
  return layout;
}

TrainingSample MakeTrainingSample(const Image& source, std::uint64_t seed,
                                  const HomographySamplerConfig& sampler,
                                  const PhotometricConfig& photometric,
                                  const SemanticProvider* provider, int window) {
  SyntheticPair pair = MakeSyntheticPair(source, seed, sampler, photometric);
  TrainingSample sample;
  sample.seed = seed;
  sample.h_gt = pair.h_gt;
  sample.image0 = PadToMultiple(pair.image0);
  sample.image1 = PadToMultiple(pair.image1);
  std::vector<std::uint8_t> content_mask(
      static_cast<std::size_t>(pair.image1.original_width) * pair.image1.original_height);
  for (int y = 0; y < pair.image1.original_height; ++y) {
    for (int x = 0; x < pair.image1.original_width; ++x) {
      content_mask[static_cast<std::size_t>(y) * pair.image1.original_width + x] =
          pair.mask[static_cast<std::size_t>(y) * pair.image1.width + x];
    }
  }
  sample.gt = GtMatches(pair.h_gt, LayoutFor(sample.image0, sample.image1, window), content_mask);
  if (provider != nullptr) {
    sample.semantic0 = provider->Extract(sample.image0, "");
    sample.semantic1 = provider->Extract(sample.image1, "");
  }
  return sample;
}

template <typename T>
std::optional<PairLoss<T>> BuildPairLoss(const BoundParams<T>& params,
                                         const TrainingSample& sample,
                                         const ModelConfig& model, const LossConfig& loss) {
  const GroundTruth& gt = sample.gt;
  if (gt.coarse.empty() || gt.fine.empty()) return std::nullopt;
  const ForwardVars<T> f = ModelForward(params, sample.image0, sample.image1, sample.semantic0,
                                        sample.semantic1, model);

  Var<T> scores = Scale(MatMul(f.coarse0, Transpose(f.coarse1)),
                        static_cast<T>(1.0 / loss.temperature));
  if (auto mask = PairMask<T>(ContentMask(f.grid0, 1.0 / 8, sample.image0),
                              ContentMask(f.grid1, 1.0 / 8, sample.image1))) {
    scores = AddConstant(scores, *mask);
  }
  const Var<T> p_c = DualSoftmax(scores);
  PairLoss<T> out;
  out.num_coarse = static_cast<int>(gt.coarse.size());
  out.num_fine = static_cast<int>(gt.fine.size());
  out.coarse = Scale(NllSum(GatherElements(p_c, gt.coarse), loss.focal_gamma),
                     static_cast<T>(1.0 / out.num_coarse));

  const std::vector<std::uint8_t> fine_valid0 = ContentMask(f.fine_grid0, 0.5, sample.image0);
  const std::vector<std::uint8_t> fine_valid1 = ContentMask(f.fine_grid1, 0.5, sample.image1);
  std::optional<Var<T>> fine_sum;
  std::size_t k = 0;
  while (k < gt.fine.size()) {
    const int m = gt.fine[k].window;
    std::vector<std::pair<int, int>> entries;
    for (; k < gt.fine.size() && gt.fine[k].window == m; ++k) {
      entries.emplace_back(gt.fine[k].cell0, gt.fine[k].cell1);
    }
    const auto [i, j] = gt.coarse[m];
    std::vector<std::uint8_t> v0, v1;
    const std::vector<int> rows0 = WindowRows(4 * (i % f.grid0.width), 4 * (i / f.grid0.width),
                                              loss.window, f.fine_grid0, fine_valid0, &v0);
    const std::vector<int> rows1 = WindowRows(4 * (j % f.grid1.width), 4 * (j / f.grid1.width),
                                              loss.window, f.fine_grid1, fine_valid1, &v1);
    Var<T> s = Scale(MatMul(GatherRows(f.fine0, rows0), Transpose(GatherRows(f.fine1, rows1))),
                     static_cast<T>(1.0 / loss.fine_temperature));
    if (auto mask = PairMask<T>(v0, v1)) s = AddConstant(s, *mask);
    const Var<T> term = NllSum(GatherElements(DualSoftmax(s), std::move(entries)),
                               loss.focal_gamma);
    fine_sum = fine_sum ? Add(*fine_sum, term) : term;
  }
  out.fine = Scale(*fine_sum, static_cast<T>(1.0 / out.num_fine));
  out.total = Add(out.coarse, out.fine);
  return out;
}

template std::optional<PairLoss<float>> BuildPairLoss(const BoundParams<float>&,
                                                      const TrainingSample&, const ModelConfig&,
                                                      const LossConfig&);
template std::optional<PairLoss<double>> BuildPairLoss(const BoundParams<double>&,
                                                       const TrainingSample&,
                                                       const ModelConfig&, const LossConfig&);

TrainResult TrainToy(const std::vector<ManifestEntry>& entries, const TrainConfig& config) {
  return TrainToy(entries, config, InitModelParams(config.model, config.seed));
}

TrainResult TrainToy(const std::vector<ManifestEntry>& entries, const TrainConfig& config,
                     ParamStore<float> initial) {
  if (config.model.ablation.semantic == SemanticMode::kFile) {
    throw Error(ErrorCode::kConfig, "training uses the toy semantic provider");
  }
  if (config.accumulate < 1) throw Error(ErrorCode::kConfig, "accumulate must be >= 1");
  TrainResult result;
  result.params = std::move(initial);
  std::optional<ToySemanticProvider> provider;
  if (!config.model.ablation.no_sfb) provider.emplace(config.model.semantic_channels);

  std::map<std::size_t, Image> sources;
  AdamState<float> state;
  std::vector<TensorF> accumulated;
  int pending = 0, step = 0;
  auto apply = [&] {
    if (pending == 0) return;
    for (TensorF& g : accumulated) {
      for (float& v : g.values()) v /= static_cast<float>(pending);
    }
    AdamStep(result.params, accumulated, state, config.adam);
    accumulated.clear();
    pending = 0;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_sum = 0.0;
    int epoch_count = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      auto it = sources.find(k);
      if (it == sources.end()) {
        it = sources.emplace(k, LoadSourceImage(entries[k], config.image_size)).first;
      }
      const std::uint64_t pair_seed = StreamSeed(entries[k].seed, static_cast<std::uint64_t>(epoch));
      auto fail = [&](const std::string& what) {
        const std::string message = what + " at epoch " + std::to_string(epoch) + " step " +
                                    std::to_string(step) + " (pair seed " +
                                    std::to_string(pair_seed) + ")";
        if (!config.checkpoint_dir.empty()) {
          std::ofstream dump(config.checkpoint_dir + "/nan_dump.txt", std::ios::trunc);
          dump << "epoch " << epoch << "\nstep " << step << "\nentry " << k << "\npair_seed "
               << pair_seed << "\n";
        }
        return Error(ErrorCode::kNonFinite, message);
      };
      const TrainingSample sample =
          MakeTrainingSample(it->second, pair_seed, config.sampler, config.photometric,
                             provider ? &*provider : nullptr, config.loss.window);
      Tape<float> tape;
      std::optional<BoundParams<float>> bound;
      std::optional<PairLoss<float>> loss;
      try {
        bound.emplace(tape, result.params, /*trainable=*/true);
        loss = BuildPairLoss(*bound, sample, config.model, config.loss);
        if (loss) tape.Backward(loss->total);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNonFinite) throw fail(std::string("non-finite loss: ") + e.what());
        throw;
      }
      if (!loss) {
        ++result.skipped;
        continue;
      }
      std::vector<TensorF> grads = bound->Gradients();
      if (!AllFinite(grads)) throw fail("non-finite gradient");
      if (accumulated.empty()) {
        accumulated = std::move(grads);
      } else {
        for (std::size_t g = 0; g < grads.size(); ++g) {
          auto dst = accumulated[g].values();
          auto src = grads[g].values();
          for (std::size_t v = 0; v < dst.size(); ++v) dst[v] += src[v];
        }
      }
      if (++pending == config.accumulate) apply();

      LossLogRow row{epoch, step++, loss->coarse.value()[0], loss->fine.value()[0],
                     loss->total.value()[0]};
      epoch_sum += row.total;
      ++epoch_count;
      result.log.push_back(row);
      if (config.on_step) config.on_step(row);
    }
    apply();
    result.epoch_mean_total.push_back(epoch_count > 0 ? epoch_sum / epoch_count : 0.0);
    if (!config.checkpoint_dir.empty() && config.checkpoint_every > 0 &&
        ((epoch + 1) % config.checkpoint_every == 0 || epoch + 1 == config.epochs)) {
      SaveCheckpoint(config.checkpoint_dir, result.params, config.model);
    }
  }
  return result;
}

std::string FormatLossLog(const std::vector<LossLogRow>& rows) {
  std::string out = "epoch,step,L_c,L_f,L_total\n";
  char line[160];
  for (const LossLogRow& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%.9g,%.9g,%.9g\n", r.epoch, r.step, r.coarse,
                  r.fine, r.total);
    out += line;
  }
  return out;
}

}  // namespace semmatch
