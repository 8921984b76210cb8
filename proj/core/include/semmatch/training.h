#ifndef SEMMATCH_TRAINING_H_
#define SEMMATCH_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semmatch/adam.h"
#include "semmatch/autodiff.h"
#include "semmatch/feature_map.h"
#include "semmatch/image.h"
#include "semmatch/matching.h"
#include "semmatch/model.h"
#include "semmatch/param_store.h"
#include "semmatch/semantic.h"
#include "semmatch/synth.h"

namespace semmatch {

inline constexpr double kConfidenceFloor = 1e-6;

struct LossConfig {
  double temperature = 0.1;
  double fine_temperature = 0.1;
  int window = 5;
  // 0 disables focal modulation; otherwise each term is scaled by (1 - P)^gamma.
  int focal_gamma = 0;
};

// -(1/|G|) sum log clamp(P(i, j)); nullopt when the GT set is empty.
std::optional<double> LossCoarse(const ConfidenceMatrix& p,
                                 std::span<const std::pair<int, int>> gt, int focal_gamma = 0);
// Pooled over all windows; `windows[k]` is the confidence of GT window k.
std::optional<double> LossFine(const std::vector<ConfidenceMatrix>& windows,
                               std::span<const FineGtMatch> gt, int focal_gamma = 0);

struct LossReport {
  double coarse = 0.0;
  double fine = 0.0;
  double total = 0.0;
  int num_coarse = 0;
  int num_fine = 0;
};

// One pair with its frozen semantic maps and ground truth.
struct TrainingSample {
  Image image0;
  Image image1;
  FeatureMap semantic0;
  FeatureMap semantic1;
  Homography h_gt;
  GroundTruth gt;
  std::uint64_t seed = 0;
};

GtLayout LayoutFor(const Image& image0, const Image& image1, int window);

TrainingSample MakeTrainingSample(const Image& source, std::uint64_t seed,
                                  const HomographySamplerConfig& sampler,
                                  const PhotometricConfig& photometric,
                                  const SemanticProvider* provider, int window);

template <typename T>
struct PairLoss {
  Var<T> coarse;
  Var<T> fine;
  Var<T> total;  // coarse + fine
  int num_coarse = 0;
  int num_fine = 0;
};

// Loss graph of one sample on the params' tape; nullopt when G_c or G_f is
// empty (the sample is skipped).
template <typename T>
std::optional<PairLoss<T>> BuildPairLoss(const BoundParams<T>& params,
                                         const TrainingSample& sample,
                                         const ModelConfig& model, const LossConfig& loss);

struct LossLogRow {
  int epoch = 0;
  int step = 0;
  double coarse = 0.0;
  double fine = 0.0;
  double total = 0.0;
};

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  AdamOptions adam;
  int epochs = 15;
  int image_size = 64;
  std::uint64_t seed = 0;
  int accumulate = 1;  // samples per optimizer step
  HomographySamplerConfig sampler;
  PhotometricConfig photometric;
  std::string checkpoint_dir;  // empty disables checkpoints
  int checkpoint_every = 1;    // epochs
  std::function<void(const LossLogRow&)> on_step;
};

struct TrainResult {
  ParamStore<float> params;
  std::vector<LossLogRow> log;
  std::vector<double> epoch_mean_total;
  int skipped = 0;
};

// Every epoch visits the entries in manifest order; the pair for entry k in
// epoch e is generated from StreamSeed(entry.seed, e). Throws kNonFinite
// naming the pair seed when the loss or a gradient is not finite.
TrainResult TrainToy(const std::vector<ManifestEntry>& entries, const TrainConfig& config);
TrainResult TrainToy(const std::vector<ManifestEntry>& entries, const TrainConfig& config,
                     ParamStore<float> initial);

// CSV with header `epoch,step,L_c,L_f,L_total`.
std::string FormatLossLog(const std::vector<LossLogRow>& rows);

}  // namespace semmatch

#endif  // SEMMATCH_TRAINING_H_
