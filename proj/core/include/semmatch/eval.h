#ifndef SEMMATCH_EVAL_H_
#define SEMMATCH_EVAL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semmatch/homography.h"
#include "semmatch/image.h"
#include "semmatch/pipeline.h"
#include "semmatch/synth.h"

namespace semmatch {

inline constexpr std::array<double, 4> kAucThresholds = {1.0, 3.0, 5.0, 10.0};

struct SequenceTarget {
  int index = 0;  // image number, 2..6
  std::string image_path;
  Homography h_gt;
};

struct SequenceRecord {
  std::string name;
  std::string tag;  // illumination, viewpoint or synthetic
  std::string reference_path;
  std::vector<SequenceTarget> targets;
};

struct HpatchesDataset {
  std::vector<SequenceRecord> sequences;
  std::vector<std::string> warnings;  // skipped sequences and pairs
};

// One folder per sequence with images 1..6 (.ppm or .pgm) and H_1_2..H_1_6.
// Throws kDataset when no sequence is usable.
HpatchesDataset LoadHpatchesDir(const std::string& root);

// A pair ready for evaluation, in the coordinates of the (resized) images.
struct EvalPair {
  std::string sequence;
  int pair = 0;
  std::string id0, id1;  // semantic image ids
  Image image0, image1;  // padded
  Homography h_gt;
};

// Resizes so the shorter side is at most `max_short_side` (0 keeps the size)
// and conjugates the homography accordingly.
std::vector<EvalPair> MakeEvalPairs(const HpatchesDataset& dataset, int max_short_side);

// Held-out synthetic pairs, sequence "synthetic", pair = entry index.
std::vector<EvalPair> MakeSyntheticEvalPairs(const std::vector<ManifestEntry>& entries,
                                             int image_size,
                                             const HomographySamplerConfig& sampler,
                                             const PhotometricConfig& photometric);

struct EvalConfig {
  double ransac_threshold = 3.0;
  int ransac_max_iterations = 2000;
  double ransac_confidence = 0.9999;
  std::uint64_t seed = 0;
  bool bypass = false;  // use the GT homography as the estimate
  bool timing = false;  // record wall-clock per pair in the report
  int threads = 0;
};

struct PairOutcome {
  std::string sequence;
  int pair = 0;
  double error_px = 0.0;  // +inf on failure
  int num_matches = 0;
  int num_inliers = 0;
  double time_ms = 0.0;
  std::string failure;  // empty on success
};

struct EvalReport {
  std::string dataset;
  std::string config_hash;
  std::string ablation;
  std::vector<PairOutcome> per_pair;
  std::array<double, 4> auc{};  // percentages at kAucThresholds
  int pairs_total = 0;
  int pairs_succeeded = 0;
  int pairs_failed = 0;
  bool timing = false;
};

// Runs match -> RANSAC -> corner error for every pair; the RANSAC stream of
// pair k is StreamSeed(seed, k). `pipeline` may be null in bypass mode.
EvalReport Evaluate(const std::vector<EvalPair>& pairs, const MatchPipeline* pipeline,
                    const EvalConfig& config, const std::string& dataset_name);

// Fills AUCs and counters from per_pair.
void Summarize(EvalReport& report);

// FNV-1a over model config, matching config, eval config and parameters.
std::string ConfigHash(const MatchPipeline* pipeline, const EvalConfig& config);

std::string ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const std::string& text);

// `threshold_px,recall` rows of the cumulative error curve, 0.1 px steps.
std::string CumulativeCurveCsv(const EvalReport& report, double max_threshold = 10.0,
                               double step = 0.1);

}  // namespace semmatch

#endif  // SEMMATCH_EVAL_H_
