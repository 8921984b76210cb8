// Command-line front end: match, eval, synth, train, selftest, export-plots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles/selftest.h"
#include "semmatch/checkpoint.h"
#include "semmatch/error.h"
#include "semmatch/eval.h"
#include "semmatch/homography.h"
#include "semmatch/image.h"
#include "semmatch/matching.h"
#include "semmatch/model.h"
#include "semmatch/pipeline.h"
#include "semmatch/random.h"
#include "semmatch/ransac.h"
#include "semmatch/synth.h"
#include "semmatch/training.h"

namespace fs = std::filesystem;
using namespace semmatch;

namespace {

std::vector<std::string> SplitFlags(const std::string& text) {
  std::vector<std::string> flags;
  std::stringstream in(text);
  for (std::string f; std::getline(in, f, ',');) {
    if (!f.empty()) flags.push_back(f);
  }
  return flags;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Model from a checkpoint, or freshly initialized; `ablation` overrides the
// stored variant at inference time.
struct ModelOptions {
  std::string checkpoint;
  std::string ablation;
  std::string semantic_dir;
  std::uint64_t init_seed = 0;
};

std::unique_ptr<MatchPipeline> BuildPipeline(const ModelOptions& options) {
  ModelConfig config;
  ParamStore<float> params;
  if (!options.checkpoint.empty()) {
    Checkpoint ckpt = LoadCheckpoint(options.checkpoint);
    config = ckpt.config;
    params = std::move(ckpt.params);
  }
  std::vector<std::string> flags = SplitFlags(options.ablation);
  if (!options.semantic_dir.empty()) flags.push_back("file_semantic");
  if (!flags.empty()) {
    const AblationFlags requested = ConfigureAblation(flags);
    if (!options.checkpoint.empty() && config.ablation.no_sfb && !requested.no_sfb) {
      throw Error(ErrorCode::kConfig, "checkpoint was trained without the fusion block");
    }
    config.ablation = requested;
  }
  if (options.checkpoint.empty()) params = InitModelParams(config, options.init_seed);
  std::shared_ptr<const SemanticProvider> provider;
  if (!config.ablation.no_sfb) {
    provider = MakeSemanticProvider(options.semantic_dir, config.semantic_channels);
  }
  return std::make_unique<MatchPipeline>(std::move(params), config, MatchingConfig{},
                                         std::move(provider));
}

void AddModelOptions(CLI::App* cmd, ModelOptions& options) {
  cmd->add_option("--checkpoint", options.checkpoint, "Checkpoint directory");
  cmd->add_option("--ablation", options.ablation,
                  "Comma-separated variant flags: no_sfb, no_cross, no_overlap");
  cmd->add_option("--semantic-dir", options.semantic_dir,
                  "Directory of <image_id>.srmt semantic grids (default: toy provider)");
  cmd->add_option("--init-seed", options.init_seed, "Parameter seed when no checkpoint is given");
}

int RunMatch(const std::string& path0, const std::string& path1, const ModelOptions& model,
             const std::string& out, const std::string& h_out, std::uint64_t seed) {
  const std::unique_ptr<MatchPipeline> pipeline = BuildPipeline(model);
  const Image image0 = LoadImage(path0), image1 = LoadImage(path1);
  const MatchResult result = pipeline->Run(image0, image1, fs::path(path0).stem().string(),
                                           fs::path(path1).stem().string());
  std::cerr << result.coarse.size() << " coarse, " << result.fine.size() << " fine matches\n";
  if (!out.empty()) WriteMatchesFile(out, result.fine);
  if (!h_out.empty()) {
    std::vector<Correspondence> corr;
    for (const FineMatch& m : result.fine) corr.push_back({m.p0, m.p1, 1.0});
    RansacOptions options;
    options.seed = seed;
    const RansacResult r = RansacHomography(corr, options);
    std::cerr << r.num_inliers << " inliers\n";
    WriteHomographyFile(h_out, r.model);
  }
  if (out.empty() && h_out.empty()) std::cout << FormatMatches(result.fine);
  return 0;
}

struct EvalOptions {
  std::string dataset;
  std::string report;
  std::uint64_t seed = 0;
  int resize_cap = 128;
  int image_size = 64;
  bool bypass = false;
  bool timing = false;
  int threads = 0;
};

int RunEval(const EvalOptions& options, const ModelOptions& model) {
  std::vector<EvalPair> pairs;
  if (fs::is_directory(options.dataset)) {
    const HpatchesDataset dataset = LoadHpatchesDir(options.dataset);
    for (const std::string& w : dataset.warnings) std::cerr << "warning: " << w << "\n";
    pairs = MakeEvalPairs(dataset, options.resize_cap);
  } else {
    pairs = MakeSyntheticEvalPairs(ReadManifest(options.dataset), options.image_size,
                                   HomographySamplerConfig{}, PhotometricConfig{});
  }
  std::unique_ptr<MatchPipeline> pipeline;
  if (!options.bypass) pipeline = BuildPipeline(model);
  EvalConfig config;
  config.seed = options.seed;
  config.bypass = options.bypass;
  config.timing = options.timing;
  config.threads = options.threads;
  const EvalReport report =
      Evaluate(pairs, pipeline.get(), config, fs::path(options.dataset).filename().string());
  const std::string json = ReportToJson(report);
  if (options.report.empty()) {
    std::cout << json;
  } else {
    WriteTextFile(options.report, json);
  }
  std::fprintf(stderr, "pairs %d (failed %d)  AUC@1 %.2f  @3 %.2f  @5 %.2f  @10 %.2f\n",
               report.pairs_total, report.pairs_failed, report.auc[0], report.auc[1],
               report.auc[2], report.auc[3]);
  return 0;
}

int RunSynth(int sequences, std::uint64_t seed, const std::string& out, int size) {
  const HomographySamplerConfig sampler;
  const PhotometricConfig photometric;
  for (int s = 0; s < sequences; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "s_%03d", s);
    const fs::path dir = fs::path(out) / name;
    fs::create_directories(dir);
    const std::uint64_t seq_seed = StreamSeed(seed, static_cast<std::uint64_t>(s));
    const Image source = ProceduralImage(seq_seed, size, size);
    SavePgm((dir / "1.pgm").string(), source);
    for (int k = 2; k <= 6; ++k) {
      const SyntheticPair pair =
          MakeSyntheticPair(source, StreamSeed(seq_seed, static_cast<std::uint64_t>(k)), sampler,
                            photometric);
      SavePgm((dir / (std::to_string(k) + ".pgm")).string(), pair.image1);
      WriteHomographyFile((dir / ("H_1_" + std::to_string(k))).string(), pair.h_gt);
    }
  }
  std::cerr << "wrote " << sequences << " sequences to " << out << "\n";
  return 0;
}

struct TrainOptions {
  std::string manifest;
  std::string out;
  std::string log;
  std::string ablation;
  int epochs = 15;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int accumulate = 1;
  int focal_gamma = 0;
  int image_size = 64;
};

int RunTrain(const TrainOptions& options) {
  TrainConfig config;
  config.model.ablation = ConfigureAblation(SplitFlags(options.ablation));
  config.epochs = options.epochs;
  config.seed = options.seed;
  config.adam.learning_rate = options.learning_rate;
  config.accumulate = options.accumulate;
  config.loss.focal_gamma = options.focal_gamma;
  config.image_size = options.image_size;
  config.checkpoint_dir = options.out;
  config.on_step = [](const LossLogRow& row) {
    if (row.step % 50 == 0) {
      std::fprintf(stderr, "epoch %d step %d  L_c %.4f  L_f %.4f  L_total %.4f\n", row.epoch,
                   row.step, row.coarse, row.fine, row.total);
    }
  };
  const TrainResult result = TrainToy(ReadManifest(options.manifest), config);
  SaveCheckpoint(options.out, result.params, config.model);
  const std::string log = FormatLossLog(result.log);
  WriteTextFile(options.log.empty() ? (fs::path(options.out) / "loss_log.csv").string()
                                    : options.log,
                log);
  for (std::size_t e = 0; e < result.epoch_mean_total.size(); ++e) {
    std::fprintf(stderr, "epoch %zu mean L_total %.4f\n", e, result.epoch_mean_total[e]);
  }
  return 0;
}

int RunExportPlots(const std::string& report_path, const std::string& csv) {
  const EvalReport report = ReportFromJson(ReadTextFile(report_path));
  WriteTextFile(csv, CumulativeCurveCsv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-aware detector-free matching for homography estimation"};
  app.require_subcommand(1);

  ModelOptions match_model;
  std::string match0, match1, match_out, match_h;
  std::uint64_t match_seed = 0;
  CLI::App* match = app.add_subcommand("match", "Match two images");
  match->add_option("image0", match0, "First image (PGM/PPM)")->required();
  match->add_option("image1", match1, "Second image (PGM/PPM)")->required();
  AddModelOptions(match, match_model);
  match->add_option("--out", match_out, "Match dump (x0 y0 x1 y1 confidence)");
  match->add_option("--homography-out", match_h, "Estimated homography text file");
  match->add_option("--seed", match_seed, "RANSAC seed");

  ModelOptions eval_model;
  EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate homography estimation");
  eval->add_option("--dataset", eval_options.dataset, "HPatches-layout directory or manifest")
      ->required();
  AddModelOptions(eval, eval_model);
  eval->add_option("--report", eval_options.report, "JSON report path (default stdout)");
  eval->add_option("--seed", eval_options.seed, "RANSAC seed");
  eval->add_option("--resize-cap", eval_options.resize_cap,
                   "Shorter image side cap in pixels, 0 keeps the size");
  eval->add_option("--image-size", eval_options.image_size, "Side of manifest images");
  eval->add_flag("--bypass", eval_options.bypass, "Use ground truth as the estimate");
  eval->add_flag("--timing", eval_options.timing, "Record per-pair wall-clock time");
  eval->add_option("--threads", eval_options.threads, "Worker threads (default SEMMATCH_THREADS)");

  int synth_n = 10, synth_size = 64;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic HPatches-layout dataset");
  synth->add_option("--n", synth_n, "Number of sequences")->required();
  synth->add_option("--seed", synth_seed, "Master seed");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--size", synth_size, "Image side in pixels");

  TrainOptions train_options;
  CLI::App* train = app.add_subcommand("train", "Train on synthetic homography pairs");
  train->add_option("--manifest", train_options.manifest, "Dataset manifest")->required();
  train->add_option("--epochs", train_options.epochs, "Epochs");
  train->add_option("--out", train_options.out, "Checkpoint directory")->required();
  train->add_option("--seed", train_options.seed, "Master seed");
  train->add_option("--log", train_options.log, "Loss CSV (default <out>/loss_log.csv)");
  train->add_option("--ablation", train_options.ablation, "Variant flags");
  train->add_option("--lr", train_options.learning_rate, "Adam learning rate");
  train->add_option("--accumulate", train_options.accumulate, "Pairs per optimizer step");
  train->add_option("--focal-gamma", train_options.focal_gamma, "Focal exponent, 0 disables");
  train->add_option("--image-size", train_options.image_size, "Training image side");

  CLI::App* selftest = app.add_subcommand("selftest", "Run the oracle suites");

  std::string plot_report, plot_csv;
  CLI::App* plots = app.add_subcommand("export-plots", "Cumulative error curve as CSV");
  plots->add_option("--report", plot_report, "JSON report")->required();
  plots->add_option("--csv", plot_csv, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*match) return RunMatch(match0, match1, match_model, match_out, match_h, match_seed);
    if (*eval) return RunEval(eval_options, eval_model);
    if (*synth) return RunSynth(synth_n, synth_seed, synth_out, synth_size);
    if (*train) return RunTrain(train_options);
    if (*selftest) return oracles::RunSelfTest(std::cout) ? 0 : 1;
    if (*plots) return RunExportPlots(plot_report, plot_csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
