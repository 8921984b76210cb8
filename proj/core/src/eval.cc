#include "semmatch/eval.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "semmatch/checkpoint.h"
#include "semmatch/error.h"
#include "semmatch/metrics.h"
#include "semmatch/parallel.h"
#include "semmatch/random.h"
#include "semmatch/ransac.h"

namespace semmatch {
namespace fs = std::filesystem;
namespace {

std::optional<fs::path> FindImage(const fs::path& dir, int index) {
  for (const char* ext : {".ppm", ".pgm"}) {
    const fs::path p = dir / (std::to_string(index) + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::string SequenceTag(const std::string& name) {
  if (name.rfind("i_", 0) == 0) return "illumination";
  if (name.rfind("v_", 0) == 0) return "viewpoint";
  return "synthetic";
}

// Pixel map of a half-pixel-centred resize from `from` to `to` samples.
Eigen::Matrix3d ResizeMatrix(int from_w, int from_h, int to_w, int to_h) {
  const double sx = static_cast<double>(to_w) / from_w;
  const double sy = static_cast<double>(to_h) / from_h;
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  s(0, 0) = sx;
  s(0, 2) = 0.5 * sx - 0.5;
  s(1, 1) = sy;
  s(1, 2) = 0.5 * sy - 0.5;
  return s;
}

Image ResizeToCap(const Image& image, int cap, Eigen::Matrix3d* map) {
  const int w = image.original_width, h = image.original_height;
  const int shorter = std::min(w, h);
  if (cap <= 0 || shorter <= cap) {
    *map = Eigen::Matrix3d::Identity();
    return image;
  }
  const double scale = static_cast<double>(cap) / shorter;
  const int nw = std::max(1, static_cast<int>(std::lround(w * scale)));
  const int nh = std::max(1, static_cast<int>(std::lround(h * scale)));
  *map = ResizeMatrix(w, h, nw, nh);
  return PadToMultiple(ResizeImage(image, nw, nh));
}

void HashBytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void HashString(std::uint64_t& h, const std::string& s) { HashBytes(h, s.data(), s.size()); }

}  // namespace

HpatchesDataset LoadHpatchesDir(const std::string& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kDataset, "dataset directory '" + root + "' does not exist");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  HpatchesDataset dataset;
  for (const fs::path& dir : dirs) {
    const std::string name = dir.filename().string();
    const auto reference = FindImage(dir, 1);
    if (!reference) {
      dataset.warnings.push_back(name + ": missing reference image 1");
      continue;
    }
    SequenceRecord record{name, SequenceTag(name), reference->string(), {}};
    for (int k = 2; k <= 6; ++k) {
      const auto target = FindImage(dir, k);
      const fs::path h_path = dir / ("H_1_" + std::to_string(k));
      if (!target || !fs::is_regular_file(h_path)) {
        dataset.warnings.push_back(name + ": pair 1-" + std::to_string(k) + " incomplete");
        continue;
      }
      try {
        record.targets.push_back({k, target->string(), ReadHomographyFile(h_path.string())});
      } catch (const Error& e) {
        dataset.warnings.push_back(name + ": " + e.what());
      }
    }
    if (record.targets.empty()) {
      dataset.warnings.push_back(name + ": no usable pairs");
      continue;
    }
    dataset.sequences.push_back(std::move(record));
  }
  if (dataset.sequences.empty()) {
    throw Error(ErrorCode::kDataset, "no valid sequences under '" + root + "'");
  }
  return dataset;
}

std::vector<EvalPair> MakeEvalPairs(const HpatchesDataset& dataset, int max_short_side) {
  std::vector<EvalPair> pairs;
  for (const SequenceRecord& seq : dataset.sequences) {
    Eigen::Matrix3d s0;
    const Image image0 = ResizeToCap(LoadImage(seq.reference_path), max_short_side, &s0);
    for (const SequenceTarget& t : seq.targets) {
      Eigen::Matrix3d s1;
      EvalPair pair;
      pair.sequence = seq.name;
      pair.pair = t.index;
      pair.id0 = seq.name + "/1";
      pair.id1 = seq.name + "/" + std::to_string(t.index);
      pair.image0 = image0;
      pair.image1 = ResizeToCap(LoadImage(t.image_path), max_short_side, &s1);
      pair.h_gt = Homography(s1 * t.h_gt.matrix() * s0.inverse());
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

std::vector<EvalPair> MakeSyntheticEvalPairs(const std::vector<ManifestEntry>& entries,
                                             int image_size,
                                             const HomographySamplerConfig& sampler,
                                             const PhotometricConfig& photometric) {
  std::vector<EvalPair> pairs;
  pairs.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const SyntheticPair s =
        MakeSyntheticPair(LoadSourceImage(entries[k], image_size), entries[k].seed, sampler,
                          photometric);
    EvalPair pair;
    pair.sequence = "synthetic";
    pair.pair = static_cast<int>(k);
    pair.id0 = "synthetic/" + std::to_string(k) + "_0";
    pair.id1 = "synthetic/" + std::to_string(k) + "_1";
    pair.image0 = PadToMultiple(s.image0);
    pair.image1 = PadToMultiple(s.image1);
    pair.h_gt = s.h_gt;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void Summarize(EvalReport& report) {
  std::vector<double> errors;
  report.pairs_total = static_cast<int>(report.per_pair.size());
  report.pairs_succeeded = 0;
  for (const PairOutcome& o : report.per_pair) {
    errors.push_back(o.error_px);
    if (o.failure.empty()) ++report.pairs_succeeded;
  }
  report.pairs_failed = report.pairs_total - report.pairs_succeeded;
  for (std::size_t t = 0; t < kAucThresholds.size(); ++t) {
    report.auc[t] = errors.empty() ? 0.0 : 100.0 * Auc(errors, kAucThresholds[t]);
  }
}

EvalReport Evaluate(const std::vector<EvalPair>& pairs, const MatchPipeline* pipeline,
                    const EvalConfig& config, const std::string& dataset_name) {
  if (!config.bypass && pipeline == nullptr) {
    throw Error(ErrorCode::kConfig, "evaluation needs a pipeline unless in bypass mode");
  }
  EvalReport report;
  report.dataset = dataset_name;
  report.config_hash = ConfigHash(config.bypass ? nullptr : pipeline, config);
  report.ablation = config.bypass ? "bypass" : AblationName(pipeline->model_config().ablation);
  report.timing = config.timing;
  report.per_pair.resize(pairs.size());

  ParallelFor(static_cast<int>(pairs.size()), ResolveThreadCount(config.threads), [&](int k) {
    const EvalPair& p = pairs[k];
    PairOutcome& out = report.per_pair[k];
    out.sequence = p.sequence;
    out.pair = p.pair;
    const auto start = std::chrono::steady_clock::now();
    const int w = p.image0.original_width, h = p.image0.original_height;
    if (config.bypass) {
      out.error_px = CornerError(p.h_gt, p.h_gt, w, h);
    } else {
      const MatchResult matches = pipeline->Run(p.image0, p.image1, p.id0, p.id1);
      out.num_matches = static_cast<int>(matches.fine.size());
      std::vector<Correspondence> corr;
      corr.reserve(matches.fine.size());
      for (const FineMatch& m : matches.fine) corr.push_back({m.p0, m.p1, 1.0});
      if (corr.size() < 4) {
        out.failure = "fewer than 4 matches";
      } else {
        RansacOptions options;
        options.inlier_threshold = config.ransac_threshold;
        options.max_iterations = config.ransac_max_iterations;
        options.confidence = config.ransac_confidence;
        options.seed = StreamSeed(config.seed, static_cast<std::uint64_t>(k));
        try {
          const RansacResult r = RansacHomography(corr, options);
          out.num_inliers = r.num_inliers;
          out.error_px = CornerError(r.model, p.h_gt, w, h);
          if (!std::isfinite(out.error_px)) out.failure = "non-finite corner error";
        } catch (const Error& e) {
          out.failure = e.what();
        }
      }
      if (!out.failure.empty()) out.error_px = std::numeric_limits<double>::infinity();
    }
    out.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            start).count();
  });
  Summarize(report);
  return report;
}

std::string ConfigHash(const MatchPipeline* pipeline, const EvalConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "ransac %.17g %d %.17g seed %llu bypass %d",
                config.ransac_threshold, config.ransac_max_iterations, config.ransac_confidence,
                static_cast<unsigned long long>(config.seed), config.bypass ? 1 : 0);
  HashString(h, buf);
  if (pipeline != nullptr) {
    HashString(h, FormatModelConfig(pipeline->model_config()));
    const MatchingConfig& m = pipeline->matching_config();
    std::snprintf(buf, sizeof(buf), "match %.17g %.17g %d %.17g %.17g", m.temperature,
                  m.coarse_threshold, m.window, m.fine_temperature, m.fine_threshold);
    HashString(h, buf);
    const ParamStore<float>& params = pipeline->params();
    for (int i = 0; i < params.size(); ++i) {
      HashString(h, params.name(i));
      const auto values = params.value(i).values();
      HashBytes(h, values.data(), values.size_bytes());
    }
  }
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ReportToJson(const EvalReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["dataset"] = report.dataset;
  j["config_hash"] = report.config_hash;
  j["ablation"] = report.ablation;
  j["pairs_total"] = report.pairs_total;
  j["pairs_succeeded"] = report.pairs_succeeded;
  j["pairs_failed"] = report.pairs_failed;
  ordered_json auc;
  for (std::size_t t = 0; t < kAucThresholds.size(); ++t) {
    auc[std::to_string(static_cast<int>(kAucThresholds[t]))] = report.auc[t];
  }
  j["auc"] = auc;
  ordered_json failures = ordered_json::array();
  ordered_json per_pair = ordered_json::array();
  for (const PairOutcome& o : report.per_pair) {
    ordered_json row;
    row["seq"] = o.sequence;
    row["pair"] = o.pair;
    row["error_px"] = o.failure.empty() ? ordered_json(o.error_px) : ordered_json(nullptr);
    row["num_matches"] = o.num_matches;
    row["num_inliers"] = o.num_inliers;
    if (report.timing) row["time_ms"] = o.time_ms;
    per_pair.push_back(row);
    if (!o.failure.empty()) {
      failures.push_back({{"seq", o.sequence}, {"pair", o.pair}, {"reason", o.failure}});
    }
  }
  j["failures"] = failures;
  j["per_pair"] = per_pair;
  return j.dump(2) + "\n";
}

EvalReport ReportFromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("report is not valid JSON: ") + e.what());
  }
  EvalReport report;
  try {
    report.dataset = j.at("dataset").get<std::string>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.ablation = j.value("ablation", "");
    std::map<std::pair<std::string, int>, std::string> reasons;
    for (const auto& f : j.at("failures")) {
      reasons[{f.at("seq").get<std::string>(), f.at("pair").get<int>()}] =
          f.at("reason").get<std::string>();
    }
    for (const auto& row : j.at("per_pair")) {
      PairOutcome o;
      o.sequence = row.at("seq").get<std::string>();
      o.pair = row.at("pair").get<int>();
      o.num_matches = row.value("num_matches", 0);
      o.num_inliers = row.value("num_inliers", 0);
      if (row.contains("time_ms")) {
        o.time_ms = row.at("time_ms").get<double>();
        report.timing = true;
      }
      if (row.at("error_px").is_null()) {
        o.error_px = std::numeric_limits<double>::infinity();
        const auto it = reasons.find({o.sequence, o.pair});
        o.failure = it != reasons.end() ? it->second : "failed";
      } else {
        o.error_px = row.at("error_px").get<double>();
      }
      report.per_pair.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed report: ") + e.what());
  }
  Summarize(report);
  return report;
}

std::string CumulativeCurveCsv(const EvalReport& report, double max_threshold, double step) {
  std::vector<double> errors;
  for (const PairOutcome& o : report.per_pair) errors.push_back(o.error_px);
  std::string out = "threshold_px,recall\n";
  char line[64];
  const int n = static_cast<int>(std::lround(max_threshold / step));
  for (int k = 0; k <= n; ++k) {
    const double t = k * step;
    std::snprintf(line, sizeof(line), "%.3f,%.6f\n", t, errors.empty() ? 0.0 : RecallAt(errors, t));
    out += line;
  }
  return out;
}

}  // namespace semmatch
