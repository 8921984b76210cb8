#include "semmatch/checkpoint.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semmatch/error.h"
#include "semmatch/tensor_io.h"

namespace semmatch {
namespace {

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path.string() + "'");
}

int ParseInt(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kConfig, "config key '" + key + "' expects an integer, got '" + value + "'");
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::kConfig, "config key '" + key + "' expects a boolean, got '" + value + "'");
}

}  // namespace

std::string FormatModelConfig(const ModelConfig& c) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "stem_channels = " << c.backbone.stem_channels << "\n"
      << "mid_channels = " << c.backbone.mid_channels << "\n"
      << "coarse_channels = " << c.backbone.coarse_channels << "\n"
      << "fine_channels = " << c.backbone.fine_channels << "\n"
      << "semantic_channels = " << c.semantic_channels << "\n"
      << "enhancer_layers = " << c.enhancer_layers << "\n"
      << "stage2_repeats = " << c.stage2_repeats << "\n"
      << "no_sfb = " << b(c.ablation.no_sfb) << "\n"
      << "no_cross_image_fusion = " << b(c.ablation.no_cross_image_fusion) << "\n"
      << "no_overlap_fine = " << b(c.ablation.no_overlap_fine) << "\n"
      << "semantic = " << (c.ablation.semantic == SemanticMode::kFile ? "file" : "toy") << "\n";
  return out.str();
}

ModelConfig ParseModelConfig(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::kConfig, "bad config line '" + line + "'");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto z = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "stem_channels") c.backbone.stem_channels = ParseInt(key, value);
    else if (key == "mid_channels") c.backbone.mid_channels = ParseInt(key, value);
    else if (key == "coarse_channels") c.backbone.coarse_channels = ParseInt(key, value);
    else if (key == "fine_channels") c.backbone.fine_channels = ParseInt(key, value);
    else if (key == "semantic_channels") c.semantic_channels = ParseInt(key, value);
    else if (key == "enhancer_layers") c.enhancer_layers = ParseInt(key, value);
    else if (key == "stage2_repeats") c.stage2_repeats = ParseInt(key, value);
    else if (key == "no_sfb") c.ablation.no_sfb = ParseBool(key, value);
    else if (key == "no_cross_image_fusion") c.ablation.no_cross_image_fusion = ParseBool(key, value);
    else if (key == "no_overlap_fine") c.ablation.no_overlap_fine = ParseBool(key, value);
    else if (key == "semantic") {
      if (value == "toy") c.ablation.semantic = SemanticMode::kToy;
      else if (value == "file") c.ablation.semantic = SemanticMode::kFile;
      else throw Error(ErrorCode::kConfig, "semantic must be toy or file");
    } else {
      throw Error(ErrorCode::kConfig, "unknown config key '" + key + "'");
    }
  }
  return c;
}

void SaveCheckpoint(const std::string& directory, const ParamStore<float>& params,
                    const ModelConfig& config) {
  const std::filesystem::path dir(directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + directory + "': " + ec.message());
  std::ostringstream manifest;
  for (int i = 0; i < params.size(); ++i) {
    const std::string file = params.name(i) + ".srmt";
    WriteTensorFile((dir / file).string(), params.value(i));
    manifest << params.name(i) << " " << file;
    for (int d : params.value(i).shape()) manifest << " " << d;
    manifest << "\n";
  }
  WriteText(dir / "manifest.txt", manifest.str());
  WriteText(dir / "config.txt", FormatModelConfig(config));
}

Checkpoint LoadCheckpoint(const std::string& directory) {
  const std::filesystem::path dir(directory);
  Checkpoint ckpt;
  ckpt.config = ParseModelConfig(ReadText(dir / "config.txt"));
  const ParamStore<float> reference = InitModelParams(ckpt.config, 0);

  std::map<std::string, TensorF> loaded;
  std::istringstream manifest(ReadText(dir / "manifest.txt"));
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream fields(line);
    std::string name, file;
    if (!(fields >> name >> file)) continue;
    std::vector<int> shape;
    for (int d; fields >> d;) shape.push_back(d);
    TensorF t = ReadTensorFile((dir / file).string());
    if (t.shape() != shape) {
      throw Error(ErrorCode::kFormat, "checkpoint blob '" + file + "' has shape " +
                                          ShapeToString(t.shape()) + ", manifest says " +
                                          ShapeToString(shape));
    }
    if (!t.AllFinite()) throw Error(ErrorCode::kNonFinite, "checkpoint blob '" + file + "' is not finite");
    loaded.emplace(name, std::move(t));
  }
  for (int i = 0; i < reference.size(); ++i) {
    const auto it = loaded.find(reference.name(i));
    if (it == loaded.end()) {
      throw Error(ErrorCode::kFormat, "checkpoint is missing '" + reference.name(i) + "'");
    }
    if (it->second.shape() != reference.value(i).shape()) {
      throw Error(ErrorCode::kDimension, "checkpoint parameter '" + reference.name(i) +
                                             "' has shape " + ShapeToString(it->second.shape()) +
                                             ", model expects " +
                                             ShapeToString(reference.value(i).shape()));
    }
    ckpt.params.Add(reference.name(i), std::move(it->second));
    loaded.erase(it);
  }
  if (!loaded.empty()) {
    throw Error(ErrorCode::kFormat, "checkpoint has unexpected parameter '" + loaded.begin()->first + "'");
  }
  return ckpt;
}

}  // namespace semmatch
