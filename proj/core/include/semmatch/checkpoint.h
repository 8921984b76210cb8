#ifndef SEMMATCH_CHECKPOINT_H_
#define SEMMATCH_CHECKPOINT_H_

#include <string>

#include "semmatch/model.h"
#include "semmatch/param_store.h"

namespace semmatch {

struct Checkpoint {
  ParamStore<float> params;
  ModelConfig config;
};

// `key = value` lines.
std::string FormatModelConfig(const ModelConfig& config);
ModelConfig ParseModelConfig(const std::string& text);

// Directory with one SRMT blob per parameter, `manifest.txt` listing
// `name file dims...` and `config.txt`.
void SaveCheckpoint(const std::string& directory, const ParamStore<float>& params,
                    const ModelConfig& config);
// Validates that names and shapes match the configured architecture.
Checkpoint LoadCheckpoint(const std::string& directory);

}  // namespace semmatch

#endif  // SEMMATCH_CHECKPOINT_H_
