#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "respa/model.hpp"

namespace respa {

// Checkpoint: model parameters plus the seed the model was trained from.
struct Checkpoint {
  MlpClassifier model;
  std::uint64_t seed = 0;
};

// Self-describing text format: a header with version, seed and architecture,
// then one row-major decimal-text line per weight row / bias vector. Values
// use shortest round-trip formatting, so save -> load reproduces the weights
// bit for bit and checkpoints diff cleanly.
std::string serialize_checkpoint(const MlpClassifier& model, std::uint64_t seed);

// Throws ParseError naming the offending field and line; an unsupported
// version line gets its own message. No partial models are produced.
Checkpoint parse_checkpoint(const std::string& text);

void save_model(const MlpClassifier& model, std::uint64_t seed,
                const std::filesystem::path& path, bool force = false);
Checkpoint load_model(const std::filesystem::path& path);

}  // namespace respa
