#pragma once

#include <cstdint>
#include <vector>

#include "respa/data.hpp"
#include "respa/model.hpp"

namespace respa {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 1;  // 0 returns the seeded initialization untouched
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  MlpClassifier model;
  double train_accuracy = 0.0;
  double final_mean_loss = 0.0;
};

// Mini-batch SGD, fully deterministic for a fixed seed: the initialization
// is drawn from cfg.seed and the per-epoch shuffle from a sub-seed of it.
// Throws InvariantError with a diagnostic if the loss turns non-finite.
TrainResult train_classifier(const Architecture& arch, const std::vector<LabeledSample>& dataset,
                             const TrainConfig& cfg);

double classification_accuracy(const MlpClassifier& model, const std::vector<LabeledSample>& dataset);

}  // namespace respa
