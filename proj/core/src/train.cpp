#include "respa/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "respa/error.hpp"
#include "respa/rng.hpp"

namespace respa {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be > 0");
  if (epochs < 0) throw ConfigError("train config: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
}

TrainResult train_classifier(const Architecture& arch, const std::vector<LabeledSample>& dataset,
                             const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("train: dataset is empty");
  for (const LabeledSample& s : dataset) {
    if (static_cast<int>(s.x.size()) != arch.input_dim || s.classes() != arch.classes) {
      throw DimensionError("train: sample shape does not match the architecture");
    }
  }

  MlpClassifier model = MlpClassifier::seeded_init(arch, cfg.seed);
  SeededRng shuffle_rng(derive_seed(cfg.seed, "shuffle"));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double last_epoch_mean_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the dedicated sub-stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t batch_end = std::min(pos + static_cast<std::size_t>(cfg.batch_size), order.size());
      MlpClassifier::ParamGrads grads = model.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = pos; k < batch_end; ++k) {
        const LabeledSample& s = dataset[order[k]];
        batch_loss += model.accumulate_param_grads(s.x, s.y, grads);
      }
      const double n = static_cast<double>(batch_end - pos);
      if (!std::isfinite(batch_loss)) {
        throw InvariantError("train: loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                             ", batch starting at sample " + std::to_string(pos));
      }
      model.apply_update(grads, -cfg.learning_rate / n);
      epoch_loss += batch_loss;
      pos = batch_end;
    }
    last_epoch_mean_loss = epoch_loss / static_cast<double>(dataset.size());
  }

  TrainResult result{std::move(model), 0.0, last_epoch_mean_loss};
  result.train_accuracy = classification_accuracy(result.model, dataset);
  return result;
}

double classification_accuracy(const MlpClassifier& model, const std::vector<LabeledSample>& dataset) {
  if (dataset.empty()) throw ConfigError("accuracy: dataset is empty");
  std::size_t correct = 0;
  for (const LabeledSample& s : dataset) {
    if (model.predict(s.x) == s.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace respa
